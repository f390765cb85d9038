"""Key files: one lowercase hex line per file.

``<name>.sk`` holds the 32-byte secret seed, ``<name>.pk`` the derived
public key. Secret files are written with owner-only permissions.
"""

from __future__ import annotations

import os
from pathlib import Path

from .crypto import PUBLIC_KEY_SIZE, SEED_SIZE, SigningKeyPair, keygen


class KeyFormatError(ValueError):
    """Raised when a key file's contents do not parse."""


def _read_hex_line(path: Path | str, size: int) -> bytes:
    text = Path(path).read_text(encoding="utf-8").strip()
    try:
        raw = bytes.fromhex(text)
    except ValueError:
        raise KeyFormatError(f"{path}: not a hex string") from None
    if len(raw) != size:
        raise KeyFormatError(f"{path}: expected {size} bytes of hex, got {len(raw)}")
    return raw


def load_secret_key(path: Path | str) -> SigningKeyPair:
    return keygen(_read_hex_line(path, SEED_SIZE))


def load_public_key(path: Path | str) -> bytes:
    return _read_hex_line(path, PUBLIC_KEY_SIZE)


def write_keypair(directory: Path | str, name: str, keys: SigningKeyPair) -> tuple[Path, Path]:
    """Write ``<name>.sk`` and ``<name>.pk``; refuses to overwrite either."""
    directory = Path(directory)
    sk_path = directory / f"{name}.sk"
    pk_path = directory / f"{name}.pk"
    for path in (sk_path, pk_path):
        if path.exists():
            raise FileExistsError(f"refusing to overwrite {path}")
    directory.mkdir(parents=True, exist_ok=True)
    fd = os.open(sk_path, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o600)
    with os.fdopen(fd, "w", encoding="utf-8") as handle:
        handle.write(keys.seed.hex() + "\n")
    pk_path.write_text(keys.public_key.hex() + "\n", encoding="utf-8")
    return sk_path, pk_path


def generate_keypair(directory: Path | str, name: str) -> tuple[Path, Path]:
    """Generate a fresh key pair from OS randomness and write its files."""
    return write_keypair(directory, name, keygen(os.urandom(SEED_SIZE)))
