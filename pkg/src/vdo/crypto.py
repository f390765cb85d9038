"""Hashing and deterministic-signature primitives.

Everything above this layer treats signatures as opaque 64-byte strings and
depends only on two facts: signing is deterministic (same key and message,
same bytes) and verification is strict (a signature either verifies or it
does not; malformed inputs never verify).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

DIGEST_SIZE = 32
SEED_SIZE = 32
PUBLIC_KEY_SIZE = 32
SIGNATURE_SIZE = 64


def sha256(data: bytes) -> bytes:
    """Return the 32-byte SHA-256 digest of ``data``."""
    return hashlib.sha256(data).digest()


def _public_key_from_seed(seed: bytes) -> bytes:
    private = Ed25519PrivateKey.from_private_bytes(seed)
    return private.public_key().public_bytes(
        serialization.Encoding.Raw, serialization.PublicFormat.Raw
    )


@dataclass(frozen=True)
class SigningKeyPair:
    """An Ed25519 key pair.

    ``seed`` is the 32-byte private seed; it stays in process memory and is
    never placed in any proof artifact. ``public_key`` is the 32-byte
    encoded public point, checked at construction to match the seed.
    """

    seed: bytes = field(repr=False)
    public_key: bytes

    def __post_init__(self) -> None:
        if len(self.seed) != SEED_SIZE:
            raise ValueError(f"seed must be {SEED_SIZE} bytes, got {len(self.seed)}")
        if len(self.public_key) != PUBLIC_KEY_SIZE:
            raise ValueError(
                f"public key must be {PUBLIC_KEY_SIZE} bytes, got {len(self.public_key)}"
            )
        if _public_key_from_seed(self.seed) != self.public_key:
            raise ValueError("public key does not match seed")


def keygen(seed: bytes) -> SigningKeyPair:
    """Derive a key pair from a 32-byte seed.

    The caller supplies the randomness; this function is a pure map from
    seed to key pair so that fixture keys can be reproduced exactly.
    """
    if len(seed) != SEED_SIZE:
        raise ValueError(f"seed must be {SEED_SIZE} bytes, got {len(seed)}")
    return SigningKeyPair(seed=seed, public_key=_public_key_from_seed(seed))


def sign_deterministic(keys: SigningKeyPair, message: bytes) -> bytes:
    """Sign ``message``, returning the 64-byte signature.

    Ed25519 signing is deterministic: the nonce is derived from the key and
    the message, so repeated calls return identical bytes. The protocol's
    reproducibility guarantees rest on this.
    """
    private = Ed25519PrivateKey.from_private_bytes(keys.seed)
    return private.sign(message)


def verify_signature(public_key: bytes, message: bytes, signature: bytes) -> bool:
    """Check ``signature`` over ``message`` against ``public_key``.

    Returns False (never raises) for wrong-length keys, undecodable points,
    malformed signatures, and honest verification failures alike.
    """
    if len(public_key) != PUBLIC_KEY_SIZE or len(signature) != SIGNATURE_SIZE:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(signature, message)
    except (InvalidSignature, ValueError):
        return False
    return True
