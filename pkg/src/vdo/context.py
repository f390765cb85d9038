"""Invocation context and its canonical byte encoding.

A context names one dropout invocation: which model, which training step and
batch, which layer, plus a 32-byte verifier-chosen nonce. The packed bytes
feed the seed derivation, so two contexts that differ anywhere must pack to
different bytes; every variable-length field is length-prefixed to keep the
encoding injective.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from .crypto import sha256

CONTEXT_TAG = b"VDO-CTX-v1"
NONCE_SIZE = 32
MAX_ID_BYTES = 256
_U64_MAX = 2**64 - 1


def _check_id(name: str, value: str) -> bytes:
    if not isinstance(value, str):
        raise TypeError(f"{name} must be str")
    encoded = value.encode("utf-8")
    if not encoded:
        raise ValueError(f"{name} must be non-empty")
    if len(encoded) > MAX_ID_BYTES:
        raise ValueError(f"{name} exceeds {MAX_ID_BYTES} UTF-8 bytes")
    return encoded


def _check_u64(name: str, value: int) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise TypeError(f"{name} must be int")
    if not 0 <= value <= _U64_MAX:
        raise ValueError(f"{name} out of unsigned 64-bit range")


@dataclass(frozen=True)
class Context:
    """One dropout invocation's identity.

    ``model_id`` and ``layer_id`` are non-empty UTF-8 strings of at most 256
    bytes; ``step`` and ``batch_id`` are unsigned 64-bit; ``nonce`` is exactly
    32 bytes, chosen by the verifier once per job so that seeds cannot be
    ground out ahead of time.
    """

    model_id: str
    step: int
    batch_id: int
    nonce: bytes
    layer_id: str

    def __post_init__(self) -> None:
        _check_id("model_id", self.model_id)
        _check_id("layer_id", self.layer_id)
        _check_u64("step", self.step)
        _check_u64("batch_id", self.batch_id)
        if not isinstance(self.nonce, bytes):
            raise TypeError("nonce must be bytes")
        if len(self.nonce) != NONCE_SIZE:
            raise ValueError(f"nonce must be exactly {NONCE_SIZE} bytes")


def _length_prefixed(encoded: str) -> bytes:
    raw = encoded.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def pack(ctx: Context) -> bytes:
    """Serialize ``ctx`` canonically.

    Layout: ASCII tag ``VDO-CTX-v1``, then length-prefixed model_id, step and
    batch_id as little-endian u64, the raw 32-byte nonce, and length-prefixed
    layer_id. String length prefixes are little-endian u32 over UTF-8 bytes.
    """
    return b"".join(
        (
            CONTEXT_TAG,
            _length_prefixed(ctx.model_id),
            struct.pack("<Q", ctx.step),
            struct.pack("<Q", ctx.batch_id),
            ctx.nonce,
            _length_prefixed(ctx.layer_id),
        )
    )


def vrf_input(ctx: Context) -> bytes:
    """The 32-byte message the trainer signs: SHA-256 of the packed context."""
    return sha256(pack(ctx))
