"""The attested computation: deterministic inverted dropout plus its journal.

Two parallel forward paths share one mask. The quantized path is the
authoritative computation that gets attested and journaled; the float path
produces the tensor training actually consumes. Keeping them on the same
mask is what makes the proof be about the dropout the model saw.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crypto import DIGEST_SIZE, sha256
from .prg import DropoutParams
from .quant import FloatTensor, QuantizedTensor, scale_round_div_array, serialize_i32_le

_U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class Journal:
    """Commitment to one dropout execution: mask hash, output hash, count."""

    mask_hash: bytes
    output_hash: bytes
    element_count: int

    def __post_init__(self) -> None:
        for name, value in (("mask_hash", self.mask_hash), ("output_hash", self.output_hash)):
            if not isinstance(value, bytes) or len(value) != DIGEST_SIZE:
                raise ValueError(f"{name} must be exactly {DIGEST_SIZE} bytes")
        if (
            not isinstance(self.element_count, int)
            or isinstance(self.element_count, bool)
            or not 0 <= self.element_count <= _U64_MAX
        ):
            raise ValueError("element_count out of unsigned 64-bit range")


def _mask_lanes(mask: bytes, n: int) -> np.ndarray:
    if not isinstance(mask, (bytes, bytearray)):
        raise TypeError("mask must be bytes")
    if len(mask) != n:
        raise ValueError(f"mask length {len(mask)} != element count {n}")
    lanes = np.frombuffer(bytes(mask), dtype=np.uint8)
    if lanes.size and not np.all(lanes <= 1):
        raise ValueError("mask bytes must be 0x00 or 0x01")
    return lanes


def apply_quantized_dropout(
    q: QuantizedTensor, mask: bytes, params: DropoutParams
) -> QuantizedTensor:
    """Inverted dropout over integers.

    Kept elements scale by p_den / (p_den - p_num) with round-to-nearest
    (ties away from zero) and i32 saturation; dropped elements become
    exactly 0. Shape and scale carry through.
    """
    lanes = _mask_lanes(mask, q.n)
    scaled = scale_round_div_array(q.q, params.p_den, params.p_den - params.p_num)
    out = np.where(lanes == 1, scaled, np.int32(0))
    return QuantizedTensor(shape=q.shape, scale=q.scale, q=out)


def apply_float_dropout(x: FloatTensor, mask: bytes, params: DropoutParams) -> FloatTensor:
    """Inverted dropout in binary64 on the same mask; dropped elements are 0.0."""
    lanes = _mask_lanes(mask, x.n)
    factor = params.p_den / (params.p_den - params.p_num)
    out = np.where(lanes == 1, x.data * factor, 0.0)
    return FloatTensor(shape=x.shape, data=out)


def compute_journal(mask: bytes, q_out: QuantizedTensor) -> Journal:
    """Hash the mask bytes and the little-endian output serialization."""
    if len(mask) != q_out.n:
        raise ValueError(f"mask length {len(mask)} != element count {q_out.n}")
    return Journal(
        mask_hash=sha256(bytes(mask)),
        output_hash=sha256(serialize_i32_le(q_out)),
        element_count=q_out.n,
    )
