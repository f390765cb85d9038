"""Fixed-point quantization and exact integer rounding rules.

The attested computation runs over signed 32-bit integers so that every
implementation reproduces it bit for bit. Floats enter exactly once, at
quantize(); from there on all arithmetic is wide-integer with a single
rounding rule (round to nearest, ties away from zero) and saturation at the
i32 boundary instead of overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

I32_MIN = -(2**31)
I32_MAX = 2**31 - 1
DEFAULT_SCALE = 65536


def _check_shape(shape: tuple[int, ...]) -> None:
    if not isinstance(shape, tuple):
        raise TypeError("shape must be a tuple of ints")
    for dim in shape:
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 0:
            raise ValueError(f"invalid dimension {dim!r}")


def _check_scale(scale: int) -> None:
    if not isinstance(scale, int) or isinstance(scale, bool):
        raise TypeError("scale must be int")
    if scale < 1:
        raise ValueError("scale must be a positive integer")


@dataclass(frozen=True, eq=False)
class FloatTensor:
    """A finite binary64 tensor, stored flat in row-major order."""

    shape: tuple[int, ...]
    data: np.ndarray

    def __post_init__(self) -> None:
        _check_shape(self.shape)
        arr = np.array(self.data, dtype=np.float64, copy=True).reshape(-1)
        if arr.size != math.prod(self.shape):
            raise ValueError(
                f"shape {self.shape} needs {math.prod(self.shape)} elements, got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor elements must be finite (no NaN/Inf)")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.size


@dataclass(frozen=True, eq=False)
class QuantizedTensor:
    """Signed 32-bit fixed-point tensor with scale S: value = q / S."""

    shape: tuple[int, ...]
    scale: int
    q: np.ndarray

    def __post_init__(self) -> None:
        _check_shape(self.shape)
        _check_scale(self.scale)
        arr = np.asarray(self.q).reshape(-1)
        if arr.dtype.kind not in "iu":
            raise TypeError("q must be an integer array")
        if arr.size != math.prod(self.shape):
            raise ValueError(
                f"shape {self.shape} needs {math.prod(self.shape)} elements, got {arr.size}"
            )
        wide = arr.astype(np.int64, casting="safe")
        if wide.size and (int(wide.min()) < I32_MIN or int(wide.max()) > I32_MAX):
            raise ValueError("elements outside signed 32-bit range")
        out = np.array(wide, dtype=np.int32)
        out.flags.writeable = False
        object.__setattr__(self, "q", out)

    @property
    def n(self) -> int:
        return self.q.size


def _round_half_away(values: np.ndarray) -> np.ndarray:
    # np.round ties to even and floor(v + 0.5) double-rounds near 0.5,
    # so round magnitudes explicitly: frac = mag - floor(mag) is exact in
    # binary64, making the >= 0.5 test reliable.
    mag = np.abs(values)
    base = np.floor(mag)
    rounded = base + (mag - base >= 0.5)
    return np.copysign(rounded, values)


def round_half_away_from_zero(value: float) -> int:
    """Round a finite float to the nearest integer, ties away from zero."""
    if not math.isfinite(value):
        raise ValueError("value must be finite")
    return int(_round_half_away(np.asarray([value], dtype=np.float64))[0])


def quantize(x: FloatTensor, scale: int) -> QuantizedTensor:
    """q_j = round(x_j * S), ties away from zero, saturated to i32."""
    _check_scale(scale)
    rounded = _round_half_away(x.data * float(scale))
    clipped = np.clip(rounded, float(I32_MIN), float(I32_MAX))
    return QuantizedTensor(shape=x.shape, scale=scale, q=clipped.astype(np.int32))


def dequantize(qt: QuantizedTensor) -> FloatTensor:
    """x_j = q_j / S as binary64."""
    return FloatTensor(shape=qt.shape, data=qt.q.astype(np.float64) / float(qt.scale))


def scale_round_div(value: int, num: int, den: int) -> int:
    """round(value * num / den) with ties away from zero, saturated to i32.

    Exact arbitrary-precision arithmetic throughout; den must be >= 1 and
    num >= 0. Saturation is the defined behavior at the i32 boundary, never
    an error.
    """
    if den < 1:
        raise ValueError("den must be >= 1")
    if num < 0:
        raise ValueError("num must be >= 0")
    prod = value * num
    mag, rem = divmod(abs(prod), den)
    if 2 * rem >= den:
        mag += 1
    result = mag if prod >= 0 else -mag
    return min(max(result, I32_MIN), I32_MAX)


def scale_round_div_array(values: np.ndarray, num: int, den: int) -> np.ndarray:
    """Vectorized scale_round_div over an int32 array; returns int32.

    |value| * num stays below 2^63 for i32 values and u32 num, so the int64
    intermediate cannot overflow.
    """
    if den < 1 or den > 2**32 - 1:
        raise ValueError("den out of range")
    if num < 0 or num > 2**32 - 1:
        raise ValueError("num out of unsigned 32-bit range")
    prod = values.astype(np.int64) * np.int64(num)
    mag = np.abs(prod)
    q, rem = np.divmod(mag, np.int64(den))
    q = q + (rem >= np.int64(den) - rem)  # 2*rem >= den without forming 2*rem
    signed = np.where(prod >= 0, q, -q)
    return np.clip(signed, I32_MIN, I32_MAX).astype(np.int32)


def serialize_i32_le(qt: QuantizedTensor) -> bytes:
    """Little-endian 4-byte two's-complement bytes of the flat vector.

    This is the exact byte stream committed by the journal's output hash.
    """
    return qt.q.astype("<i4", copy=False).tobytes()
