"""Hash-expander PRG and keep-mask generation.

The 32-byte seed is expanded into an unbounded stream of unsigned 32-bit
words: block i is SHA-256(seed || le64(i)), and each 32-byte block yields
eight words decoded little-endian in byte order. Element j is kept when its
word is at least the threshold floor(p_num * 2^32 / p_den), computed in
exact integer arithmetic. Every party that re-derives the mask (prover,
attestor, verifier, the cross-language reference) must agree byte for byte,
which is why the counter origin, endianness, and intra-block word order are
all pinned down here.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

SEED_SIZE = 32
BLOCK_SIZE = 32
WORDS_PER_BLOCK = 8
_U32_MAX = 2**32 - 1


def _check_seed(seed: bytes) -> None:
    if not isinstance(seed, bytes):
        raise TypeError("seed must be bytes")
    if len(seed) != SEED_SIZE:
        raise ValueError(f"seed must be exactly {SEED_SIZE} bytes")


@dataclass(frozen=True)
class DropoutParams:
    """Exact rational dropout probability p = p_num / p_den.

    p = 1 is rejected: the inverted-dropout scale p_den / (p_den - p_num)
    would divide by zero.
    """

    p_num: int
    p_den: int

    def __post_init__(self) -> None:
        for name, value in (("p_num", self.p_num), ("p_den", self.p_den)):
            if not isinstance(value, int) or isinstance(value, bool):
                raise TypeError(f"{name} must be int")
            if not 0 <= value <= _U32_MAX:
                raise ValueError(f"{name} out of unsigned 32-bit range")
        if self.p_den < 1:
            raise ValueError("p_den must be >= 1")
        if self.p_num >= self.p_den:
            raise ValueError("p_num must be < p_den (p = 1 is disallowed)")


def threshold(params: DropoutParams) -> int:
    """T = floor(p_num * 2^32 / p_den), exact integer arithmetic.

    An element is kept when its PRG word u satisfies u >= T, so the keep
    probability is (2^32 - T) / 2^32; with p_num = 0 every element survives.
    """
    return (params.p_num << 32) // params.p_den


def _block(seed: bytes, counter: int) -> bytes:
    return hashlib.sha256(seed + struct.pack("<Q", counter)).digest()


class PrgStream:
    """Stateful word stream over the hash expander.

    Single-threaded mutable state; distinct streams are independent. The
    block counter starts at 0 and words within a block are consumed in
    ascending byte order.
    """

    def __init__(self, seed: bytes) -> None:
        _check_seed(seed)
        self.seed = seed
        self.counter = 0
        self._words: tuple[int, ...] = ()
        self._pos = WORDS_PER_BLOCK

    def _refill(self) -> None:
        block = _block(self.seed, self.counter)
        self.counter += 1
        self._words = struct.unpack("<8I", block)
        self._pos = 0


def prg_next_u32(stream: PrgStream) -> int:
    """Return the next unsigned 32-bit word of ``stream`` and advance it."""
    if stream._pos >= WORDS_PER_BLOCK:
        stream._refill()
    word = stream._words[stream._pos]
    stream._pos += 1
    return word


def prg_words(seed: bytes, n: int) -> np.ndarray:
    """The first ``n`` stream words as a uint32 array (bulk form)."""
    _check_seed(seed)
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return np.empty(0, dtype=np.uint32)
    nblocks = -(-n // WORDS_PER_BLOCK)
    raw = b"".join(_block(seed, i) for i in range(nblocks))
    return np.frombuffer(raw, dtype="<u4")[:n].astype(np.uint32, copy=False)


def generate_mask(seed: bytes, params: DropoutParams, n: int) -> bytes:
    """Keep mask for ``n`` elements: byte j is 0x01 (keep) or 0x00 (drop).

    Pure function of (seed, params, n); exactly n words are consumed, so a
    shorter mask is always a byte-prefix of a longer one from the same seed.
    """
    words = prg_words(seed, n)
    t = threshold(params)
    return (words >= np.uint64(t)).astype(np.uint8).tobytes()
