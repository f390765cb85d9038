"""Textual tensor files: a small header plus one decimal float per line.

Desk-scale, diff-able, language-neutral. Example:

    vdo-tensor-v1
    shape: 2 3
    scale: 65536
    1.25
    -0.5
    ...

The scale in the header is the quantization scale to use when proving over
this tensor; prove-side flags may override it.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .quant import FloatTensor

TENSOR_MAGIC = "vdo-tensor-v1"


class TensorFormatError(ValueError):
    """Raised when a tensor file does not parse."""


def write_tensor(path: Path | str, tensor: FloatTensor, scale: int) -> None:
    if scale < 1:
        raise ValueError("scale must be a positive integer")
    lines = [TENSOR_MAGIC, "shape: " + " ".join(str(d) for d in tensor.shape), f"scale: {scale}"]
    lines.extend(repr(float(v)) for v in tensor.data)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_tensor(path: Path | str) -> tuple[FloatTensor, int]:
    """Parse a tensor file, returning the tensor and its header scale."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != TENSOR_MAGIC:
        raise TensorFormatError(f"{path}: missing {TENSOR_MAGIC!r} header")
    if len(lines) < 3 or not lines[1].startswith("shape:") or not lines[2].startswith("scale:"):
        raise TensorFormatError(f"{path}: expected 'shape:' then 'scale:' header lines")
    try:
        shape = tuple(int(tok) for tok in lines[1][len("shape:") :].split())
        scale = int(lines[2][len("scale:") :].strip())
    except ValueError as exc:
        raise TensorFormatError(f"{path}: bad header: {exc}") from None
    if any(d < 0 for d in shape):
        raise TensorFormatError(f"{path}: negative dimension in shape")
    if scale < 1:
        raise TensorFormatError(f"{path}: scale must be >= 1")
    values = []
    for lineno, token in enumerate(lines[3:], start=4):
        try:
            values.append(float(token))
        except ValueError:
            raise TensorFormatError(f"{path}:{lineno}: not a decimal float: {token!r}") from None
    expected = math.prod(shape)
    if len(values) != expected:
        raise TensorFormatError(
            f"{path}: shape {shape} needs {expected} values, file has {len(values)}"
        )
    try:
        tensor = FloatTensor(shape=shape, data=np.asarray(values, dtype=np.float64))
    except ValueError as exc:
        raise TensorFormatError(f"{path}: {exc}") from None
    return tensor, scale
