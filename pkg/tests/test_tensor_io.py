"""Textual tensor file round trips and parse failures."""

from __future__ import annotations

import numpy as np
import pytest

from vdo.quant import FloatTensor
from vdo.tensor_io import TENSOR_MAGIC, TensorFormatError, read_tensor, write_tensor


def _ft(values, shape=None) -> FloatTensor:
    arr = np.asarray(values, dtype=np.float64)
    return FloatTensor(shape=shape or (arr.size,), data=arr)


def test_round_trip_exact(tmp_path):
    # repr() of a float round-trips exactly through float()
    values = [1.25, -0.5, 0.1, 1e-300, 123456789.123456, -0.0, 4.0 / 3.0]
    path = tmp_path / "t.txt"
    write_tensor(path, _ft(values), 65536)
    tensor, scale = read_tensor(path)
    assert scale == 65536
    assert tensor.shape == (7,)
    assert tensor.data.tolist() == values


def test_round_trip_2d(tmp_path):
    path = tmp_path / "t.txt"
    write_tensor(path, _ft([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], shape=(2, 3)), 128)
    tensor, scale = read_tensor(path)
    assert tensor.shape == (2, 3)
    assert scale == 128


def test_file_layout(tmp_path):
    path = tmp_path / "t.txt"
    write_tensor(path, _ft([0.5, -1.5], shape=(2,)), 7)
    lines = path.read_text().splitlines()
    assert lines[0] == TENSOR_MAGIC
    assert lines[1] == "shape: 2"
    assert lines[2] == "scale: 7"
    assert lines[3] == "0.5"
    assert lines[4] == "-1.5"


def test_empty_tensor(tmp_path):
    path = tmp_path / "t.txt"
    write_tensor(path, FloatTensor(shape=(0,), data=np.empty(0)), 1)
    tensor, scale = read_tensor(path)
    assert tensor.n == 0


def test_blank_lines_ignored(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text(f"{TENSOR_MAGIC}\n\nshape: 1\n\nscale: 2\n\n0.5\n\n")
    tensor, scale = read_tensor(path)
    assert tensor.data.tolist() == [0.5]
    assert scale == 2


@pytest.mark.parametrize(
    "content",
    [
        "",  # empty file
        "not-the-magic\nshape: 1\nscale: 1\n0.5\n",
        "vdo-tensor-v0\nshape: 1\nscale: 1\n0.5\n",  # wrong version
        "vdo-tensor-v1\nscale: 1\nshape: 1\n0.5\n",  # swapped header lines
        "vdo-tensor-v1\nshape: 1\n0.5\n",  # missing scale
        "vdo-tensor-v1\nshape: x\nscale: 1\n0.5\n",  # non-integer dim
        "vdo-tensor-v1\nshape: -1\nscale: 1\n",  # negative dim
        "vdo-tensor-v1\nshape: 1\nscale: 0\n0.5\n",  # zero scale
        "vdo-tensor-v1\nshape: 1\nscale: q\n0.5\n",  # non-integer scale
        "vdo-tensor-v1\nshape: 2\nscale: 1\n0.5\n",  # too few values
        "vdo-tensor-v1\nshape: 1\nscale: 1\n0.5\n0.5\n",  # too many values
        "vdo-tensor-v1\nshape: 1\nscale: 1\nhello\n",  # non-float value
        "vdo-tensor-v1\nshape: 1\nscale: 1\nnan\n",  # NaN rejected
        "vdo-tensor-v1\nshape: 1\nscale: 1\ninf\n",  # Inf rejected
    ],
)
def test_rejects_malformed(tmp_path, content):
    path = tmp_path / "bad.txt"
    path.write_text(content)
    with pytest.raises(TensorFormatError):
        read_tensor(path)


def test_error_names_offending_line(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("vdo-tensor-v1\nshape: 2\nscale: 1\n0.5\noops\n")
    with pytest.raises(TensorFormatError, match="oops"):
        read_tensor(path)


def test_write_rejects_bad_scale(tmp_path):
    with pytest.raises(ValueError):
        write_tensor(tmp_path / "t.txt", _ft([1.0]), 0)


def test_missing_file_is_oserror(tmp_path):
    with pytest.raises(OSError):
        read_tensor(tmp_path / "absent.txt")
