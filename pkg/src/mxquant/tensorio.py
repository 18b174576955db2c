"""NPY-subset tensor ingestion, zero-masking ablation, and tensor error reports.

Only NPY v1.0 files with C-order float32/float64 payloads are accepted; the
parser is deliberately strict so malformed or unsupported files fail with a
precise message instead of being silently reinterpreted.
"""

from __future__ import annotations

import ast
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .formats import is_finite_array
from .quantizer import ErrorReport, quantize_tensor
from .scaling import ScaleStrategy

_MAGIC = b"\x93NUMPY"
_SUPPORTED_DESCRS = {"<f4": "float32", "<f8": "float64"}
_DESCR_OF_DTYPE = {"float32": "<f4", "float64": "<f8"}


class NpyFormatError(ValueError):
    """Raised when a file is not in the supported NPY v1.0 subset."""


@dataclass(frozen=True)
class TensorFile:
    dtype: str  # "float32" | "float64"
    shape: tuple[int, ...]
    data: np.ndarray  # row-major, working precision (float64)


@dataclass(frozen=True)
class MaskSpec:
    """Zero out elements with lower <= |v| < upper."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if self.lower < 0:
            raise ValueError("lower must be non-negative")
        if not self.upper > self.lower:
            raise ValueError("upper must exceed lower")


def load_tensor(path) -> TensorFile:
    raw = Path(path).read_bytes()
    if raw[:6] != _MAGIC:
        raise NpyFormatError(f"{path}: missing NPY magic")
    if raw[6:8] != b"\x01\x00":
        raise NpyFormatError(f"{path}: only NPY version 1.0 is supported")
    (header_len,) = struct.unpack("<H", raw[8:10])
    header_end = 10 + header_len
    try:
        header = ast.literal_eval(raw[10:header_end].decode("latin1"))
    except (SyntaxError, ValueError, UnicodeDecodeError) as exc:
        raise NpyFormatError(f"{path}: malformed header dict: {exc}") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise NpyFormatError(f"{path}: header must have descr/fortran_order/shape")
    descr = header["descr"]
    if descr not in _SUPPORTED_DESCRS:
        raise NpyFormatError(
            f"{path}: unsupported dtype {descr!r}; expected one of {sorted(_SUPPORTED_DESCRS)}"
        )
    if header["fortran_order"]:
        raise NpyFormatError(f"{path}: Fortran-order payloads are not supported")
    shape = tuple(int(d) for d in header["shape"])
    count = int(np.prod(shape)) if shape else 1
    np_dtype = np.dtype(descr)
    payload = raw[header_end:]
    if len(payload) != count * np_dtype.itemsize:
        raise NpyFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {count * np_dtype.itemsize}"
        )
    data = np.frombuffer(payload, dtype=np_dtype).reshape(shape)
    if not np.all(np.isfinite(data)):
        raise NpyFormatError(f"{path}: payload contains non-finite values")
    return TensorFile(
        dtype=_SUPPORTED_DESCRS[descr], shape=shape, data=data.astype(np.float64)
    )


def save_tensor(path, tf: TensorFile) -> None:
    descr = _DESCR_OF_DTYPE[tf.dtype]
    shape_repr = (
        f"({tf.shape[0]},)" if len(tf.shape) == 1 else repr(tuple(tf.shape))
    )
    header = f"{{'descr': '{descr}', 'fortran_order': False, 'shape': {shape_repr}, }}"
    # Pad so the payload starts on a 64-byte boundary, newline-terminated.
    total = 10 + len(header) + 1
    header = header + " " * (-total % 64) + "\n"
    with open(path, "wb") as fh:
        fh.write(_MAGIC + b"\x01\x00" + struct.pack("<H", len(header)))
        fh.write(header.encode("latin1"))
        fh.write(np.ascontiguousarray(tf.data, dtype=np.dtype(descr)).tobytes())


def tensor_file_from_array(values, dtype: str = "float64") -> TensorFile:
    arr = is_finite_array(values)
    return TensorFile(dtype=dtype, shape=tuple(arr.shape), data=arr.astype(np.float64))


def mask_range(tf: TensorFile, spec: MaskSpec) -> tuple[TensorFile, float]:
    """Zero every element on the half-open magnitude interval [lower, upper)."""
    mask = (np.abs(tf.data) >= spec.lower) & (np.abs(tf.data) < spec.upper)
    masked = np.where(mask, 0.0, tf.data)
    fraction = float(np.count_nonzero(mask)) / tf.data.size if tf.data.size else 0.0
    return TensorFile(dtype=tf.dtype, shape=tf.shape, data=masked), fraction


def report_tensor_error(
    tf: TensorFile, block_size: int, strategy: ScaleStrategy
) -> tuple[ErrorReport, dict[float, int]]:
    """Aggregate quantization error plus a histogram of chosen block scales."""
    blocks, report = quantize_tensor(tf.data, block_size, strategy)
    scale_hist: dict[float, int] = {}
    for qb in blocks:
        v = qb.scale.scale_code.value
        scale_hist[v] = scale_hist.get(v, 0) + 1
    return report, scale_hist
