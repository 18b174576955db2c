"""End-to-end block quantize/dequantize pipeline with error accounting.

Flattening is row-major; blocks are consecutive slices of the flattened
tensor and the last block of a tensor may be short. Aggregation sums blocks
in ascending block-index order so results are independent of how the work is
scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .formats import E2M1, E2M1_MAGNITUDES, CodeValue, encode_exact, is_finite_array, round_e2m1
from .scaling import ScaleResult, ScaleStrategy, select_scales, tensor_prescale

_BIN_VALUES = np.array(E2M1_MAGNITUDES)


@dataclass(frozen=True)
class Block:
    """A block of working-precision values to be quantized together."""

    values: np.ndarray
    block_size: int

    @staticmethod
    def of(values) -> "Block":
        arr = is_finite_array(values).ravel()
        return Block(values=arr, block_size=len(arr))


@dataclass(frozen=True)
class QuantizedBlock:
    element_codes: list[CodeValue]
    scale: ScaleResult

    def element_values(self) -> np.ndarray:
        return np.array([cv.value for cv in self.element_codes])


@dataclass
class ErrorReport:
    """Squared-error totals split into clipping and rounding contributions."""

    total_sse: float = 0.0
    clip_sse: float = 0.0
    round_sse: float = 0.0
    n: int = 0
    entry_bin_counts: dict[float, int] = field(
        default_factory=lambda: {m: 0 for m in E2M1_MAGNITUDES}
    )
    clipped_count: int = 0

    @property
    def mse(self) -> float:
        return self.total_sse / self.n if self.n else 0.0

    def merge(self, other: "ErrorReport") -> "ErrorReport":
        self.total_sse += other.total_sse
        self.clip_sse += other.clip_sse
        self.round_sse += other.round_sse
        self.n += other.n
        self.clipped_count += other.clipped_count
        for k, v in other.entry_bin_counts.items():
            self.entry_bin_counts[k] += v
        return self


@dataclass
class BatchResult:
    """Vectorized quantization of a (n_blocks, block_size) array."""

    quant_values: np.ndarray  # rounded v/S on the E2M1 grid, (n_blocks, bs)
    scales: np.ndarray  # per-block scale values
    tensor_scale: float
    chosen_m: np.ndarray
    underflowed: np.ndarray
    clipped: np.ndarray  # elementwise: scaled magnitude exceeded 6 pre-rounding

    def dequantized(self) -> np.ndarray:
        return self.quant_values * self.scales[:, None] * self.tensor_scale


def quantize_batch(
    blocks: np.ndarray, strategy: ScaleStrategy, tensor_scale: float = 1.0
) -> BatchResult:
    """Quantize every row of a 2-D array under one strategy.

    ``blocks`` must already be divided by ``tensor_scale`` when hierarchical
    scaling is in play; error accounting against the original values is the
    caller's job (see quantize_tensor).
    """
    scales, chosen_m, underflowed = select_scales(blocks, strategy)
    safe = scales > 0.0
    s = np.where(safe, scales, 1.0)
    ratio = blocks / s[:, None]
    clipped = safe[:, None] & (np.abs(ratio) > 6.0)
    q = np.where(safe[:, None], round_e2m1(ratio), 0.0)
    return BatchResult(q, scales, tensor_scale, chosen_m, underflowed, clipped)


def batch_error_report(original: np.ndarray, result: BatchResult) -> ErrorReport:
    """ErrorReport for a batch, measured against the pre-scaling originals."""
    deq = result.dequantized()
    err2 = (original - deq) ** 2
    total = float(np.sum(err2))
    clip = float(np.sum(err2[result.clipped]))
    bins = np.searchsorted(_BIN_VALUES, np.abs(result.quant_values).ravel())
    counts = np.bincount(bins, minlength=len(_BIN_VALUES))
    return ErrorReport(
        total_sse=total,
        clip_sse=clip,
        round_sse=total - clip,
        n=int(original.size),
        entry_bin_counts={m: int(c) for m, c in zip(E2M1_MAGNITUDES, counts)},
        clipped_count=int(np.count_nonzero(result.clipped)),
    )


def _to_quantized_block(
    q_row: np.ndarray, scale: float, strategy: ScaleStrategy,
    chosen_m: float, underflowed: bool, tensor_scale: float,
) -> QuantizedBlock:
    codes = [encode_exact(E2M1, float(v)) for v in q_row]
    sr = ScaleResult(
        scale_code=encode_exact(strategy.scale_format, float(scale)),
        chosen_M=float(chosen_m),
        tensor_scale=float(tensor_scale),
        underflowed_to_zero_before_adjustment=bool(underflowed),
    )
    return QuantizedBlock(element_codes=codes, scale=sr)


def quantize_block(block, strategy: ScaleStrategy, tensor_scale: float = 1.0) -> QuantizedBlock:
    """Quantize one block: select a scale, then round each v/S onto E2M1.

    A zero scale forces every element code to zero without dividing.
    """
    arr = is_finite_array(block).ravel()
    if arr.size == 0:
        raise ValueError("block must be non-empty")
    res = quantize_batch(arr[None, :] / tensor_scale, strategy, tensor_scale)
    return _to_quantized_block(
        res.quant_values[0], res.scales[0], strategy,
        res.chosen_m[0], res.underflowed[0], tensor_scale,
    )


def dequantize_block(q: QuantizedBlock) -> np.ndarray:
    s = q.scale.scale_code.value * q.scale.tensor_scale
    return q.element_values() * s


def error_report(original, q: QuantizedBlock) -> ErrorReport:
    """Error decomposition for one block against its original values."""
    orig = is_finite_array(original).ravel()
    vals = q.element_values()
    if len(orig) != len(vals):
        raise ValueError("original and quantized block lengths differ")
    deq = dequantize_block(q)
    err2 = (orig - deq) ** 2
    s = q.scale.scale_code.value * q.scale.tensor_scale
    clipped = (
        np.abs(orig / s) > 6.0 if s > 0 else np.zeros(len(orig), dtype=bool)
    )
    total = float(np.sum(err2))
    clip = float(np.sum(err2[clipped]))
    bins = np.searchsorted(_BIN_VALUES, np.abs(vals))
    counts = np.bincount(bins, minlength=len(_BIN_VALUES))
    return ErrorReport(
        total_sse=total,
        clip_sse=clip,
        round_sse=total - clip,
        n=len(orig),
        entry_bin_counts={m: int(c) for m, c in zip(E2M1_MAGNITUDES, counts)},
        clipped_count=int(np.count_nonzero(clipped)),
    )


def iter_block_slices(n: int, block_size: int):
    for start in range(0, n, block_size):
        yield slice(start, min(start + block_size, n))


def quantize_tensor(
    tensor, block_size: int, strategy: ScaleStrategy
) -> tuple[list[QuantizedBlock], ErrorReport]:
    """Chunk a flattened tensor into blocks and quantize each one.

    With ``strategy.hierarchical`` a tensor-wide prescale is applied first.
    The aggregate report sums per-block reports in block order.
    """
    arr = is_finite_array(tensor).ravel()
    if arr.size == 0:
        raise ValueError("tensor must be non-empty")
    if block_size < 1:
        raise ValueError("block_size must be >= 1")

    t = tensor_prescale(arr, strategy.scale_format) if strategy.hierarchical else 1.0
    scaled = arr / t

    blocks: list[QuantizedBlock] = []
    aggregate = ErrorReport()
    full = (len(arr) // block_size) * block_size
    if full:
        mat = scaled[:full].reshape(-1, block_size)
        res = quantize_batch(mat, strategy, t)
        aggregate.merge(batch_error_report(arr[:full].reshape(-1, block_size), res))
        for i in range(mat.shape[0]):
            blocks.append(
                _to_quantized_block(
                    res.quant_values[i], res.scales[i], strategy,
                    res.chosen_m[i], res.underflowed[i], t,
                )
            )
    if full < len(arr):
        tail = scaled[full:][None, :]
        res = quantize_batch(tail, strategy, t)
        aggregate.merge(batch_error_report(arr[full:][None, :], res))
        blocks.append(
            _to_quantized_block(
                res.quant_values[0], res.scales[0], strategy,
                res.chosen_m[0], res.underflowed[0], t,
            )
        )
    return blocks, aggregate
