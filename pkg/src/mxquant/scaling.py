"""Scale-factor selection recipes for block quantization.

Each strategy maps a block of working-precision values to a representable
scale in the chosen scale format. Public per-block functions return a
ScaleResult with provenance; the private ``*_kernel`` functions operate on
2-D arrays of shape (n_blocks, block_size) and back both the per-block API
and the batched study harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formats import (
    E2M1_MAX,
    E4M3,
    E8M0,
    CodeValue,
    FormatSpec,
    encode_exact,
    is_finite_array,
    positive_values,
    round_e2m1,
    round_values,
)

KINDS = ("abs_max", "prevent_zero", "four_over_six", "mx_pow2", "brute_force")


@dataclass(frozen=True)
class ScaleStrategy:
    """A scale-selection recipe plus its parameters."""

    kind: str
    target_max: float = E2M1_MAX
    scale_format: FormatSpec = E4M3
    hierarchical: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if not self.target_max > 0:
            raise ValueError("target_max must be positive")
        if self.kind == "mx_pow2" and self.scale_format is not E8M0:
            object.__setattr__(self, "scale_format", E8M0)

    @property
    def label(self) -> str:
        short = {
            "abs_max": "absmax",
            "prevent_zero": "pz",
            "four_over_six": "4o6",
            "mx_pow2": "mxpow2",
            "brute_force": "brute",
        }[self.kind]
        return short + ("+H" if self.hierarchical else "")


@dataclass(frozen=True)
class ScaleResult:
    scale_code: CodeValue
    chosen_M: float
    tensor_scale: float = 1.0
    underflowed_to_zero_before_adjustment: bool = False


def _validate_block(block) -> np.ndarray:
    arr = is_finite_array(block).ravel()
    if arr.size == 0:
        raise ValueError("block must be non-empty")
    return arr


def abs_max_kernel(blocks: np.ndarray, M: float, scale_format: FormatSpec) -> np.ndarray:
    """Round_SF(max|v| / M) per block; may underflow to 0."""
    absmax = np.max(np.abs(blocks), axis=-1)
    return round_values(scale_format, absmax / M)


def block_sse_kernel(blocks: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """Per-block sum of squared dequantization errors under given scales."""
    safe = scales > 0.0
    s = np.where(safe, scales, 1.0)
    q = round_e2m1(blocks / s[..., None])
    deq = np.where(safe[..., None], q * s[..., None], 0.0)
    return np.sum((blocks - deq) ** 2, axis=-1)


def prevent_zero_kernel(
    blocks: np.ndarray, M: float, scale_format: FormatSpec
) -> tuple[np.ndarray, np.ndarray]:
    scales = abs_max_kernel(blocks, M, scale_format)
    underflowed = scales == 0.0
    return np.where(underflowed, scale_format.min_positive, scales), underflowed


def four_over_six_kernel(
    blocks: np.ndarray, scale_format: FormatSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Pick the lower-MSE of the M=4 and M=6 abs-max candidates per block.

    Ties prefer M=6, matching the plain abs-max baseline.
    """
    s4 = abs_max_kernel(blocks, 4.0, scale_format)
    s6 = abs_max_kernel(blocks, 6.0, scale_format)
    sse4 = block_sse_kernel(blocks, s4)
    sse6 = block_sse_kernel(blocks, s6)
    use4 = sse4 < sse6
    return np.where(use4, s4, s6), np.where(use4, 4.0, 6.0)


def mx_pow2_kernel(blocks: np.ndarray, M: float) -> tuple[np.ndarray, np.ndarray]:
    """2^floor(log2(max|v|/M)) clamped to the E8M0 range.

    All-zero blocks get the smallest E8M0 value and are flagged.
    """
    absmax = np.max(np.abs(blocks), axis=-1)
    zero = absmax == 0.0
    ratio = np.where(zero, 1.0, absmax / M)
    _, exp = np.frexp(ratio)  # ratio = m * 2^exp with m in [0.5, 1)
    exp = np.clip(exp - 1, -127, 127)
    scales = np.ldexp(1.0, exp.astype(np.int64))
    return np.where(zero, 2.0**-127, scales), zero


def brute_force_kernel(
    blocks: np.ndarray, scale_format: FormatSpec, chunk: int = 32
) -> np.ndarray:
    """Exhaustive search over all positive scale-format values, minimizing SSE.

    Candidates are scanned in ascending order and a strictly-smaller SSE is
    required to replace the incumbent, so ties resolve to the smallest scale.
    """
    cands = positive_values(scale_format)
    n_blocks = blocks.shape[0]
    best_sse = np.full(n_blocks, np.inf)
    best_scale = np.full(n_blocks, cands[0])
    for start in range(0, len(cands), chunk):
        cs = cands[start : start + chunk]
        q = round_e2m1(blocks[None, :, :] / cs[:, None, None])
        sse = np.sum((blocks[None, :, :] - q * cs[:, None, None]) ** 2, axis=-1)
        for j in range(len(cs)):
            better = sse[j] < best_sse
            best_sse = np.where(better, sse[j], best_sse)
            best_scale = np.where(better, cs[j], best_scale)
    return best_scale


def select_scales(
    blocks: np.ndarray, strategy: ScaleStrategy
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched dispatch: (scales, chosen_M, underflow flags) per block row."""
    n = blocks.shape[0]
    chosen_m = np.full(n, strategy.target_max)
    underflow = np.zeros(n, dtype=bool)
    if strategy.kind == "abs_max":
        scales = abs_max_kernel(blocks, strategy.target_max, strategy.scale_format)
        underflow = scales == 0.0
    elif strategy.kind == "prevent_zero":
        scales, underflow = prevent_zero_kernel(
            blocks, strategy.target_max, strategy.scale_format
        )
    elif strategy.kind == "four_over_six":
        scales, chosen_m = four_over_six_kernel(blocks, strategy.scale_format)
    elif strategy.kind == "mx_pow2":
        scales, underflow = mx_pow2_kernel(blocks, strategy.target_max)
    elif strategy.kind == "brute_force":
        scales = brute_force_kernel(blocks, strategy.scale_format)
    else:  # pragma: no cover - guarded by ScaleStrategy
        raise ValueError(strategy.kind)
    return scales, chosen_m, underflow


def _result(
    scale: float,
    scale_format: FormatSpec,
    chosen_m: float,
    underflowed: bool,
    tensor_scale: float = 1.0,
) -> ScaleResult:
    return ScaleResult(
        scale_code=encode_exact(scale_format, float(scale)),
        chosen_M=float(chosen_m),
        tensor_scale=float(tensor_scale),
        underflowed_to_zero_before_adjustment=bool(underflowed),
    )


def scale_abs_max(block, M: float = E2M1_MAX, scale_format: FormatSpec = E4M3) -> ScaleResult:
    arr = _validate_block(block)[None, :]
    s = abs_max_kernel(arr, M, scale_format)[0]
    return _result(s, scale_format, M, s == 0.0)


def scale_prevent_zero(block, M: float = E2M1_MAX, scale_format: FormatSpec = E4M3) -> ScaleResult:
    arr = _validate_block(block)[None, :]
    s, under = prevent_zero_kernel(arr, M, scale_format)
    return _result(s[0], scale_format, M, under[0])


def scale_four_over_six(block, scale_format: FormatSpec = E4M3) -> ScaleResult:
    arr = _validate_block(block)[None, :]
    s, m = four_over_six_kernel(arr, scale_format)
    return _result(s[0], scale_format, m[0], s[0] == 0.0)


def scale_mx_pow2(block, M: float = E2M1_MAX) -> ScaleResult:
    arr = _validate_block(block)[None, :]
    s, zero = mx_pow2_kernel(arr, M)
    return _result(s[0], E8M0, M, zero[0])


def scale_brute_force(block, scale_format: FormatSpec = E4M3) -> ScaleResult:
    arr = _validate_block(block)[None, :]
    s = brute_force_kernel(arr, scale_format)[0]
    return _result(s, scale_format, E2M1_MAX, False)


def tensor_prescale(tensor, scale_format: FormatSpec) -> float:
    """Per-tensor scale T = max|tensor| / (M_max * scale-format max).

    After dividing by T the largest block's abs-max scale lands exactly at the
    scale format's max, so no block scale ever clips. All-zero tensors keep
    T = 1.0.
    """
    arr = is_finite_array(tensor).ravel()
    absmax = float(np.max(np.abs(arr))) if arr.size else 0.0
    if absmax == 0.0:
        return 1.0
    return absmax / (E2M1_MAX * scale_format.max_value)


def hierarchical_wrap(tensor, block_size: int, inner: ScaleStrategy) -> list[ScaleResult]:
    """Two-level scaling: divide by the tensor scale, then scale each block.

    Dequantization multiplies element x block scale x tensor scale.
    """
    arr = is_finite_array(tensor).ravel()
    if arr.size == 0:
        raise ValueError("tensor must be non-empty")
    t = tensor_prescale(arr, inner.scale_format)
    scaled = arr / t
    results: list[ScaleResult] = []
    for start in range(0, len(scaled), block_size):
        blk = scaled[start : start + block_size][None, :]
        s, m, under = select_scales(blk, inner)
        results.append(_result(s[0], inner.scale_format, m[0], under[0], tensor_scale=t))
    return results
