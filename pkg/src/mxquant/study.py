"""Numerical study harness: Gaussian sigma-sweeps, region exemplars, histograms.

Sampling is paired: within one sigma every block size and strategy sees the
same sample vector, drawn from a counter-based Philox stream keyed by
(rng_seed, sigma index). Cells are therefore independent tasks and the merged
output is byte-identical regardless of worker count.
"""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .formats import E4M3, FormatSpec, positive_values
from .quantizer import E2M1_MAGNITUDES, batch_error_report, quantize_batch
from .scaling import ScaleStrategy, tensor_prescale

DEFAULT_BLOCK_SIZES = (4, 8, 16, 32)
DEFAULT_SAMPLES = 2**16

SWEEP_HEADER = (
    "sigma,block_size,strategy,scale_format,mse,mse_over_variance,"
    "clip_mse,round_mse,zero_scale_fraction"
)
HIST_HEADER = "region,sigma,block_size,strategy,bin_kind,bin_value,count"

# Operational region exemplars. The defining predicates, not these numbers,
# are the contract; region_exemplars() validates them by simulation.
REGION_SIGMAS = {"A": 2.0**-11, "B": 2.0**-6.5, "C": 1.0}


def default_sigma_grid() -> list[float]:
    """Log-spaced 2^-24 .. 2^4, 8 points per octave."""
    return [2.0 ** (k / 8.0) for k in range(-24 * 8, 4 * 8 + 1)]


def default_strategies(scale_format: FormatSpec = E4M3) -> list[ScaleStrategy]:
    return [
        ScaleStrategy("abs_max", scale_format=scale_format),
        ScaleStrategy("prevent_zero", scale_format=scale_format),
        ScaleStrategy("four_over_six", scale_format=scale_format),
        ScaleStrategy("brute_force", scale_format=scale_format),
    ]


@dataclass(frozen=True)
class StudyConfig:
    sigma_grid: tuple[float, ...] = field(default_factory=lambda: tuple(default_sigma_grid()))
    block_sizes: tuple[int, ...] = DEFAULT_BLOCK_SIZES
    strategies: tuple[ScaleStrategy, ...] = field(
        default_factory=lambda: tuple(default_strategies())
    )
    samples_per_sigma: int = DEFAULT_SAMPLES
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if any(s <= 0 for s in self.sigma_grid):
            raise ValueError("sigma_grid entries must be positive")
        if list(self.sigma_grid) != sorted(set(self.sigma_grid)):
            raise ValueError("sigma_grid must be strictly increasing")
        if self.samples_per_sigma % max(self.block_sizes) != 0:
            raise ValueError("samples_per_sigma must be divisible by max(block_sizes)")


@dataclass(frozen=True)
class SweepRow:
    sigma: float
    block_size: int
    strategy: str
    scale_format: str
    mse: float
    mse_over_variance: float
    clip_mse: float
    round_mse: float
    zero_scale_fraction: float

    def as_csv(self) -> str:
        return (
            f"{self.sigma!r},{self.block_size},{self.strategy},{self.scale_format},"
            f"{self.mse!r},{self.mse_over_variance!r},{self.clip_mse!r},"
            f"{self.round_mse!r},{self.zero_scale_fraction!r}"
        )


@dataclass(frozen=True)
class HistogramRow:
    region: str
    sigma: float
    block_size: int
    strategy: str
    bin_kind: str  # "entry" | "scale"
    bin_value: float
    count: int

    def as_csv(self) -> str:
        return (
            f"{self.region},{self.sigma!r},{self.block_size},{self.strategy},"
            f"{self.bin_kind},{self.bin_value!r},{self.count}"
        )


def _draw(rng_seed: int, stream: int, n: int, sigma: float) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([rng_seed, stream])))
    return rng.standard_normal(n) * sigma


def _cell_rows(config: StudyConfig, sigma_index: int) -> list[SweepRow]:
    sigma = config.sigma_grid[sigma_index]
    samples = _draw(config.rng_seed, sigma_index, config.samples_per_sigma, sigma)
    rows: list[SweepRow] = []
    for bs in config.block_sizes:
        original = samples.reshape(-1, bs)
        for strat in config.strategies:
            t = tensor_prescale(samples, strat.scale_format) if strat.hierarchical else 1.0
            res = quantize_batch(original / t, strat, t)
            rep = batch_error_report(original, res)
            rows.append(
                SweepRow(
                    sigma=sigma,
                    block_size=bs,
                    strategy=strat.label,
                    scale_format=strat.scale_format.name,
                    mse=rep.mse,
                    mse_over_variance=rep.mse / sigma**2,
                    clip_mse=rep.clip_sse / rep.n,
                    round_mse=rep.round_sse / rep.n,
                    zero_scale_fraction=float(np.mean(res.scales == 0.0)),
                )
            )
    return rows


def run_sweep(config: StudyConfig, threads: int = 1) -> list[SweepRow]:
    """All sweep rows, ordered by (sigma index, block size, strategy)."""
    indices = range(len(config.sigma_grid))
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            per_sigma = list(pool.map(_cell_rows, [config] * len(config.sigma_grid), indices))
    else:
        per_sigma = [_cell_rows(config, i) for i in indices]
    return [row for rows in per_sigma for row in rows]


class RegionValidationError(RuntimeError):
    pass


def _abs_max_scales(samples: np.ndarray, bs: int) -> np.ndarray:
    strat = ScaleStrategy("abs_max")
    res = quantize_batch(samples.reshape(-1, bs), strat)
    return res.scales


def region_exemplars(rng_seed: int = 0, samples: int = 2**14) -> dict[str, float]:
    """Operational sigma values for regions A, B, C, validated by predicate.

    A: abs-max scales collapse to zero almost everywhere (bs=32).
    B: the median abs-max scale is a nonzero E4M3 subnormal (< 2^-6).
    C: no zero scales and the median scale is in the normal range.
    """
    out: dict[str, float] = {}
    for region, sigma in REGION_SIGMAS.items():
        draw = _draw(rng_seed, 10_000 + ord(region), samples, sigma)
        scales = _abs_max_scales(draw, 32)
        median = float(np.median(scales))
        zero_frac = float(np.mean(scales == 0.0))
        if region == "A" and not zero_frac > 0.9:
            raise RegionValidationError(
                f"sigma_A={sigma} gives zero_scale_fraction={zero_frac:.3f} <= 0.9; "
                "recalibrate REGION_SIGMAS['A']"
            )
        if region == "B" and not (0.0 < median < 2.0**-6 and zero_frac < 0.5):
            raise RegionValidationError(
                f"sigma_B={sigma} gives median scale {median} (zero fraction "
                f"{zero_frac:.3f}), expected a nonzero E4M3 subnormal; recalibrate"
            )
        if region == "C" and not (zero_frac == 0.0 and median >= 2.0**-6):
            raise RegionValidationError(
                f"sigma_C={sigma} gives median scale {median}, zero fraction "
                f"{zero_frac:.3f}; expected normal-range scales; recalibrate"
            )
        out[region] = sigma
    return out


def scale_bins(scale_format: FormatSpec) -> np.ndarray:
    """Exact bucket values for scale histograms: zero plus the positive values."""
    return np.concatenate([[0.0], positive_values(scale_format)])


def run_histograms(config: StudyConfig, regions: dict[str, float]) -> list[HistogramRow]:
    """Entry and scale histograms per (region, block size, strategy)."""
    rows: list[HistogramRow] = []
    entry_bins = np.array(E2M1_MAGNITUDES)
    for r_index, (region, sigma) in enumerate(sorted(regions.items())):
        samples = _draw(config.rng_seed, 20_000 + r_index, config.samples_per_sigma, sigma)
        for bs in config.block_sizes:
            original = samples.reshape(-1, bs)
            for strat in config.strategies:
                t = tensor_prescale(samples, strat.scale_format) if strat.hierarchical else 1.0
                res = quantize_batch(original / t, strat, t)
                idx = np.searchsorted(entry_bins, np.abs(res.quant_values).ravel())
                counts = np.bincount(idx, minlength=len(entry_bins))
                for b, c in zip(entry_bins, counts):
                    rows.append(
                        HistogramRow(region, sigma, bs, strat.label, "entry", float(b), int(c))
                    )
                sbins = scale_bins(strat.scale_format)
                sidx = np.searchsorted(sbins, res.scales)
                scounts = np.bincount(sidx, minlength=len(sbins))
                for b, c in zip(sbins, scounts):
                    if c:
                        rows.append(
                            HistogramRow(region, sigma, bs, strat.label, "scale", float(b), int(c))
                        )
    return rows


def sweep_csv(rows: list[SweepRow], config_comment: str = "") -> str:
    buf = io.StringIO()
    if config_comment:
        buf.write(f"# {config_comment}\n")
    buf.write(SWEEP_HEADER + "\n")
    for row in rows:
        buf.write(row.as_csv() + "\n")
    return buf.getvalue()


def hist_csv(rows: list[HistogramRow], config_comment: str = "") -> str:
    buf = io.StringIO()
    if config_comment:
        buf.write(f"# {config_comment}\n")
    buf.write(HIST_HEADER + "\n")
    for row in rows:
        buf.write(row.as_csv() + "\n")
    return buf.getvalue()
