"""Command-line entry point: format tables, sweeps, histograms, tensor reports."""

from __future__ import annotations

import argparse
import os
import shlex
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import study
from .formats import format_table_csv, lookup_format, magnitudes
from .scaling import ScaleStrategy
from .study import (
    HIST_HEADER,
    SWEEP_HEADER,
    HistogramRow,
    StudyConfig,
    SweepRow,
    hist_csv,
    region_exemplars,
    run_histograms,
    run_sweep,
    sweep_csv,
)
from .tensorio import MaskSpec, load_tensor, mask_range, report_tensor_error, save_tensor

STRATEGY_KINDS = {
    "absmax": "abs_max",
    "pz": "prevent_zero",
    "4o6": "four_over_six",
    "mxpow2": "mx_pow2",
    "brute": "brute_force",
}

ENV_OUTDIR = "MXQUANT_OUTDIR"
ENV_PLOT_CMD = "MXQUANT_PLOT_CMD"


class CliError(Exception):
    pass


def _parse_strategies(names: str, scale: str, hierarchical: bool) -> list[ScaleStrategy]:
    fmt = lookup_format(scale)
    out = []
    for name in names.split(","):
        name = name.strip()
        if name not in STRATEGY_KINDS:
            raise CliError(
                f"unknown strategy {name!r}; expected one of {sorted(STRATEGY_KINDS)}"
            )
        out.append(
            ScaleStrategy(STRATEGY_KINDS[name], scale_format=fmt, hierarchical=hierarchical)
        )
    return out


def _parse_block_sizes(spec: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(s) for s in spec.split(","))
    except ValueError:
        raise CliError(f"bad block-size list {spec!r}") from None
    if any(s < 1 for s in sizes):
        raise CliError("block sizes must be positive")
    return sizes


def _outdir(args) -> Path:
    d = Path(args.out or os.environ.get(ENV_OUTDIR, "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _config_comment(args, extra: str = "") -> str:
    parts = [
        f"strategies={args.strategies}", f"scale={args.scale}",
        f"hierarchical={args.hierarchical}", f"bs={args.bs}",
        f"samples={args.samples}", f"seed={args.seed}",
    ]
    if extra:
        parts.append(extra)
    return "config: " + " ".join(parts)


def _maybe_plot(args, kind: str, path: Path) -> None:
    if not getattr(args, "plot", False):
        return
    cmd = shlex.split(os.environ.get(ENV_PLOT_CMD, "mxquant-plot"))
    proc = subprocess.run([*cmd, kind, str(path)])
    if proc.returncode != 0:
        raise CliError(f"plot command failed with exit code {proc.returncode}")


def cmd_formats(args) -> int:
    fmt = lookup_format(args.spec)
    if args.codes:
        sys.stdout.write(format_table_csv(fmt))
    else:
        sys.stdout.write("magnitude\n")
        for m in magnitudes(fmt):
            sys.stdout.write(f"{m!r}\n")
    return 0


def _study_config(args) -> StudyConfig:
    return StudyConfig(
        block_sizes=_parse_block_sizes(args.bs),
        strategies=tuple(_parse_strategies(args.strategies, args.scale, args.hierarchical)),
        samples_per_sigma=args.samples,
        rng_seed=args.seed,
    )


def cmd_sweep(args) -> int:
    config = _study_config(args)
    rows = run_sweep(config, threads=args.threads)
    path = _outdir(args) / f"sweep_{args.seed}.csv"
    path.write_text(sweep_csv(rows, _config_comment(args)))
    print(f"wrote {path}")
    _maybe_plot(args, "sweep", path)
    return 0


def cmd_hist(args) -> int:
    config = _study_config(args)
    regions = region_exemplars(rng_seed=args.seed)
    rows = run_histograms(config, regions)
    outdir = _outdir(args)
    for region in sorted(regions):
        region_rows = [r for r in rows if r.region == region]
        path = outdir / f"hist_{region}_{args.seed}.csv"
        path.write_text(
            hist_csv(region_rows, _config_comment(args, f"region={region}"))
        )
        print(f"wrote {path}")
        _maybe_plot(args, "hist", path)
    return 0


def cmd_regions(args) -> int:
    regions = region_exemplars(rng_seed=args.seed)
    for name, sigma in sorted(regions.items()):
        print(f"{name},{sigma!r}")
    return 0


def cmd_quantize(args) -> int:
    tf = load_tensor(args.tensor)
    strategies = _parse_strategies(args.strategy, args.scale, args.hierarchical)
    if len(strategies) != 1:
        raise CliError("quantize takes exactly one strategy")
    strat = strategies[0]
    bs = _parse_block_sizes(args.bs)
    sigma = float(np.std(tf.data))
    outdir = _outdir(args)
    comment = (
        f"config: tensor={args.tensor} strategy={args.strategy} scale={args.scale} "
        f"hierarchical={args.hierarchical} bs={args.bs}"
    )
    sweep_rows, hist_rows = [], []
    for b in bs:
        report, scale_hist = report_tensor_error(tf, b, strat)
        zero_frac = scale_hist.get(0.0, 0) / max(sum(scale_hist.values()), 1)
        sweep_rows.append(
            SweepRow(
                sigma=sigma, block_size=b, strategy=strat.label,
                scale_format=strat.scale_format.name, mse=report.mse,
                mse_over_variance=report.mse / sigma**2 if sigma else 0.0,
                clip_mse=report.clip_sse / report.n,
                round_mse=report.round_sse / report.n,
                zero_scale_fraction=zero_frac,
            )
        )
        for mag, count in report.entry_bin_counts.items():
            hist_rows.append(
                HistogramRow("T", sigma, b, strat.label, "entry", float(mag), count)
            )
        for val, count in sorted(scale_hist.items()):
            hist_rows.append(
                HistogramRow("T", sigma, b, strat.label, "scale", float(val), count)
            )
    stem = Path(args.tensor).stem
    report_path = outdir / f"tensor_report_{stem}.csv"
    report_path.write_text(sweep_csv(sweep_rows, comment))
    hist_path = outdir / f"tensor_hist_{stem}.csv"
    hist_path.write_text(hist_csv(hist_rows, comment))
    print(f"wrote {report_path}")
    print(f"wrote {hist_path}")
    return 0


def cmd_mask(args) -> int:
    tf = load_tensor(args.tensor)
    outdir = _outdir(args)
    stem = Path(args.tensor).stem
    if args.lower is not None or args.upper is not None:
        if args.lower is None or args.upper is None:
            raise CliError("--lower and --upper must be given together")
        masked, fraction = mask_range(tf, MaskSpec(args.lower, args.upper))
        out_path = outdir / f"{stem}_masked.npy"
        save_tensor(out_path, masked)
        print(f"masked_fraction,{fraction!r}")
        print(f"wrote {out_path}")
        return 0
    # Ablation grid over all lower < upper threshold pairs.
    thresholds = np.arange(args.grid_start, args.grid_stop + 1e-12, args.grid_step)
    path = outdir / f"mask_grid_{stem}.csv"
    with open(path, "w") as fh:
        fh.write(f"# config: tensor={args.tensor} grid={args.grid_start}:{args.grid_stop}:{args.grid_step}\n")
        fh.write("lower,upper,masked_fraction\n")
        for lo in thresholds:
            for hi in thresholds:
                if hi <= lo:
                    continue
                _, fraction = mask_range(tf, MaskSpec(float(lo), float(hi)))
                fh.write(f"{float(lo)!r},{float(hi)!r},{fraction!r}\n")
    print(f"wrote {path}")
    return 0


def _add_study_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategies", default="absmax,pz,4o6,brute")
    p.add_argument("--scale", default="e4m3", help="scale format: e4m3|ue5m3|e8m0")
    p.add_argument("--hierarchical", action="store_true")
    p.add_argument("--bs", default="4,8,16,32", help="comma-separated block sizes")
    p.add_argument("--samples", type=int, default=2**16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help=f"output dir (default ${ENV_OUTDIR} or .)")
    p.add_argument("--plot", action="store_true", help="shell out to the plot tool afterwards")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mxquant", description="Block-scaled FP4 quantization toolkit"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("formats", help="dump a format's value table")
    p.add_argument("--spec", required=True, help="e2m1|e4m3|ue5m3|e8m0")
    p.add_argument("--codes", action="store_true", help="full code,value table")
    p.set_defaults(fn=cmd_formats)

    p = sub.add_parser("sweep", help="run the sigma sweep study")
    _add_study_flags(p)
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("hist", help="emit region histograms")
    _add_study_flags(p)
    p.set_defaults(fn=cmd_hist)

    p = sub.add_parser("regions", help="print validated region exemplar sigmas")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_regions)

    p = sub.add_parser("quantize", help="quantization error report for a tensor file")
    p.add_argument("tensor", help="path to an NPY tensor")
    p.add_argument("--strategy", default="absmax")
    p.add_argument("--scale", default="e4m3")
    p.add_argument("--hierarchical", action="store_true")
    p.add_argument("--bs", default="32")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_quantize)

    p = sub.add_parser("mask", help="zero-masking ablation on a tensor file")
    p.add_argument("tensor")
    p.add_argument("--lower", type=float, default=None)
    p.add_argument("--upper", type=float, default=None)
    p.add_argument("--grid-start", type=float, default=0.0)
    p.add_argument("--grid-stop", type=float, default=0.035)
    p.add_argument("--grid-step", type=float, default=0.005)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_mask)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, ValueError, KeyError, OSError, study.RegionValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
