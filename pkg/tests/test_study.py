import numpy as np
import pytest

from mxquant.formats import E4M3
from mxquant.scaling import ScaleStrategy
from mxquant.study import (
    HIST_HEADER,
    SWEEP_HEADER,
    REGION_SIGMAS,
    RegionValidationError,
    StudyConfig,
    default_sigma_grid,
    hist_csv,
    region_exemplars,
    run_histograms,
    run_sweep,
    sweep_csv,
)

SMALL = StudyConfig(
    sigma_grid=(2.0**-11, 2.0**-6.5, 1.0),
    block_sizes=(4, 32),
    samples_per_sigma=2**12,
    rng_seed=123,
)


def test_config_validation():
    with pytest.raises(ValueError):
        StudyConfig(sigma_grid=(1.0, 0.5))  # not increasing
    with pytest.raises(ValueError):
        StudyConfig(sigma_grid=(-1.0, 1.0))
    with pytest.raises(ValueError):
        StudyConfig(samples_per_sigma=100)  # not divisible by 32


def test_default_grid_shape():
    grid = default_sigma_grid()
    assert grid[0] == 2.0**-24 and grid[-1] == 2.0**4
    assert len(grid) == 28 * 8 + 1
    assert grid == sorted(grid)


def test_sweep_rows_schema_and_order():
    rows = run_sweep(SMALL)
    assert len(rows) == 3 * 2 * 4  # sigmas x block sizes x strategies
    assert rows[0].sigma == 2.0**-11 and rows[0].block_size == 4
    for r in rows:
        assert r.clip_mse + r.round_mse == pytest.approx(r.mse, abs=1e-300)
        assert 0.0 <= r.zero_scale_fraction <= 1.0
    csv = sweep_csv(rows, "config: test")
    lines = csv.splitlines()
    assert lines[0] == "# config: test"
    assert lines[1] == SWEEP_HEADER
    assert len(lines) == 2 + len(rows)


def test_sweep_deterministic_across_threads():
    rows1 = run_sweep(SMALL, threads=1)
    rows2 = run_sweep(SMALL, threads=2)
    assert sweep_csv(rows1) == sweep_csv(rows2)


def test_paired_dominance_on_cells():
    rows = run_sweep(SMALL)
    by = {(r.sigma, r.block_size, r.strategy): r for r in rows}
    for sigma in SMALL.sigma_grid:
        for bs in SMALL.block_sizes:
            assert by[(sigma, bs, "brute")].mse <= by[(sigma, bs, "4o6")].mse
            assert by[(sigma, bs, "4o6")].mse <= by[(sigma, bs, "absmax")].mse
            assert by[(sigma, bs, "pz")].mse <= by[(sigma, bs, "absmax")].mse


def test_region_a_collapse_cell():
    rows = run_sweep(SMALL)
    cell = next(
        r for r in rows
        if r.sigma == 2.0**-11 and r.block_size == 32 and r.strategy == "absmax"
    )
    assert cell.zero_scale_fraction > 0.99
    assert 0.9 < cell.mse_over_variance < 1.1


def test_region_exemplars_validate():
    regions = region_exemplars(rng_seed=0)
    assert set(regions) == {"A", "B", "C"}
    assert regions == REGION_SIGMAS
    assert regions["A"] < regions["B"] < regions["C"]


def test_region_predicates_fail_loudly():
    bad = dict(REGION_SIGMAS)
    import mxquant.study as study

    orig = study.REGION_SIGMAS
    study.REGION_SIGMAS = {"A": 1.0, "B": bad["B"], "C": bad["C"]}
    try:
        with pytest.raises(RegionValidationError):
            region_exemplars(rng_seed=0)
    finally:
        study.REGION_SIGMAS = orig


def test_histograms_schema_and_counts():
    config = StudyConfig(
        sigma_grid=(1.0,), block_sizes=(4, 32),
        strategies=(ScaleStrategy("abs_max"), ScaleStrategy("four_over_six")),
        samples_per_sigma=2**12, rng_seed=9,
    )
    regions = region_exemplars(rng_seed=9)
    rows = run_histograms(config, regions)
    for region in regions:
        for bs in config.block_sizes:
            for strat in ("absmax", "4o6"):
                entries = [
                    r.count for r in rows
                    if r.region == region and r.block_size == bs
                    and r.strategy == strat and r.bin_kind == "entry"
                ]
                assert sum(entries) == config.samples_per_sigma
                scales = [
                    r.count for r in rows
                    if r.region == region and r.block_size == bs
                    and r.strategy == strat and r.bin_kind == "scale"
                ]
                assert sum(scales) == config.samples_per_sigma // bs
    csv = hist_csv(rows)
    assert csv.splitlines()[0] == HIST_HEADER


def test_region_a_scale_histogram_mass_at_zero():
    config = StudyConfig(
        sigma_grid=(1.0,), block_sizes=(32,),
        strategies=(ScaleStrategy("abs_max"),),
        samples_per_sigma=2**12, rng_seed=3,
    )
    rows = run_histograms(config, region_exemplars(rng_seed=3))
    zero = [
        r for r in rows
        if r.region == "A" and r.bin_kind == "scale" and r.bin_value == 0.0
    ]
    assert zero and zero[0].count > 0.9 * (2**12 // 32)


def test_hierarchical_strategy_in_sweep():
    config = StudyConfig(
        sigma_grid=(2.0**-11,), block_sizes=(32,),
        strategies=(
            ScaleStrategy("abs_max"),
            ScaleStrategy("abs_max", hierarchical=True),
        ),
        samples_per_sigma=2**12, rng_seed=1,
    )
    rows = run_sweep(config)
    plain = next(r for r in rows if r.strategy == "absmax")
    hier = next(r for r in rows if r.strategy == "absmax+H")
    # the tensor prescale lifts tiny inputs out of the underflow zone
    assert hier.zero_scale_fraction == 0.0
    assert hier.mse < plain.mse
