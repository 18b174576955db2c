import numpy as np
import pytest

from mxquant.quantizer import (
    ErrorReport,
    dequantize_block,
    error_report,
    quantize_block,
    quantize_tensor,
)
from mxquant.scaling import ScaleStrategy

ABSMAX = ScaleStrategy("abs_max")
BRUTE = ScaleStrategy("brute_force")


def test_quantize_block_grid_values_exact():
    q = quantize_block([6.0, 3.0, 1.5, 0.5], ABSMAX)
    assert q.scale.scale_code.value == 1.0
    np.testing.assert_array_equal(dequantize_block(q), [6.0, 3.0, 1.5, 0.5])
    rep = error_report([6.0, 3.0, 1.5, 0.5], q)
    assert rep.total_sse == 0.0 and rep.clip_sse == 0.0 and rep.round_sse == 0.0


def test_quantize_block_negation():
    pos = quantize_block([6.0, 3.0, 1.5, 0.5], ABSMAX)
    neg = quantize_block([-6.0, -3.0, -1.5, -0.5], ABSMAX)
    np.testing.assert_array_equal(dequantize_block(neg), -dequantize_block(pos))
    assert neg.scale.scale_code.value == pos.scale.scale_code.value
    rep_p = error_report([6.0, 3.0, 1.5, 0.5], pos)
    rep_n = error_report([-6.0, -3.0, -1.5, -0.5], neg)
    assert rep_p.total_sse == rep_n.total_sse
    assert rep_p.entry_bin_counts == rep_n.entry_bin_counts


def test_quantize_block_worked_example():
    q = quantize_block([5.0, 1.0, 0.0, 0.0], ABSMAX)
    assert q.scale.scale_code.value == 0.8125
    np.testing.assert_array_equal(dequantize_block(q), [4.875, 0.8125, 0.0, 0.0])
    rep = error_report([5.0, 1.0, 0.0, 0.0], q)
    assert rep.clipped_count == 1
    assert rep.clip_sse == (5.0 - 4.875) ** 2 == 0.015625
    assert rep.round_sse == (1.0 - 0.8125) ** 2 == 0.03515625
    assert rep.total_sse == rep.clip_sse + rep.round_sse
    assert rep.entry_bin_counts[6.0] == 1 and rep.entry_bin_counts[1.0] == 1
    assert rep.entry_bin_counts[0.0] == 2


def test_dequantize_small_scale():
    q = quantize_block([6 * 2.0**-9, 0.0], ScaleStrategy("prevent_zero"))
    np.testing.assert_array_equal(dequantize_block(q), [6 * 2.0**-9, 0.0])


def test_zero_scale_block_all_zero_and_rounding_classified():
    vals = [2.0**-13, -(2.0**-14), 0.0, 2.0**-15]
    q = quantize_block(vals, ABSMAX)
    assert q.scale.scale_code.value == 0.0
    np.testing.assert_array_equal(dequantize_block(q), np.zeros(4))
    rep = error_report(vals, q)
    assert rep.clip_sse == 0.0 and rep.clipped_count == 0
    assert rep.round_sse == rep.total_sse == float(np.sum(np.square(vals)))
    assert rep.entry_bin_counts[0.0] == 4


def test_requantize_dequantized_is_fixed_point():
    rng = np.random.default_rng(31)
    block = rng.standard_normal(16)
    q1 = quantize_block(block, ABSMAX)
    deq = dequantize_block(q1)
    q2 = quantize_block(deq, ABSMAX)
    assert q2.scale.scale_code.value == q1.scale.scale_code.value
    np.testing.assert_array_equal(dequantize_block(q2), deq)


def test_error_report_length_mismatch():
    q = quantize_block([1.0, 2.0], ABSMAX)
    with pytest.raises(ValueError):
        error_report([1.0, 2.0, 3.0], q)


def test_decomposition_exact_over_random_blocks():
    rng = np.random.default_rng(37)
    for _ in range(100):
        block = rng.standard_normal(8) * 2.0 ** rng.uniform(-12, 4)
        q = quantize_block(block, ABSMAX)
        rep = error_report(block, q)
        assert rep.clip_sse + rep.round_sse == rep.total_sse
        assert sum(rep.entry_bin_counts.values()) == rep.n == 8


def test_quantize_tensor_chunking_and_additivity():
    rng = np.random.default_rng(41)
    tensor = rng.standard_normal(64)
    blocks, agg = quantize_tensor(tensor, 16, ABSMAX)
    assert len(blocks) == 4
    per_block = sum(
        error_report(tensor[i * 16 : (i + 1) * 16], qb).total_sse
        for i, qb in enumerate(blocks)
    )
    assert agg.total_sse == per_block
    assert agg.n == 64


def test_quantize_tensor_short_final_block():
    tensor = np.arange(1.0, 11.0)
    blocks, agg = quantize_tensor(tensor, 4, ABSMAX)
    assert [len(b.element_codes) for b in blocks] == [4, 4, 2]
    assert agg.n == 10


def test_quantize_tensor_empty_rejected():
    with pytest.raises(ValueError):
        quantize_tensor(np.array([]), 4, ABSMAX)


def test_brute_force_finer_blocks_never_worse():
    rng = np.random.default_rng(43)
    tensor = rng.standard_normal(256) * 2.0**-7
    _, e4 = quantize_tensor(tensor, 4, BRUTE)
    _, e32 = quantize_tensor(tensor, 32, BRUTE)
    assert e4.total_sse <= e32.total_sse


def test_pow2_input_scaling_invariance():
    rng = np.random.default_rng(47)
    tensor = rng.standard_normal(64)  # absmax/6 sits in E4M3 normal range
    _, base = quantize_tensor(tensor, 8, ABSMAX)
    for k in (-2, 1, 3):
        blocks_k, rep_k = quantize_tensor(tensor * 2.0**k, 8, ABSMAX)
        blocks_b, _ = quantize_tensor(tensor, 8, ABSMAX)
        for qa, qb in zip(blocks_k, blocks_b):
            assert [c.code for c in qa.element_codes] == [c.code for c in qb.element_codes]
            assert qa.scale.scale_code.value == qb.scale.scale_code.value * 2.0**k
        var = float(np.var(tensor))
        assert rep_k.mse / (var * 4.0**k) == pytest.approx(base.mse / var, rel=1e-12)


def test_hierarchical_tensor_quantization_roundtrip():
    rng = np.random.default_rng(53)
    tensor = rng.standard_normal(128) * 2.0**15
    strat = ScaleStrategy("abs_max", hierarchical=True)
    blocks, rep = quantize_tensor(tensor, 16, strat)
    t = blocks[0].scale.tensor_scale
    assert t > 1.0
    deq = np.concatenate([dequantize_block(b) for b in blocks])
    assert rep.total_sse == pytest.approx(float(np.sum((tensor - deq) ** 2)), rel=1e-12)


def test_error_report_merge():
    a = ErrorReport(total_sse=1.0, clip_sse=0.25, round_sse=0.75, n=4, clipped_count=1)
    b = ErrorReport(total_sse=2.0, clip_sse=0.0, round_sse=2.0, n=4, clipped_count=0)
    a.merge(b)
    assert a.total_sse == 3.0 and a.n == 8 and a.mse == 3.0 / 8
