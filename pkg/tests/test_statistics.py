import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from compcurves.curves import labels_from_samples
from compcurves.empirical import Sample, TwoSampleData, apply_monotone
from compcurves.grid import DyadicGrid, evaluate_U
from compcurves.statistics import (
    STATISTICS,
    compute_statistic,
    default_epsilon,
    get_statistic,
    index_sup,
    stat_AUC,
    stat_KS,
    stat_P,
    stat_U,
    stat_Uc,
    statistics_from_labels,
)

from oracles import dense_process, random_dense_dataset


def data(x, y):
    return TwoSampleData(Sample(x), Sample(y))


def test_registry_tails():
    assert {s: STATISTICS[s].tail for s in STATISTICS} == {
        "u": "lower", "p": "lower", "ks": "upper", "auc": "upper",
        "uc": "lower", "index-cc": "upper", "index-ccc": "upper",
    }
    with pytest.raises(ValueError):
        get_statistic("zz")


def test_hand_examples():
    g0 = DyadicGrid(0)
    assert stat_U(data([1, 3], [2, 4]), g0) == 1.0
    assert stat_P(data([1, 3], [2, 4]), g0) == 0.0
    assert stat_KS(data([1, 2], [3, 4])) == 0.0
    assert stat_KS(data([3, 4], [1, 2])) == pytest.approx(1.0)
    assert stat_AUC(data([3, 4], [1, 2])) == pytest.approx(0.25)
    assert stat_AUC(data([1, 2], [3, 4])) == 0.0
    assert index_sup(data([1, 2], [3, 4]), "CC", 0.2) == pytest.approx(2.0)


def test_constant_bars():
    # Y entirely below X: G_n(F_m^{-1}(p)) = 1, so the numerator is p - 1 at every point
    d = data([10, 11, 12, 13], [1, 2, 3, 4])
    plot = evaluate_U(d, DyadicGrid(3))
    assert stat_U(d, DyadicGrid(3)) == plot.bars.min()


def test_interleaved_samples():
    m = 50
    d = data(np.arange(m) * 2.0, np.arange(m) * 2.0 + 1)
    # infimum is exactly 0, attained as the right limit at the breakpoints
    assert stat_Uc(d, 0.1) == pytest.approx(0.0, abs=1e-12)
    # the sup indices only vanish up to the 1/m discretization
    bound = math.sqrt(m / 2) / m / math.sqrt(0.1 * 0.9)
    assert index_sup(d, "CC", 0.1) <= bound + 1e-12
    assert index_sup(d, "CCC", 0.1) <= bound + 1e-12


def test_uc_near_half_reduces_to_median_bar():
    # with m = 3 the median is not a breakpoint, so the infimum near 1/2 is the s = 0 bar
    d = data([1, 4, 6], [2, 3, 5, 7])
    s0 = stat_U(d, DyadicGrid(0))
    assert stat_Uc(d, 0.5 - 1e-9) == pytest.approx(s0, abs=1e-6)


def test_epsilon_validation():
    d = data(np.arange(10.0), np.arange(10.0) + 0.5)
    with pytest.raises(ValueError, match="default trimming"):
        stat_Uc(d)
    with pytest.raises(ValueError):
        stat_Uc(d, 0.5)
    assert default_epsilon(10_000) == pytest.approx(math.log(10_000) ** 3 / 10_000)
    big = data(np.linspace(0, 1, 3000), np.linspace(0, 1, 3000) + 1e-5)
    assert stat_Uc(big) == stat_Uc(big, default_epsilon(6000))


def test_grid_statistic_needs_grid():
    with pytest.raises(ValueError):
        compute_statistic(data([1, 3], [2, 4]), "u")


def test_interval_restriction():
    rng = np.random.default_rng(2)
    d = data(rng.normal(size=60), rng.normal(size=70))
    g = DyadicGrid(6)
    plot = evaluate_U(d, g)
    mask = (g.points > 0.3) & (g.points < 0.7)
    assert stat_U(d, g, (0.3, 0.7)) == plot.bars[mask].min()
    with pytest.raises(ValueError):
        stat_U(d, g, (0.3, 0.3 + 1e-4))


def test_dense_grid_quick():
    rng = np.random.default_rng(11)
    for i in range(15):
        d = random_dense_dataset(rng, i)
        assert abs(stat_Uc(d, 0.05) - dense_process(d, "CC", 0.05).min()) < 1e-9
        assert abs(index_sup(d, "CC", 0.05) - np.abs(dense_process(d, "CC", 0.05)).max()) < 1e-9
        assert abs(index_sup(d, "CCC", 0.05) - np.abs(dense_process(d, "CCC", 0.05)).max()) < 1e-9


def test_batch_matches_per_dataset():
    rng = np.random.default_rng(5)
    m, n = 23, 31
    x = rng.normal(size=(40, m))
    y = rng.normal(0.3, 1.3, size=(40, n))
    g = DyadicGrid(4)
    ids = list(STATISTICS)
    batch = statistics_from_labels(labels_from_samples(x, y), m, ids, grid=g, epsilon=0.1, interval=(0.1, 0.95))
    for r in range(40):
        d = data(x[r], y[r])
        for s in ids:
            single = compute_statistic(d, s, grid=g, epsilon=0.1, interval=(0.1, 0.95))
            assert batch[s][r] == pytest.approx(single, abs=1e-12), s


def test_transform_invariance_exact():
    rng = np.random.default_rng(6)
    g = DyadicGrid(6)
    for _ in range(20):
        d = data(rng.random(35), rng.random(45))
        t = apply_monotone(d, lambda v: np.log(v) ** 3 + 2 * v)
        for s in STATISTICS:
            a = compute_statistic(d, s, grid=g, epsilon=0.1)
            b = compute_statistic(t, s, grid=g, epsilon=0.1)
            assert a == b, s


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_shift_monotonicity(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=rng.integers(5, 40))
    y = rng.normal(size=rng.integers(5, 40))
    y2 = y + rng.exponential(0.5, size=y.size) * (rng.random(y.size) < 0.6)
    if np.unique(np.concatenate([x, y2])).size < x.size + y.size:
        return
    d, d2 = data(x, y), data(x, y2)
    g = DyadicGrid(5)
    assert stat_U(d2, g) >= stat_U(d, g)
    assert stat_Uc(d2, 0.1) >= stat_Uc(d, 0.1)
    assert stat_P(d2, g) >= stat_P(d, g)
