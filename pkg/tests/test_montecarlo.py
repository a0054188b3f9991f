import math
import warnings

import numpy as np
import pytest

from compcurves.alternatives import normal
from compcurves.grid import DyadicGrid
from compcurves.montecarlo import (
    DegenerateNullWarning,
    NullCache,
    NullDistribution,
    barriers,
    barriers_from_minima,
    critical_value,
    critical_value_se,
    p_value,
    rejects,
    simulate_bars,
    simulate_bucket_minima,
    simulate_null,
)
from compcurves.statistics import bars_from_labels


def nd(values, stat="u"):
    return NullDistribution(stat, np.asarray(values, dtype=float), 10, 10, seed=0)


def test_critical_value_examples():
    null = nd(np.arange(1, 101))
    q = critical_value(null, 0.05, "lower")
    assert q == 6
    # the defining inequality: #{< q}/R <= alpha and q is the largest such replicate
    assert np.mean(null.values < q) <= 0.05 < np.mean(null.values < 7)
    med = critical_value(null, 0.5, "lower")
    assert np.mean(null.values < med) <= 0.5 < np.mean(null.values < med + 1)
    t = critical_value(null, 0.05, "upper")
    assert t == 95
    assert np.mean(null.values > t) <= 0.05 < np.mean(null.values > t - 1)


def test_critical_value_unsorted_input_and_ties():
    null = nd([3, 1, 2, 2, 2, 5, 4, 2, 2, 1])
    assert list(null.values) == sorted(null.values)
    q = critical_value(null, 0.2, "lower")
    assert np.mean(null.values < q) <= 0.2


def test_degenerate_flag():
    null = nd(np.zeros(100))
    assert null.is_degenerate
    with pytest.warns(DegenerateNullWarning):
        assert critical_value(null, 0.05) == 0.0


def test_alpha_validation():
    with pytest.raises(ValueError):
        critical_value(nd(np.arange(100)), 1.0)


def test_p_value_examples():
    null = nd(np.arange(1, 101))
    assert p_value(null, 0.5, "lower") == 0.0
    assert p_value(null, 100, "upper") == 1 / 100
    assert p_value(null, 6, "lower") == 6 / 100
    assert p_value(null, 101, "upper") == 0.0


def test_rejects_convention():
    assert rejects(-3.0, -2.0, "lower") and not rejects(-2.0, -2.0, "lower")
    assert rejects(2.1, 2.0, "upper") and not rejects(2.0, 2.0, "upper")


def test_shape_and_sorting():
    for s in ("u", "p", "ks", "auc"):
        null = simulate_null(s, 12, 9, 100, seed=1, grid=DyadicGrid(3))
        assert null.R == 100 and np.all(np.diff(null.values) >= 0)
    null = simulate_null("uc", 30, 30, 100, seed=1, epsilon=0.1)
    assert null.R == 100
    with pytest.raises(ValueError):
        simulate_null("u", 10, 10, 99, grid=DyadicGrid(2))
    with pytest.raises(ValueError):
        simulate_null("u", 10, 10, 100)


def test_rank_engine_bars_match_label_engine_in_law():
    # the fast U/P count generators against bars computed from shuffled labels
    m, n, R = 15, 25, 40_000
    g = DyadicGrid(3)
    fast_u = np.concatenate(list(simulate_bars("U", m, n, g, R, seed=3)))
    fast_p = np.concatenate(list(simulate_bars("P", m, n, g, R, seed=3)))
    rng = np.random.default_rng(9)
    base = np.zeros((R, m + n), dtype=bool)
    base[:, :m] = True
    slow_u, slow_p = bars_from_labels(rng.permuted(base, axis=1), m, g)
    for fast, slow in ((fast_u, slow_u), (fast_p, slow_p)):
        for j in range(g.d):
            vals = np.union1d(fast[:, j], slow[:, j])
            cdf_f = np.searchsorted(np.sort(fast[:, j]), vals, side="right") / R
            cdf_s = np.searchsorted(np.sort(slow[:, j]), vals, side="right") / R
            # two-sample KS distance well inside the alpha = 0.001 band
            assert np.max(np.abs(cdf_f - cdf_s)) < 1.95 * math.sqrt(2 / R)
        # dependence between points preserved too: correlation of adjacent bars
        assert np.corrcoef(fast[:, 2], fast[:, 4])[0, 1] == pytest.approx(
            np.corrcoef(slow[:, 2], slow[:, 4])[0, 1], abs=0.03
        )


def test_worker_count_does_not_change_results():
    g = DyadicGrid(4)
    for s in ("u", "ks"):
        a = simulate_null(s, 40, 30, 45_000, seed=7, grid=g, workers=1)
        b = simulate_null(s, 40, 30, 45_000, seed=7, grid=g, workers=2)
        assert np.array_equal(a.values, b.values)


def test_seed_changes_results():
    g = DyadicGrid(3)
    a = simulate_null("p", 20, 20, 500, seed=1, grid=g)
    b = simulate_null("p", 20, 20, 500, seed=2, grid=g)
    assert not np.array_equal(a.values, b.values)


def test_distribution_freeness_uniform_vs_normal():
    g = DyadicGrid(4)
    R = 4000
    for s in ("u", "p", "ks", "auc"):
        a = simulate_null(s, 30, 40, R, seed=1, grid=g, engine="samples")
        b = simulate_null(s, 30, 40, R, seed=2, grid=g, engine="samples", sampler=normal(5.0, 3.0))
        qa, qb = critical_value(a, 0.05), critical_value(b, 0.05)
        se = math.hypot(critical_value_se(a, 0.05), critical_value_se(b, 0.05))
        assert abs(qa - qb) <= 2 * se + 1e-12, s


def test_samples_engine_agrees_with_ranks_engine():
    g = DyadicGrid(4)
    for s in ("u", "auc"):
        a = simulate_null(s, 30, 40, 4000, seed=1, grid=g, engine="samples")
        b = simulate_null(s, 30, 40, 20_000, seed=1, grid=g)
        se = math.hypot(critical_value_se(a, 0.05), critical_value_se(b, 0.05))
        assert abs(critical_value(a, 0.05) - critical_value(b, 0.05)) <= 2 * se + 1e-12


def test_cache_roundtrip_and_bit_identity(tmp_path):
    cache = NullCache(tmp_path)
    g = DyadicGrid(3)
    a = simulate_null("u", 20, 25, 1000, seed=4, grid=g, cache=cache)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    raw = files[0].read_bytes()
    b = simulate_null("u", 20, 25, 1000, seed=4, grid=g, cache=cache)
    assert np.array_equal(a.values, b.values)
    # recomputing into a fresh cache writes the same bytes
    other = NullCache(tmp_path / "again")
    simulate_null("u", 20, 25, 1000, seed=4, grid=g, cache=other)
    assert next((tmp_path / "again").iterdir()).read_bytes() == raw
    a.save(tmp_path / "x.bin")
    c = NullDistribution.load(tmp_path / "x.bin")
    assert np.array_equal(c.values, a.values) and c.key() == a.key()


def test_cache_env(monkeypatch, tmp_path):
    monkeypatch.setenv("COMPCURVES_CACHE", str(tmp_path))
    assert NullCache.from_env().directory == tmp_path
    monkeypatch.delenv("COMPCURVES_CACHE")
    assert NullCache.from_env() is None


def test_barriers_single_point_bucket_reduces_to_critical_value():
    g = DyadicGrid(1)  # points 0.25, 0.5, 0.75, each alone in its bucket
    R = 5000
    b = barriers("P", 20, 30, g, 0.05, R, seed=3)
    assert [i for i, v in enumerate(b) if v is not None] == [2, 4, 7]
    bars = np.concatenate(list(simulate_bars("P", 20, 30, g, R, seed=3)))
    null = NullDistribution("p", bars[:, 1], 20, 30, seed=3)
    assert b[4] == critical_value(null, 0.05, "lower")


def test_barrier_level_and_familywise():
    g = DyadicGrid(6)
    mins = simulate_bucket_minima("U", 60, 60, g, 20_000, seed=2)
    marg = barriers_from_minima(mins, 0.05)
    fam = barriers_from_minima(mins, 0.05, familywise=True)
    for k in range(10):
        assert np.mean(mins[:, k] < marg[k]) <= 0.05
        assert fam[k] <= marg[k]
    union = np.zeros(mins.shape[0], dtype=bool)
    for k in range(10):
        union |= mins[:, k] < fam[k]
    assert union.mean() <= 0.05


def test_critical_value_se_positive():
    null = simulate_null("p", 40, 40, 5000, seed=1, grid=DyadicGrid(4))
    assert critical_value_se(null, 0.05) > 0
