import json

import numpy as np
import pytest

from compcurves.alternatives import make_alternative
from compcurves.empirical import Sample, TwoSampleData
from compcurves.grid import DyadicGrid
from compcurves.montecarlo import NullCache
from compcurves.report import TestConfig, TestReport, format_summary, run_test

FIELDS = {"statistic", "value", "critical_value", "p_value", "alpha", "decision", "barriers",
          "local_minima", "m", "n", "d", "seed", "replicates"}


def sample_pair(spec, m, n, rng):
    return TwoSampleData(Sample(spec.F.sample(rng, m)), Sample(spec.G.sample(rng, n)))


def test_report_fields_and_roundtrip():
    rng = np.random.default_rng(0)
    d = sample_pair(make_alternative("A7"), 40, 50, rng)
    r = run_test(d, "u", 0.05, TestConfig(grid=DyadicGrid(4), replicates=2000, seed=3))
    assert FIELDS <= set(r.to_dict())
    assert len(r.barriers) == 10 and len(r.local_minima) == 10
    assert r.d == 31 and r.m == 40 and r.n == 50 and r.seed == 3 and r.replicates == 2000
    back = TestReport.from_json(r.to_json())
    assert back == r
    assert json.loads(r.to_json())["barriers"] == r.barriers


def test_decision_invariant():
    rng = np.random.default_rng(1)
    d = sample_pair(make_alternative("A4"), 60, 60, rng)
    for s in ("u", "p", "ks", "auc", "uc", "index-cc", "index-ccc"):
        r = run_test(d, s, 0.05, TestConfig(grid=DyadicGrid(5), replicates=1000, epsilon=0.1))
        if r.tail == "lower":
            assert r.rejected == (r.value < r.critical_value)
        else:
            assert r.rejected == (r.value > r.critical_value)
        if s not in ("u", "p"):
            assert r.barriers == [None] * 10


def test_reproducible_with_cache(tmp_path):
    rng = np.random.default_rng(2)
    d = sample_pair(make_alternative("A8"), 30, 30, rng)
    cfg = TestConfig(grid=DyadicGrid(4), replicates=1500, seed=5, cache=NullCache(tmp_path))
    a = run_test(d, "p", 0.05, cfg)
    b = run_test(d, "p", 0.05, cfg)
    c = run_test(d, "p", 0.05, TestConfig(grid=DyadicGrid(4), replicates=1500, seed=5))
    assert a == b == c


def test_level_on_null_data():
    rng = np.random.default_rng(3)
    rejections = 0
    for _ in range(60):
        d = TwoSampleData(Sample(rng.random(30)), Sample(rng.random(30)))
        r = run_test(d, "p", 0.05, TestConfig(grid=DyadicGrid(4), replicates=1000, seed=1, with_barriers=False))
        rejections += r.rejected
    assert rejections / 60 <= 0.05 + 3 * np.sqrt(0.05 * 0.95 / 60)


def test_flagged_and_summary():
    rng = np.random.default_rng(4)
    d = sample_pair(make_alternative("A7"), 100, 100, rng)
    r = run_test(d, "u", 0.05, TestConfig(grid=DyadicGrid(6), replicates=2000))
    flags = r.flagged()
    assert flags == [lm < b for lm, b in zip(r.local_minima, r.barriers)]
    text = format_summary([r])
    assert "u" in text and "R=2000" in text and "seed=0" in text


def test_alpha_checked():
    d = TwoSampleData(Sample([1.0, 3.0]), Sample([2.0, 4.0]))
    with pytest.raises(ValueError):
        run_test(d, "ks", 1.5)
