import math

import numpy as np
import pytest
from scipy import stats

from compcurves.alternatives import (
    AVAILABLE,
    AlternativeSpec,
    PowerTable,
    make_alternative,
    normal,
    null_model,
    power_kurtotic,
    power_study,
    register_alternative,
)
from compcurves.grid import DyadicGrid


def test_a7_variance():
    rng = np.random.default_rng(0)
    y = make_alternative("A7").G.sample(rng, 100_000)
    assert y.var() == pytest.approx(2.25, rel=0.03)


def test_a1_cdf_at_zero():
    assert make_alternative("A1").G.cdf(0.0) == pytest.approx(0.6155722066724581, abs=1e-12)


def test_a6_theta_zero_is_standard_normal():
    rng = np.random.default_rng(1)
    a0 = power_kurtotic(0.0)
    z = np.random.default_rng(1).standard_normal(1000)
    assert np.array_equal(a0.sample(rng, 1000), z)
    xs = np.linspace(-4, 4, 81)
    assert np.allclose(a0.cdf(xs), stats.norm.cdf(xs))


def test_a6_cdf_by_change_of_variables():
    # P(Z|Z|^t <= x) = P(Z <= sign(x)|x|^(1/(1+t))) since z -> z|z|^t is increasing
    g = power_kurtotic(1.3)
    xs = np.array([-5.0, -1.0, -0.2, 0.0, 0.3, 2.0, 7.0])
    ref = stats.norm.cdf(np.sign(xs) * np.abs(xs) ** (1 / 2.3))
    assert np.allclose(g.cdf(xs), ref)
    z = stats.norm.ppf([0.1, 0.7])
    assert np.allclose(g.cdf(z * np.abs(z) ** 1.3), [0.1, 0.7])


@pytest.mark.parametrize("alt_id", AVAILABLE)
def test_sampler_cdf_consistency(alt_id):
    spec = make_alternative(alt_id)
    rng = np.random.default_rng(abs(hash(alt_id)) % 1000)
    crit = 1.628 / math.sqrt(100_000)  # one-sample KS, alpha = 0.01
    for model in (spec.F, spec.G):
        x = model.sample(rng, 100_000)
        assert stats.kstest(x, model.cdf).statistic < crit, (alt_id, model.name)


def test_pdf_integrates_to_cdf():
    from scipy.integrate import quad

    for alt_id in ("A4", "A5", "A8", "A2"):
        spec = make_alternative(alt_id)
        for model in (spec.F, spec.G):
            lo, hi = (float(np.ravel(model.quantile(q))[0]) for q in (0.2, 0.7))
            val, _ = quad(lambda t: float(np.ravel(model.pdf(t))[0]), lo, hi)
            assert val == pytest.approx(0.5, abs=1e-7)


def test_a3_not_implemented_and_plugin():
    with pytest.raises(NotImplementedError):
        make_alternative("A3")
    register_alternative("A3", lambda: AlternativeSpec("A3", normal(), normal(0.1)))
    try:
        assert make_alternative(3).id == "A3"
    finally:
        register_alternative("A3", lambda: (_ for _ in ()).throw(NotImplementedError("A3")))


def test_unknown_alternative():
    with pytest.raises(ValueError):
        make_alternative("A10")


def test_dominance_direction_a7():
    spec = make_alternative("A7")
    x = np.linspace(0.01, 6, 200)
    assert np.all(spec.G.cdf(x) < spec.F.cdf(x))


def test_pareto_convention():
    spec = make_alternative("A2")
    assert spec.F.cdf(1.0) == 0.0
    assert spec.G.cdf(2.0) == pytest.approx(1 - 2 ** -1.3)


def test_power_study_deterministic_and_level(tmp_path):
    kw = dict(m=50, n=50, grid=DyadicGrid(5), runs=400, null_replicates=4000, seed=1)
    t1 = power_study(["p", "auc"], ["A7", null_model()], **kw)
    t2 = power_study(["p", "auc"], ["A7", null_model()], **kw)
    assert t1.power == t2.power
    for t in t1.tests:
        assert 0 <= t1.power[t]["A7"] <= 1
        assert t1.power[t]["null"] <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / 400)
    # alternatives use independent streams: dropping one leaves the other unchanged
    t3 = power_study(["p", "auc"], ["A7"], **kw)
    assert t3.power["p"]["A7"] == t1.power["p"]["A7"]
    t1.write_csv(tmp_path / "pw.csv")
    back = PowerTable.read_csv(tmp_path / "pw.csv")
    assert back.power == t1.power and back.meta() == t1.meta()


def test_power_study_validation():
    with pytest.raises(ValueError):
        power_study([], ["A7"], runs=10, null_replicates=100)
    with pytest.raises(NotImplementedError):
        power_study(["p"], ["A3"], runs=10, null_replicates=100)
