"""Comparison curves CC and CCC, comparison densities and their asymptotic moments.

Notation follows the two-sample setting: ``F`` is the reference CDF of the X
sample, ``G`` the CDF of the Y sample and ``H = lam F + (1 - lam) G`` the
pooled mixture with ``lam = m / N``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy import integrate

from .empirical import TwoSampleData, quantile_index
from .grid import DyadicGrid


class RootFindError(ArithmeticError):
    """Bisection for a generalized inverse failed to converge."""


@dataclass(frozen=True, eq=False)
class DistributionModel:
    """A continuous distribution given by vectorized callables.

    ``sampler(rng, size)`` draws from the model with a ``numpy.random.Generator``.
    ``quantile`` may be omitted, in which case it is obtained numerically by
    bisection on ``cdf``.
    """

    name: str
    cdf: Callable[[np.ndarray], np.ndarray]
    pdf: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[np.random.Generator, object], np.ndarray]
    quantile_fn: Callable[[np.ndarray], np.ndarray] | None = None

    @classmethod
    def from_scipy(cls, name: str, dist) -> "DistributionModel":
        """Wrap a frozen ``scipy.stats`` distribution."""
        return cls(
            name=name,
            cdf=dist.cdf,
            pdf=dist.pdf,
            sampler=lambda rng, size: dist.rvs(size=size, random_state=rng),
            quantile_fn=dist.ppf,
        )

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if self.quantile_fn is not None:
            return self.quantile_fn(p)
        return invert_cdf(self.cdf, p)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return np.asarray(self.sampler(rng, size), dtype=float)


def _check_open_unit(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0) | ~(p < 1)):
        raise ValueError("p must lie in the open interval (0, 1)")
    return p


def _scalar(out):
    return float(out) if np.ndim(out) == 0 else out


def invert_cdf(cdf: Callable, p, tol: float = 1e-10, max_iter: int = 400) -> np.ndarray:
    """Generalized inverse ``inf{x : cdf(x) >= p}`` by bisection with an expanding bracket.

    Stops once the bracket straddles ``p`` within ``tol`` in probability or
    the bracket width reaches floating-point resolution.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    lo = np.full(p.shape, -1.0)
    hi = np.full(p.shape, 1.0)
    for _ in range(2100):
        need = cdf(lo) >= p
        if not need.any():
            break
        lo = np.where(need, 2.0 * lo, lo)
        if np.any(~np.isfinite(lo)):
            raise RootFindError(f"lower bracket diverged for p={p[~np.isfinite(lo)][:3]}")
    for _ in range(2100):
        need = cdf(hi) < p
        if not need.any():
            break
        hi = np.where(need, 2.0 * hi, hi)
        if np.any(~np.isfinite(hi)):
            raise RootFindError(f"upper bracket diverged for p={p[~np.isfinite(hi)][:3]}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        below = cdf(mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        done = (cdf(hi) - p <= tol) | (hi - lo <= 4 * np.spacing(np.abs(hi) + np.abs(lo)))
        if done.all():
            return hi
    bad = np.flatnonzero(~done)[:3]
    raise RootFindError(
        f"bisection did not converge for p={p[bad]}; brackets lo={lo[bad]}, hi={hi[bad]}"
    )


def mixture_cdf(F: DistributionModel, G: DistributionModel, lam: float) -> Callable:
    return lambda x: lam * F.cdf(x) + (1.0 - lam) * G.cdf(x)


def pooled_quantile(F: DistributionModel, G: DistributionModel, lam: float, p, tol: float = 1e-10):
    """``H^{-1}(p)`` for ``H = lam F + (1 - lam) G``."""
    if not 0 < lam < 1:
        raise ValueError("lambdaN must lie in (0, 1)")
    return invert_cdf(mixture_cdf(F, G, lam), p, tol=tol)


# -- theoretical curves ----------------------------------------------------


def odc(F: DistributionModel, G: DistributionModel, p):
    """Ordinal dominance curve ``G(F^{-1}(p))``."""
    return _scalar(G.cdf(F.quantile(p)))


def roc(F: DistributionModel, G: DistributionModel, p):
    """``1 - G(F^{-1}(1 - p))``."""
    p = np.asarray(p, dtype=float)
    return _scalar(1.0 - G.cdf(F.quantile(1.0 - p)))


def cc_theoretical(F: DistributionModel, G: DistributionModel, p):
    """Comparison curve ``(p - G(F^{-1}(p))) / sqrt(p (1 - p))`` with reference ``F``."""
    p = _check_open_unit(p)
    if G is F:
        # G(F^{-1}(p)) = p exactly; skip the quantile round trip and its rounding
        return _scalar(np.zeros_like(p))
    return _scalar((p - G.cdf(F.quantile(p))) / np.sqrt(p * (1.0 - p)))


def cc_via_roc(F: DistributionModel, G: DistributionModel, p):
    """The same curve written as ``(ROC(1 - p) - (1 - p)) / sqrt(p (1 - p))``."""
    p = _check_open_unit(p)
    return _scalar((np.asarray(roc(F, G, 1.0 - p)) - (1.0 - p)) / np.sqrt(p * (1.0 - p)))


def ccc_theoretical(F: DistributionModel, G: DistributionModel, lambdaN: float, p, tol: float = 1e-10):
    """Contrast comparison curve ``(F - G)(H^{-1}(p)) / sqrt(p (1 - p))``."""
    p = _check_open_unit(p)
    t = pooled_quantile(F, G, lambdaN, np.atleast_1d(p), tol=tol).reshape(p.shape)
    return _scalar((F.cdf(t) - G.cdf(t)) / np.sqrt(p * (1.0 - p)))


@dataclass(frozen=True, eq=False)
class TheoreticalCurves:
    """Curves and comparison densities of a fixed ``(F, G, lambdaN)`` evaluated at ``p``."""

    p: np.ndarray
    cc: np.ndarray
    ccc: np.ndarray
    r: np.ndarray
    r1: np.ndarray
    r2: np.ndarray

    @property
    def c(self) -> np.ndarray:
        return self.r1 - self.r2

    @property
    def divergent(self) -> np.ndarray:
        """Mask of points where the unpooled comparison density ``r`` is unbounded."""
        return ~np.isfinite(self.r)


def _ratio(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)


def comparison_density(F: DistributionModel, G: DistributionModel, p):
    """``r(p) = g(F^{-1}(p)) / f(F^{-1}(p))``; ``inf`` where it diverges."""
    x = F.quantile(_check_open_unit(p))
    return _scalar(_ratio(G.pdf(x), F.pdf(x)))


def pooled_densities(F: DistributionModel, G: DistributionModel, lambdaN: float, p, tol: float = 1e-10):
    """``(r1, r2)``: densities of ``F(H^{-1})`` and ``G(H^{-1})``; always bounded."""
    p = _check_open_unit(p)
    t = pooled_quantile(F, G, lambdaN, np.atleast_1d(p), tol=tol).reshape(p.shape)
    f, g = np.asarray(F.pdf(t), dtype=float), np.asarray(G.pdf(t), dtype=float)
    h = lambdaN * f + (1.0 - lambdaN) * g
    r1, r2 = _ratio(f, h), _ratio(g, h)
    # an unbounded density takes the whole pooled mass at that point
    g_inf = np.isinf(g) & np.isfinite(f)
    f_inf = np.isinf(f) & np.isfinite(g)
    r1 = np.where(g_inf, 0.0, np.where(f_inf, 1.0 / lambdaN, r1))
    r2 = np.where(f_inf, 0.0, np.where(g_inf, 1.0 / (1.0 - lambdaN), r2))
    return _scalar(r1), _scalar(r2)


def theoretical_curves(F: DistributionModel, G: DistributionModel, lambdaN: float, p) -> TheoreticalCurves:
    p = np.atleast_1d(_check_open_unit(p))
    r1, r2 = pooled_densities(F, G, lambdaN, p)
    return TheoreticalCurves(
        p=p,
        cc=np.atleast_1d(cc_theoretical(F, G, p)),
        ccc=np.atleast_1d(ccc_theoretical(F, G, lambdaN, p)),
        r=np.atleast_1d(comparison_density(F, G, p)),
        r1=np.atleast_1d(r1),
        r2=np.atleast_1d(r2),
    )


def contrast_integral(F: DistributionModel, G: DistributionModel, lambdaN: float, delta: float = 1e-6) -> float:
    """``int_0^1 c(p) dp`` by quadrature on ``(delta, 1 - delta)``.

    ``r1`` and ``r2`` are the densities of ``F(H^{-1})`` and ``G(H^{-1})``,
    so the two end pieces are added in closed form from those CDFs.
    """

    def c(p):
        r1, r2 = pooled_densities(F, G, lambdaN, np.array([p]))
        return float(r1[0] - r2[0])

    value, _ = integrate.quad(c, delta, 1.0 - delta, limit=200, epsabs=1e-10)
    t = pooled_quantile(F, G, lambdaN, np.array([delta, 1.0 - delta]), tol=1e-14)
    diff = F.cdf(t) - G.cdf(t)
    return float(value + diff[0] - diff[1])


# -- asymptotic moments ------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticMoments:
    """Limiting (co)variances of the unweighted unpooled and pooled processes.

    ``var_a``/``cov_a`` belong to ``eta_N {G(F^{-1}(p)) - G_n(F_m^{-1}(p))}``,
    ``var_b``/``cov_b`` to the centred pooled contrast. When the unpooled
    comparison density is unbounded at ``p`` or ``q`` the unpooled entries
    are ``None`` and ``divergent`` is set.
    """

    var_a: float | None
    var_b: float
    cov_a: float | None
    cov_b: float
    divergent: bool = False


def asymptotic_moments(
    F: DistributionModel,
    G: DistributionModel,
    lambdaN: float,
    p: float,
    q: float,
    tol: float = 1e-10,
) -> AsymptoticMoments:
    p, q = float(_check_open_unit(p)), float(_check_open_unit(q))
    lam = lambdaN
    pq = np.array([p, q])

    R = G.cdf(F.quantile(pq))
    r = np.atleast_1d(comparison_density(F, G, pq))
    t = pooled_quantile(F, G, lam, pq, tol=tol)
    R1, R2 = F.cdf(t), G.cdf(t)
    r1, r2 = (np.atleast_1d(v) for v in pooled_densities(F, G, lam, pq, tol=tol))

    var_b = lam * r1[0] ** 2 * R2[0] * (1 - R2[0]) + (1 - lam) * r2[0] ** 2 * R1[0] * (1 - R1[0])
    cov_b = lam * r1[0] * r1[1] * (min(R2[0], R2[1]) - R2[0] * R2[1]) + (1 - lam) * r2[0] * r2[1] * (
        min(R1[0], R1[1]) - R1[0] * R1[1]
    )
    if not np.all(np.isfinite(r)):
        return AsymptoticMoments(None, float(var_b), None, float(cov_b), divergent=True)
    var_a = lam * R[0] * (1 - R[0]) + (1 - lam) * p * (1 - p) * r[0] ** 2
    cov_a = lam * (min(R[0], R[1]) - R[0] * R[1]) + (1 - lam) * (min(p, q) - p * q) * r[0] * r[1]
    return AsymptoticMoments(float(var_a), float(var_b), float(cov_a), float(cov_b))


# -- empirical curves --------------------------------------------------------


def cc_empirical(data: TwoSampleData, p):
    """``(p - G_n(F_m^{-1}(p))) / sqrt(p (1 - p))``."""
    p = _check_open_unit(p)
    x_q = data.x.values[quantile_index(data.m, p) - 1]
    g = np.searchsorted(data.y.values, x_q, side="right") / data.n
    return _scalar((p - g) / np.sqrt(p * (1.0 - p)))


def ccc_empirical(data: TwoSampleData, p):
    """``(F_m(H_N^{-1}(p)) - G_n(H_N^{-1}(p))) / sqrt(p (1 - p))``."""
    p = _check_open_unit(p)
    l = quantile_index(data.N, p)
    x_count = np.cumsum(data.labels())[l - 1]
    return _scalar((x_count / data.m - (l - x_count) / data.n) / np.sqrt(p * (1.0 - p)))


def mc_estimated_curves(
    F: DistributionModel,
    G: DistributionModel,
    m: int,
    n: int,
    grid: DyadicGrid,
    replicates: int,
    seed: int = 0,
    chunk: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo means of the empirical CC and CCC over the grid.

    Each replicate draws fresh samples of sizes ``m`` from ``F`` and ``n``
    from ``G``. Returns ``(cc_mean, ccc_mean)``, each of length ``grid.d``.
    """
    from .statistics import bars_from_labels

    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    eta = math.sqrt(m * n / (m + n))
    cc_sum = np.zeros(grid.d)
    ccc_sum = np.zeros(grid.d)
    done = 0
    for c, size in enumerate(_chunks(replicates, chunk)):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(c,)))
        x = F.sample(rng, (size, m))
        y = G.sample(rng, (size, n))
        labels = labels_from_samples(x, y)
        u, pb = bars_from_labels(labels, m, grid)
        cc_sum += u.sum(axis=0) / eta
        ccc_sum += pb.sum(axis=0) / eta
        done += size
    return cc_sum / done, ccc_sum / done


def _chunks(total: int, size: int):
    full, rest = divmod(total, size)
    yield from [size] * full
    if rest:
        yield rest


def labels_from_samples(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise pooled-order labels (True for X) of batches ``x`` (R, m) and ``y`` (R, n)."""
    m = x.shape[1]
    order = np.argsort(np.concatenate([x, y], axis=1), axis=1, kind="stable")
    return order < m


def write_curves_csv(path: str | Path, p, columns: dict[str, np.ndarray], meta: dict | None = None) -> None:
    """CSV with column ``p`` followed by the given curve columns, full float precision."""
    names = list(columns)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("# " + json.dumps(meta or {}, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["p", *names])
        for i, pi in enumerate(np.asarray(p, dtype=float)):
            row = [repr(float(pi))]
            for name in names:
                v = columns[name][i]
                row.append("" if v is None else repr(float(v)))
            writer.writerow(row)
