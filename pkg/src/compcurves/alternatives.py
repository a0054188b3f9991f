"""The simulation models A1..A9 and the empirical power harness.

Models are pairs ``(F, G)`` of :class:`~compcurves.curves.DistributionModel`
with closed-form CDFs and densities. Conventions worth stating:

* ``LN(mu, sigma)`` is ``exp(N(mu, sigma**2))``, so ``sigma`` is the
  standard deviation on the log scale.
* ``Pareto(theta)`` has scale 1: CDF ``1 - x**(-theta)`` on ``x >= 1``.
* chi-square with one degree of freedom is drawn as ``Z**2``; mixtures pick
  a component first and then draw from it.

A3 is defined in the literature only by reference, without a formula, and is
left as a slot that raises :class:`NotImplementedError` until a model is
registered with :func:`register_alternative`.
"""

from __future__ import annotations

import csv
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .curves import DistributionModel, labels_from_samples
from .grid import DyadicGrid
from .montecarlo import NullCache, critical_value, rejects, simulate_null
from .statistics import get_statistic, statistics_from_labels


@dataclass(frozen=True, eq=False)
class AlternativeSpec:
    id: str
    F: DistributionModel
    G: DistributionModel
    description: str = ""


def mixture(name: str, weights: Sequence[float], components: Sequence[DistributionModel]) -> DistributionModel:
    """Finite mixture; sampling selects a component per draw, then draws from it."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or not np.isclose(w.sum(), 1.0):
        raise ValueError("mixture weights must be nonnegative and sum to 1")
    comps = list(components)

    def cdf(x):
        return sum(wi * c.cdf(x) for wi, c in zip(w, comps))

    def pdf(x):
        return sum(wi * c.pdf(x) for wi, c in zip(w, comps))

    def sampler(rng, size):
        which = rng.choice(len(comps), size=size, p=w)
        out = np.empty(which.shape)
        for k, c in enumerate(comps):
            sel = which == k
            out[sel] = c.sample(rng, int(sel.sum()))
        return out

    return DistributionModel(name, cdf, pdf, sampler)


def normal(mu: float = 0.0, sd: float = 1.0) -> DistributionModel:
    return DistributionModel.from_scipy(f"N({mu},{sd ** 2:g})", stats.norm(mu, sd))


def lognormal(mu: float, sigma: float) -> DistributionModel:
    return DistributionModel.from_scipy(f"LN({mu},{sigma})", stats.lognorm(s=sigma, scale=np.exp(mu)))


def laplace(mu: float, scale: float) -> DistributionModel:
    return DistributionModel.from_scipy(f"Laplace({mu},{scale})", stats.laplace(loc=mu, scale=scale))


def pareto(theta: float) -> DistributionModel:
    return DistributionModel.from_scipy(f"Pareto({theta})", stats.pareto(b=theta))


def chi2_one() -> DistributionModel:
    """chi-square(1), sampled as the square of a standard normal."""
    d = stats.chi2(1)
    return DistributionModel("chi2(1)", d.cdf, d.pdf, lambda rng, size: rng.standard_normal(size) ** 2, d.ppf)


def lehmann_power(theta: float) -> DistributionModel:
    """CDF ``Phi(x)**theta``; drawn as ``Phi^{-1}(U**(1/theta))``."""
    nrm = stats.norm()

    def pdf(x):
        return theta * nrm.cdf(x) ** (theta - 1) * nrm.pdf(x)

    def quantile(p):
        return nrm.ppf(np.asarray(p, dtype=float) ** (1.0 / theta))

    return DistributionModel(
        f"Phi^{theta}",
        lambda x: nrm.cdf(x) ** theta,
        pdf,
        lambda rng, size: quantile(rng.random(size)),
        quantile,
    )


def power_kurtotic(theta: float) -> DistributionModel:
    """Law of ``Z |Z|**theta``; its CDF is ``Phi(sign(x) |x|**(1/(1+theta)))``."""
    a = 1.0 / (1.0 + theta)
    nrm = stats.norm()

    def cdf(x):
        x = np.asarray(x, dtype=float)
        return nrm.cdf(np.sign(x) * np.abs(x) ** a)

    def pdf(x):
        ax = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            return nrm.pdf(ax**a) * a * ax ** (a - 1.0)

    def quantile(p):
        z = nrm.ppf(p)
        return z * np.abs(z) ** theta

    def sampler(rng, size):
        z = rng.standard_normal(size)
        return z * np.abs(z) ** theta

    return DistributionModel(f"A({theta})", cdf, pdf, sampler, quantile)


def _a1():
    return AlternativeSpec("A1", normal(), lehmann_power(0.7), "Lehmann model: Phi versus Phi^0.7")


def _a2():
    return AlternativeSpec("A2", pareto(1.0), pareto(1.3), "Pareto(1) versus Pareto(1.3), scale 1")


def _a3():
    raise NotImplementedError(
        "A3 has no closed-form definition available; register a model with register_alternative('A3', factory)"
    )


def _a4():
    f = mixture("0.4N(0.4,1)+0.6chi2(1)", [0.4, 0.6], [normal(0.4, 1.0), chi2_one()])
    return AlternativeSpec("A4", f, normal(0.4, 1.0), "0.4 N(0.4,1) + 0.6 chi2(1) versus N(0.4,1)")


def _a5():
    g = mixture("0.9LN(0.85,0.4)+0.1LN(0.4,0.9)", [0.9, 0.1], [lognormal(0.85, 0.4), lognormal(0.4, 0.9)])
    return AlternativeSpec("A5", lognormal(0.85, 0.6), g, "LN(0.85,0.6) versus 0.9 LN(0.85,0.4) + 0.1 LN(0.4,0.9)")


def _a6():
    return AlternativeSpec("A6", power_kurtotic(0.0), power_kurtotic(1.3), "N(0,1) versus law of Z|Z|^1.3")


def _a7():
    return AlternativeSpec("A7", normal(0.0, 1.0), normal(0.0, 1.5), "N(0,1) versus N(0,2.25)")


def _a8():
    return AlternativeSpec("A8", laplace(0.0, 1.0), laplace(1.0, 2.5), "Laplace(0,1) versus Laplace(1,2.5)")


def _a9():
    return AlternativeSpec("A9", lognormal(0.85, 0.6), lognormal(1.2, 0.2), "LN(0.85,0.6) versus LN(1.2,0.2)")


_REGISTRY: dict[str, Callable[[], AlternativeSpec]] = {
    "A1": _a1,
    "A2": _a2,
    "A3": _a3,
    "A4": _a4,
    "A5": _a5,
    "A6": _a6,
    "A7": _a7,
    "A8": _a8,
    "A9": _a9,
}

AVAILABLE = ("A1", "A2", "A4", "A5", "A6", "A7", "A8", "A9")


def _normalize_id(alt_id) -> str:
    s = str(alt_id).strip().upper()
    return s if s.startswith("A") else f"A{s}"


def register_alternative(alt_id: str, factory: Callable[[], AlternativeSpec]) -> None:
    """Install or replace the model behind ``alt_id`` (e.g. to supply A3)."""
    _REGISTRY[_normalize_id(alt_id)] = factory


def make_alternative(alt_id) -> AlternativeSpec:
    key = _normalize_id(alt_id)
    if key not in _REGISTRY:
        raise ValueError(f"unknown alternative {alt_id!r}; choose from {sorted(_REGISTRY)}")
    return _REGISTRY[key]()


def null_model(model: DistributionModel | None = None) -> AlternativeSpec:
    """``F = G`` pair, for level checks."""
    model = model or normal()
    return AlternativeSpec("null", model, model, f"{model.name} versus itself")


# -- power study ---------------------------------------------------------------


@dataclass
class PowerTable:
    """Rejection proportions; ``power[test][alternative]``."""

    power: dict[str, dict[str, float]]
    m: int
    n: int
    d: int
    alpha: float
    runs: int
    seed: int
    null_replicates: int
    critical_values: dict[str, float] = field(default_factory=dict)

    @property
    def tests(self) -> list[str]:
        return list(self.power)

    @property
    def alternatives(self) -> list[str]:
        first = next(iter(self.power.values()), {})
        return list(first)

    def meta(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "d": self.d,
            "alpha": self.alpha,
            "runs": self.runs,
            "seed": self.seed,
            "R": self.null_replicates,
            "critical_values": self.critical_values,
        }

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            fh.write("# " + json.dumps(self.meta(), sort_keys=True) + "\n")
            w = csv.writer(fh)
            w.writerow(["test", *self.alternatives])
            for t in self.tests:
                w.writerow([t, *(repr(self.power[t][a]) for a in self.alternatives)])

    @classmethod
    def read_csv(cls, path: str | Path) -> "PowerTable":
        with Path(path).open(encoding="utf-8", newline="") as fh:
            meta = json.loads(fh.readline()[2:])
            rows = list(csv.reader(fh))
        alts = rows[0][1:]
        power = {r[0]: {a: float(v) for a, v in zip(alts, r[1:])} for r in rows[1:]}
        return cls(
            power,
            meta["m"],
            meta["n"],
            meta["d"],
            meta["alpha"],
            meta["runs"],
            meta["seed"],
            meta["R"],
            meta.get("critical_values", {}),
        )

    def format(self) -> str:
        alts = self.alternatives
        lines = ["test      " + "".join(f"{a:>7}" for a in alts)]
        for t in self.tests:
            lines.append(f"{t:<10}" + "".join(f"{round(100 * self.power[t][a]):>7d}" for a in alts))
        return "\n".join(lines)


def rejection_flags(
    spec: AlternativeSpec,
    tests: Sequence[str],
    critical: dict[str, float],
    m: int,
    n: int,
    grid: DyadicGrid | None,
    runs: int,
    seed: int,
    epsilon: float | None = None,
    chunk: int = 1000,
) -> dict[str, np.ndarray]:
    """Boolean rejection indicator per test over ``runs`` datasets drawn from ``spec``."""
    out = {t: np.empty(runs, dtype=bool) for t in tests}
    stream = zlib.crc32(f"power-{spec.id}".encode("utf-8"))
    done = 0
    for c in range((runs + chunk - 1) // chunk):
        rows = min(chunk, runs - done)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, c)))
        x = spec.F.sample(rng, (rows, m))
        y = spec.G.sample(rng, (rows, n))
        values = statistics_from_labels(labels_from_samples(x, y), m, tests, grid=grid, epsilon=epsilon)
        for t in tests:
            out[t][done : done + rows] = rejects(values[t], critical[t], get_statistic(t).tail)
        done += rows
    return out


def power_study(
    tests: Sequence[str],
    alternatives: Sequence,
    m: int = 120,
    n: int = 120,
    grid: DyadicGrid | None = None,
    alpha: float = 0.05,
    runs: int = 5000,
    seed: int = 0,
    null_replicates: int = 100_000,
    epsilon: float | None = None,
    workers: int = 1,
    cache: NullCache | None = None,
) -> PowerTable:
    """Empirical power of each test against each alternative.

    Critical values come from ``null_replicates`` null simulations with the
    same seed; each alternative draws its datasets from its own seed stream,
    so adding or removing alternatives does not change the others.
    """
    tests = [get_statistic(t).id for t in tests]
    if not tests:
        raise ValueError("at least one test is required")
    if not alternatives:
        raise ValueError("at least one alternative is required")
    grid = grid or DyadicGrid(6)
    specs = [a if isinstance(a, AlternativeSpec) else make_alternative(a) for a in alternatives]
    critical = {}
    for t in tests:
        null = simulate_null(
            t, m, n, null_replicates, seed=seed, grid=grid, epsilon=epsilon, workers=workers, cache=cache
        )
        critical[t] = critical_value(null, alpha)
    power: dict[str, dict[str, float]] = {t: {} for t in tests}
    for spec in specs:
        flags = rejection_flags(spec, tests, critical, m, n, grid, runs, seed, epsilon)
        for t in tests:
            power[t][spec.id] = float(flags[t].mean())
    return PowerTable(power, m, n, grid.d, alpha, runs, seed, null_replicates, critical)
