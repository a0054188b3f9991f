"""Dyadic grids, the weighted rank processes U_N and P_N on them, and decile buckets.

Bars are computed from integer rank counts only. For a grid point
``p = j / 2**(s+1)`` the unpooled bar uses the ``ceil(m p)``-th X order
statistic and counts the Y values below it; the pooled bar uses the
``ceil(N p)``-th pooled order statistic and counts the X values among the
first ``ceil(N p)`` pooled values. Both counts are invariant under any
strictly increasing transformation of the data.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .empirical import TwoSampleData

N_BUCKETS = 10


@dataclass(frozen=True)
class DyadicGrid:
    """Points ``j / 2**(s+1)`` for ``j = 1 .. 2**(s+1) - 1``."""

    s: int

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 0:
            raise ValueError("resolution level s must be a nonnegative integer")

    @property
    def denom(self) -> int:
        return 2 ** (self.s + 1)

    @property
    def d(self) -> int:
        return self.denom - 1

    @cached_property
    def j(self) -> np.ndarray:
        out = np.arange(1, self.d + 1, dtype=np.int64)
        out.flags.writeable = False
        return out

    @cached_property
    def points(self) -> np.ndarray:
        out = self.j / self.denom
        out.flags.writeable = False
        return out

    @cached_property
    def weights(self) -> np.ndarray:
        """``1 / sqrt(p (1 - p))`` at every grid point."""
        p = self.points
        out = 1.0 / np.sqrt(p * (1.0 - p))
        out.flags.writeable = False
        return out

    def order_indices(self, size: int) -> np.ndarray:
        """``ceil(size * p_j)`` for every grid point, computed exactly in integers."""
        return (size * self.j + self.denom - 1) // self.denom

    def bucket_index(self) -> np.ndarray:
        """Decile interval (1..10) of every grid point: I_1 = [0, 0.1], I_k = ((k-1)/10, k/10]."""
        k = (N_BUCKETS * self.j + self.denom - 1) // self.denom
        return np.clip(k, 1, N_BUCKETS)

    def mask(self, interval: tuple[float, float] | None) -> np.ndarray:
        """Boolean mask of the grid points strictly inside ``interval``."""
        if interval is None:
            return np.ones(self.d, dtype=bool)
        lo, hi = interval
        if not 0 <= lo < hi <= 1:
            raise ValueError(f"sub-interval must satisfy 0 <= p1 < p2 <= 1, got {interval}")
        return (self.points > lo) & (self.points < hi)

    def describe(self) -> dict:
        return {"s": self.s, "d": self.d}


def default_resolution(N: int, process: str = "U", cap: str = "main-body") -> DyadicGrid:
    """Grid used for a total sample size ``N``.

    ``main-body`` is the fixed s = 6 (127 points); ``largest`` the largest
    dyadic grid with at most ``N`` points; ``ustar`` the largest grid with at
    most ``floor(N / ln(N)**3 - 1)`` points, never below s = 0. ``process``
    is accepted for symmetry between U and P; the caps do not depend on it.
    """
    if N < 4:
        raise ValueError("default resolution needs N >= 4")
    if process.upper() not in ("U", "P"):
        raise ValueError(f"process must be 'U' or 'P', got {process!r}")
    if cap in ("main-body", "127"):
        return DyadicGrid(6)
    if cap == "largest":
        limit = N
    elif cap == "ustar":
        limit = math.floor(N / math.log(N) ** 3 - 1)
    else:
        raise ValueError(f"unknown grid cap {cap!r}")
    s = 0
    while 2 ** (s + 2) - 1 <= limit:
        s += 1
    return DyadicGrid(s)


@dataclass(frozen=True, eq=False)
class BarPlot:
    grid: DyadicGrid
    kind: str
    bars: np.ndarray
    m: int
    n: int

    def __post_init__(self):
        bars = np.array(self.bars, dtype=float)
        if bars.shape != (self.grid.d,) or not np.all(np.isfinite(bars)):
            raise ValueError("a bar plot needs one finite bar per grid point")
        bars.flags.writeable = False
        object.__setattr__(self, "bars", bars)

    @property
    def etaN(self) -> float:
        return math.sqrt(self.m * self.n / (self.m + self.n))

    def minimum(self, interval=None) -> float:
        mask = self.grid.mask(interval)
        if not mask.any():
            raise ValueError(f"no grid points inside {interval}")
        return float(self.bars[mask].min())


def unpooled_counts(data: TwoSampleData, grid: DyadicGrid) -> np.ndarray:
    """``n G_n(F_m^{-1}(p_j))``: number of Y values at or below the ``ceil(m p_j)``-th X."""
    k = grid.order_indices(data.m)
    return np.searchsorted(data.y.values, data.x.values[k - 1], side="right")


def pooled_counts(data: TwoSampleData, grid: DyadicGrid) -> np.ndarray:
    """``m F_m(H_N^{-1}(p_j))``: number of X values among the first ``ceil(N p_j)`` pooled values."""
    l = grid.order_indices(data.N)
    return np.cumsum(data.labels())[l - 1]


def u_bars_from_counts(y_below: np.ndarray, grid: DyadicGrid, m: int, n: int) -> np.ndarray:
    eta = math.sqrt(m * n / (m + n))
    return eta * (grid.points - y_below / n) * grid.weights


def p_bars_from_counts(x_count: np.ndarray, grid: DyadicGrid, m: int, n: int) -> np.ndarray:
    eta = math.sqrt(m * n / (m + n))
    l = grid.order_indices(m + n)
    return eta * (x_count / m - (l - x_count) / n) * grid.weights


def evaluate_U(data: TwoSampleData, grid: DyadicGrid) -> BarPlot:
    bars = u_bars_from_counts(unpooled_counts(data, grid), grid, data.m, data.n)
    return BarPlot(grid, "U", bars, data.m, data.n)


def evaluate_P(data: TwoSampleData, grid: DyadicGrid) -> BarPlot:
    bars = p_bars_from_counts(pooled_counts(data, grid), grid, data.m, data.n)
    return BarPlot(grid, "P", bars, data.m, data.n)


def evaluate(data: TwoSampleData, grid: DyadicGrid, kind: str) -> BarPlot:
    if kind.upper() == "U":
        return evaluate_U(data, grid)
    if kind.upper() == "P":
        return evaluate_P(data, grid)
    raise ValueError(f"process must be 'U' or 'P', got {kind!r}")


@dataclass(frozen=True, eq=False)
class DecileBuckets:
    """Assignment of grid points to the ten decile intervals."""

    grid: DyadicGrid

    @cached_property
    def assignment(self) -> np.ndarray:
        return self.grid.bucket_index()

    def members(self, k: int) -> np.ndarray:
        """0-based grid indices falling into interval ``I_k`` (k = 1..10)."""
        return np.flatnonzero(self.assignment == k)

    def nonempty(self) -> list[int]:
        return [k for k in range(1, N_BUCKETS + 1) if (self.assignment == k).any()]


def bucket_minima(bars: BarPlot, buckets: DecileBuckets | None = None) -> list[float | None]:
    """Local minima ``L(., I_k)`` for k = 1..10; ``None`` marks an interval without grid points."""
    buckets = buckets or DecileBuckets(bars.grid)
    out: list[float | None] = []
    for k in range(1, N_BUCKETS + 1):
        idx = buckets.members(k)
        out.append(float(bars.bars[idx].min()) if idx.size else None)
    return out


def bucket_minima_matrix(bars: np.ndarray, grid: DyadicGrid) -> np.ndarray:
    """Row-wise bucket minima of a ``(replicates, d)`` bar matrix; NaN columns for empty buckets."""
    assign = grid.bucket_index()
    out = np.full((bars.shape[0], N_BUCKETS), np.nan)
    for k in range(1, N_BUCKETS + 1):
        cols = assign == k
        if cols.any():
            out[:, k - 1] = bars[:, cols].min(axis=1)
    return out


# -- CSV ---------------------------------------------------------------------


def write_bplot_csv(path: str | Path, plot: BarPlot, meta: dict | None = None) -> None:
    """Columns ``j, p, bar, bucket`` preceded by a ``#`` metadata line."""
    meta = dict(meta or {})
    meta.update(kind=plot.kind, m=plot.m, n=plot.n, d=plot.grid.d, s=plot.grid.s)
    buckets = plot.grid.bucket_index()
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["j", "p", "bar", "bucket"])
        for j, p, bar, b in zip(plot.grid.j, plot.grid.points, plot.bars, buckets):
            writer.writerow([int(j), repr(float(p)), repr(float(bar)), int(b)])


def read_csv_with_meta(path: str | Path) -> tuple[dict, list[dict]]:
    """Read any CSV artifact written by this package: (metadata, rows as dicts of strings)."""
    with Path(path).open(encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path}: missing metadata line")
        meta = json.loads(first[2:])
        rows = list(csv.DictReader(fh))
    return meta, rows
