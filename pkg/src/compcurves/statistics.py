"""Test statistics for H: F >= G and for the equality hypothesis.

Min-type statistics of the weighted processes (``u``, ``p``, ``uc``) reject
for small values; the competitors ``ks`` and ``auc`` and the sup-type
indices ``index-cc`` / ``index-ccc`` reject for large values.

Every statistic has a per-dataset form taking :class:`TwoSampleData` and a
batch form working on a boolean label matrix (one row per replicate, True
where the pooled order statistic came from X). The batch forms are what the
Monte Carlo engine uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .empirical import TwoSampleData, quantile_index
from .grid import (
    DyadicGrid,
    evaluate_P,
    evaluate_U,
    p_bars_from_counts,
    u_bars_from_counts,
)


@dataclass(frozen=True)
class Statistic:
    id: str
    tail: str
    uses_grid: bool = False
    uses_epsilon: bool = False
    process: str | None = None


STATISTICS = {
    "u": Statistic("u", "lower", uses_grid=True, process="U"),
    "p": Statistic("p", "lower", uses_grid=True, process="P"),
    "ks": Statistic("ks", "upper"),
    "auc": Statistic("auc", "upper"),
    "uc": Statistic("uc", "lower", uses_epsilon=True),
    "index-cc": Statistic("index-cc", "upper", uses_epsilon=True),
    "index-ccc": Statistic("index-ccc", "upper", uses_epsilon=True),
}


def get_statistic(stat_id: str) -> Statistic:
    try:
        return STATISTICS[stat_id.lower()]
    except KeyError:
        raise ValueError(f"unknown statistic {stat_id!r}; choose from {sorted(STATISTICS)}") from None


def default_epsilon(N: int) -> float:
    """``log(N)**3 / N``, the smallest trimming for which the continuous statistics are consistent."""
    return math.log(N) ** 3 / N


def _resolve_epsilon(epsilon: float | None, N: int) -> float:
    if epsilon is None:
        epsilon = default_epsilon(N)
        if not 0 < epsilon < 0.5:
            raise ValueError(
                f"default trimming log(N)^3/N = {epsilon:.4g} is not below 1/2 for N={N}; "
                "pass epsilon explicitly"
            )
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    return float(epsilon)


def _eta(m: int, n: int) -> float:
    return math.sqrt(m * n / (m + n))


# -- grid statistics ---------------------------------------------------------


def stat_U(data: TwoSampleData, grid: DyadicGrid, interval: tuple[float, float] | None = None) -> float:
    """Minimum of the unpooled bars over the grid (optionally over ``p1 < p < p2``)."""
    return evaluate_U(data, grid).minimum(interval)


def stat_P(data: TwoSampleData, grid: DyadicGrid, interval: tuple[float, float] | None = None) -> float:
    """Minimum of the pooled bars over the grid (optionally over ``p1 < p < p2``)."""
    return evaluate_P(data, grid).minimum(interval)


def stat_KS(data: TwoSampleData) -> float:
    """One-sided Kolmogorov-Smirnov ``eta_N sup_x {G_n(x) - F_m(x)}``.

    The supremum of a difference of step functions is attained at a jump
    point or to the left of all data, where the difference is 0.
    """
    z = np.concatenate([data.x.values, data.y.values])
    diff = np.searchsorted(data.y.values, z, side="right") / data.n - np.searchsorted(
        data.x.values, z, side="right"
    ) / data.m
    return data.etaN * max(0.0, float(diff.max()))


def stat_AUC(data: TwoSampleData) -> float:
    """``eta_N (1/m) sum_i [G_n(X_(i)) - i/m]^+``."""
    g = np.searchsorted(data.y.values, data.x.values, side="right") / data.n
    i = np.arange(1, data.m + 1) / data.m
    return data.etaN * float(np.maximum(g - i, 0.0).sum() / data.m)


# -- continuous (breakpoint) statistics -------------------------------------


def _breakpoint_candidates(pieces: int, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Candidate points and their piece indices for extremes over ``[eps, 1 - eps]``.

    The empirical quantile on ``pieces`` order statistics is constant on
    ``((k-1)/K, k/K]``. On such a piece the unpooled process is
    nondecreasing in ``p`` (its derivative has the sign of
    ``p (1 - 2c) + c >= 0``) and the pooled process is a constant times
    ``1/sqrt(p(1-p))``, so extremes sit at piece ends. Left ends enter as
    right limits with the value of the piece to their right.
    """
    k = np.arange(1, pieces + 1)
    left = (k - 1) / pieces
    right = k / pieces
    lmask = (left >= eps) & (left < 1.0 - eps)
    rmask = (right >= eps) & (right <= 1.0 - eps)
    ends = np.array([eps, 1.0 - eps])
    p = np.concatenate([ends, left[lmask], right[rmask]])
    piece = np.concatenate([quantile_index(pieces, ends), k[lmask], k[rmask]])
    return p, piece


def _uc_values(y_below: np.ndarray, m: int, n: int, eps: float) -> np.ndarray:
    """Unpooled process at all candidates; ``y_below`` has shape (..., m)."""
    p, piece = _breakpoint_candidates(m, eps)
    c = y_below[..., piece - 1] / n
    return _eta(m, n) * (p - c) / np.sqrt(p * (1.0 - p))


def _pc_values(x_count: np.ndarray, m: int, n: int, eps: float) -> np.ndarray:
    """Pooled process at all candidates; ``x_count`` has shape (..., N)."""
    N = m + n
    p, piece = _breakpoint_candidates(N, eps)
    a = x_count[..., piece - 1]
    return _eta(m, n) * (a / m - (piece - a) / n) / np.sqrt(p * (1.0 - p))


def _y_below_x(data: TwoSampleData) -> np.ndarray:
    return np.searchsorted(data.y.values, data.x.values, side="right")


def stat_Uc(data: TwoSampleData, epsilon: float | None = None) -> float:
    """Exact infimum of the unpooled process over ``[eps, 1 - eps]``."""
    eps = _resolve_epsilon(epsilon, data.N)
    return float(_uc_values(_y_below_x(data), data.m, data.n, eps).min())


def index_sup(data: TwoSampleData, kind: str = "CC", epsilon: float | None = None) -> float:
    """Exact ``sup_{eps <= p <= 1-eps} |process(p)|`` for the unpooled (CC) or pooled (CCC) process."""
    eps = _resolve_epsilon(epsilon, data.N)
    kind = kind.upper()
    if kind == "CC":
        vals = _uc_values(_y_below_x(data), data.m, data.n, eps)
    elif kind == "CCC":
        vals = _pc_values(np.cumsum(data.labels()), data.m, data.n, eps)
    else:
        raise ValueError(f"kind must be 'CC' or 'CCC', got {kind!r}")
    return float(np.abs(vals).max())


def compute_statistic(
    data: TwoSampleData,
    stat_id: str,
    grid: DyadicGrid | None = None,
    epsilon: float | None = None,
    interval: tuple[float, float] | None = None,
) -> float:
    stat = get_statistic(stat_id)
    if stat.uses_grid and grid is None:
        raise ValueError(f"statistic {stat.id!r} needs a grid")
    if stat.id == "u":
        return stat_U(data, grid, interval)
    if stat.id == "p":
        return stat_P(data, grid, interval)
    if stat.id == "ks":
        return stat_KS(data)
    if stat.id == "auc":
        return stat_AUC(data)
    if stat.id == "uc":
        return stat_Uc(data, epsilon)
    if stat.id == "index-cc":
        return index_sup(data, "CC", epsilon)
    return index_sup(data, "CCC", epsilon)


# -- batch forms ---------------------------------------------------------------


def y_below_from_labels(labels: np.ndarray, m: int) -> np.ndarray:
    """(R, m) matrix: number of Y values at or below each X order statistic."""
    cy = np.cumsum(~labels, axis=1)
    return cy[labels].reshape(labels.shape[0], m)


def bars_from_labels(labels: np.ndarray, m: int, grid: DyadicGrid) -> tuple[np.ndarray, np.ndarray]:
    """(U bars, P bars), each of shape (R, grid.d)."""
    N = labels.shape[1]
    n = N - m
    yb = y_below_from_labels(labels, m)
    u = u_bars_from_counts(yb[:, grid.order_indices(m) - 1], grid, m, n)
    cx = np.cumsum(labels, axis=1)
    pb = p_bars_from_counts(cx[:, grid.order_indices(N) - 1], grid, m, n)
    return u, pb


def statistics_from_labels(
    labels: np.ndarray,
    m: int,
    stat_ids,
    grid: DyadicGrid | None = None,
    epsilon: float | None = None,
    interval: tuple[float, float] | None = None,
) -> dict[str, np.ndarray]:
    """Evaluate several statistics on every row of a label matrix."""
    R, N = labels.shape
    n = N - m
    eta = _eta(m, n)
    out: dict[str, np.ndarray] = {}
    ids = [get_statistic(s).id for s in stat_ids]
    yb = y_below_from_labels(labels, m) if {"u", "auc", "uc", "index-cc"} & set(ids) else None
    cx = np.cumsum(labels, axis=1) if {"p", "ks", "index-ccc"} & set(ids) else None
    mask = grid.mask(interval) if grid is not None else None
    if mask is not None and not mask.any():
        raise ValueError(f"no grid points inside {interval}")
    for sid in ids:
        if sid == "u":
            bars = u_bars_from_counts(yb[:, grid.order_indices(m) - 1], grid, m, n)
            out[sid] = bars[:, mask].min(axis=1)
        elif sid == "p":
            bars = p_bars_from_counts(cx[:, grid.order_indices(N) - 1], grid, m, n)
            out[sid] = bars[:, mask].min(axis=1)
        elif sid == "ks":
            cy = np.arange(1, N + 1) - cx
            diff = cy / n - cx / m
            out[sid] = eta * np.maximum(diff.max(axis=1), 0.0)
        elif sid == "auc":
            i = np.arange(1, m + 1) / m
            out[sid] = eta * (np.maximum(yb / n - i, 0.0).sum(axis=1) / m)
        elif sid == "uc":
            out[sid] = _uc_values(yb, m, n, _resolve_epsilon(epsilon, N)).min(axis=1)
        elif sid == "index-cc":
            out[sid] = np.abs(_uc_values(yb, m, n, _resolve_epsilon(epsilon, N))).max(axis=1)
        elif sid == "index-ccc":
            out[sid] = np.abs(_pc_values(cx, m, n, _resolve_epsilon(epsilon, N))).max(axis=1)
    return out
