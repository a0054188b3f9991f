"""Samples, empirical CDFs and quantiles, pooling, ties handling and ingestion.

Everything downstream is computed from ranks, so ranks are settled here:
values are validated finite, ties are either rejected or broken by a seeded
jitter that cannot reorder distinct values.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np


class DataError(ValueError):
    """Malformed or non-finite input data."""


class TiesViolation(DataError):
    """Duplicated values in the pooled sample while ties are rejected."""

    def __init__(self, value: float, count: int):
        self.value = value
        self.count = count
        super().__init__(
            f"value {value!r} occurs {count} times in the pooled sample; "
            "rank-based statistics assume no ties (use ties mode 'jitter' "
            "to break them reproducibly)"
        )


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float).ravel()
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        shown = ", ".join(str(i) for i in bad[:5])
        raise DataError(f"non-finite value(s) at position(s) {shown}")
    arr.sort()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Sample:
    """An ordered sample of finite real observations."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values)
        if arr.size == 0:
            raise ValueError("a sample needs at least one observation")
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Sample(n={self.n})"


@dataclass(frozen=True)
class TiesPolicy:
    """How ingestion treats duplicated values.

    ``mode='reject'`` raises :class:`TiesViolation`; ``mode='jitter'`` adds a
    seeded uniform perturbation to the tied values only, with magnitude below
    a quarter of the smallest positive gap in the pooled sample.
    """

    mode: str = "reject"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("reject", "jitter"):
            raise ValueError(f"unknown ties mode {self.mode!r}")


def _first_tie(values: np.ndarray):
    """Return (value, multiplicity) of the smallest duplicated value, or None."""
    srt = np.sort(values)
    dup = np.flatnonzero(srt[1:] == srt[:-1])
    if dup.size == 0:
        return None
    v = srt[dup[0]]
    return float(v), int(np.count_nonzero(srt == v))


def _jitter(x: np.ndarray, y: np.ndarray, seed: int):
    pooled = np.concatenate([x, y])
    srt = np.unique(pooled)
    gaps = np.diff(srt)
    if gaps.size:
        half_width = 0.25 * gaps.min()
    else:
        half_width = 1e-9 * max(1.0, abs(float(srt[0])))
    uniq, counts = np.unique(pooled, return_counts=True)
    tied = np.isin(pooled, uniq[counts > 1])
    rng = np.random.default_rng(seed)
    pooled = pooled.copy()
    pooled[tied] += rng.uniform(-half_width, half_width, size=int(tied.sum()))
    return pooled[: x.size], pooled[x.size:]


@dataclass(frozen=True, eq=False)
class TwoSampleData:
    """Reference sample ``x`` (CDF F, size m) and comparison sample ``y`` (CDF G, size n).

    The pooled sample is guaranteed tie-free once constructed.
    """

    x: Sample
    y: Sample

    def __post_init__(self):
        tie = _first_tie(np.concatenate([self.x.values, self.y.values]))
        if tie is not None:
            raise TiesViolation(*tie)

    @classmethod
    def from_arrays(cls, x, y, ties: TiesPolicy | str = "reject") -> "TwoSampleData":
        if isinstance(ties, str):
            ties = TiesPolicy(ties)
        xs, ys = Sample(x), Sample(y)
        if ties.mode == "jitter" and _first_tie(np.concatenate([xs.values, ys.values])):
            xv, yv = _jitter(xs.values, ys.values, ties.seed)
            xs, ys = Sample(xv), Sample(yv)
        return cls(xs, ys)

    @property
    def m(self) -> int:
        return self.x.n

    @property
    def n(self) -> int:
        return self.y.n

    @property
    def N(self) -> int:
        return self.m + self.n

    @property
    def lambdaN(self) -> float:
        return self.m / self.N

    @property
    def etaN(self) -> float:
        return math.sqrt(self.m * self.n / self.N)

    def labels(self) -> np.ndarray:
        """Boolean array over the pooled order statistics: True where the value came from x."""
        pooled = np.concatenate([self.x.values, self.y.values])
        order = np.argsort(pooled, kind="stable")
        return order < self.m

    def __repr__(self) -> str:
        return f"TwoSampleData(m={self.m}, n={self.n})"


def ecdf_at(sample: Sample, x) -> np.ndarray | float:
    """Right-continuous empirical CDF, ``#{values <= x} / n``."""
    counts = np.searchsorted(sample.values, x, side="right")
    out = counts / sample.n
    return float(out) if np.ndim(out) == 0 else out


def quantile_index(n: int, p) -> np.ndarray:
    """1-based index of the order statistic returned by the empirical quantile at ``p``.

    Smallest ``k`` with ``k/n >= p``, i.e. ``ceil(n p)`` made robust to the
    rounding of ``n * p`` in floating point.
    """
    p = np.asarray(p, dtype=float)
    k = np.ceil(n * p).astype(np.int64)
    k = np.clip(k, 1, n)
    # nudge by one where the float product landed on the wrong side
    k = np.where((k > 1) & ((k - 1) / n >= p), k - 1, k)
    k = np.where((k < n) & (k / n < p), k + 1, k)
    return k


def equantile(sample: Sample, p) -> np.ndarray | float:
    """Left-continuous generalized inverse ``inf{x : F_n(x) >= p}`` for ``0 < p <= 1``."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(~(p_arr > 0) | (p_arr > 1)):
        raise ValueError("empirical quantile needs 0 < p <= 1")
    out = sample.values[quantile_index(sample.n, p_arr) - 1]
    return float(out) if np.ndim(out) == 0 else out


def pooled(data: TwoSampleData) -> Sample:
    """Merged sorted sample; its ECDF equals ``lambdaN F_m + (1 - lambdaN) G_n``."""
    return Sample(np.concatenate([data.x.values, data.y.values]))


def apply_monotone(data: TwoSampleData, transform: Callable[[np.ndarray], np.ndarray]) -> TwoSampleData:
    """Apply a strictly increasing map to both samples.

    The map is checked on the sorted pooled values; any loss of strict
    ordering (including ties created by rounding) is a domain error.
    """
    pool = pooled(data).values
    tpool = np.asarray(transform(pool), dtype=float)
    if tpool.shape != pool.shape or not np.all(np.isfinite(tpool)):
        raise ValueError("transform must map finite values to finite values elementwise")
    if np.any(np.diff(tpool) <= 0):
        raise ValueError("transform is not strictly increasing on the pooled values")
    tx = np.asarray(transform(data.x.values), dtype=float)
    ty = np.asarray(transform(data.y.values), dtype=float)
    return TwoSampleData(Sample(tx), Sample(ty))


# -- ingestion ---------------------------------------------------------------


def _parse_float(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{where}: cannot parse {text.strip()!r} as a number") from None
    if not math.isfinite(value):
        raise DataError(f"{where}: non-finite value {text.strip()!r}")
    return value


def read_values(path: str | Path) -> np.ndarray:
    """One numeric value per line; blank lines and lines starting with '#' are skipped."""
    path = Path(path)
    values = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            values.append(_parse_float(text, f"{path}:{lineno}"))
    if not values:
        raise DataError(f"{path}: no observations")
    return np.array(values)


def read_group_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """CSV with a header containing columns ``value`` and ``group`` (group in {x, y})."""
    path = Path(path)
    xs, ys = [], []
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"value", "group"} <= set(reader.fieldnames):
            raise DataError(f"{path}: header must contain 'value' and 'group' columns")
        for row in reader:
            where = f"{path}:{reader.line_num}"
            group = (row["group"] or "").strip().lower()
            value = _parse_float(row["value"] or "", where)
            if group == "x":
                xs.append(value)
            elif group == "y":
                ys.append(value)
            else:
                raise DataError(f"{where}: group must be 'x' or 'y', got {row['group']!r}")
    if not xs or not ys:
        raise DataError(f"{path}: both groups x and y need at least one observation")
    return np.array(xs), np.array(ys)


def load_two_files(x_path, y_path, ties: TiesPolicy | str = "reject") -> TwoSampleData:
    return TwoSampleData.from_arrays(read_values(x_path), read_values(y_path), ties=ties)


def load_csv(path, ties: TiesPolicy | str = "reject") -> TwoSampleData:
    x, y = read_group_csv(path)
    return TwoSampleData.from_arrays(x, y, ties=ties)


def write_values(path: str | Path, values: Iterable[float]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for v in values:
            fh.write(f"{float(v)!r}\n")
