"""Monte Carlo null distributions, critical values, p-values and acceptance barriers.

Under F = G every statistic here is distribution free, so its null law only
depends on the random interleaving of the two samples. Two engines generate it:

``ranks`` (default)
    Draws the rank information directly. For the grid processes only the
    counts at the grid points are drawn: uniform order statistics of X from
    gamma spacings and the Y counts between them as sequential binomials
    (unpooled), or the X counts among the first ``ceil(N p_j)`` pooled values
    as sequential hypergeometrics (pooled). Other statistics use uniformly
    shuffled label sequences.
``samples``
    Draws actual samples from a continuous model (uniform by default) and
    evaluates the per-dataset statistic on each replicate.

Replicates are produced in chunks whose layout depends only on the problem
size; chunk ``c`` uses ``SeedSequence(seed, spawn_key=(stream, c))``. Results
are therefore identical for any number of workers.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import warnings
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .empirical import Sample, TwoSampleData
from .grid import DyadicGrid, N_BUCKETS, bucket_minima_matrix, p_bars_from_counts, u_bars_from_counts
from .statistics import compute_statistic, get_statistic, statistics_from_labels

CACHE_ENV = "COMPCURVES_CACHE"
FORMAT_VERSION = 1
MAX_ROWS = 20_000
CHUNK_CELLS = 4_000_000


class DegenerateNullWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class NullDistribution:
    """Sorted Monte Carlo replicates of a statistic under F = G."""

    statistic: str
    values: np.ndarray
    m: int
    n: int
    seed: int
    grid_s: int | None = None
    epsilon: float | None = None
    interval: tuple[float, float] | None = None
    engine: str = "ranks"

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float))
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def R(self) -> int:
        return int(self.values.size)

    @property
    def tail(self) -> str:
        return get_statistic(self.statistic).tail

    @property
    def is_degenerate(self) -> bool:
        return bool(self.values[0] == self.values[-1])

    def key(self) -> dict:
        return null_key(
            self.statistic, self.m, self.n, self.R, self.seed, self.grid_s, self.epsilon, self.interval, self.engine
        )

    def save(self, path: str | Path) -> None:
        _write_array(path, self.key(), self.values)

    @classmethod
    def load(cls, path: str | Path) -> "NullDistribution":
        header, values = _read_array(path)
        interval = tuple(header["interval"]) if header["interval"] is not None else None
        return cls(
            statistic=header["statistic"],
            values=values,
            m=header["m"],
            n=header["n"],
            seed=header["seed"],
            grid_s=header["grid_s"],
            epsilon=header["epsilon"],
            interval=interval,
            engine=header["engine"],
        )


def null_key(statistic, m, n, R, seed, grid_s=None, epsilon=None, interval=None, engine="ranks") -> dict:
    return {
        "kind": "null",
        "statistic": statistic,
        "m": int(m),
        "n": int(n),
        "R": int(R),
        "seed": int(seed),
        "grid_s": grid_s,
        "epsilon": epsilon,
        "interval": list(interval) if interval is not None else None,
        "engine": engine,
        "version": FORMAT_VERSION,
    }


# -- cache ---------------------------------------------------------------------


def _write_array(path, header: dict, values: np.ndarray) -> None:
    """JSON header line followed by little-endian float64 data; written atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.ascontiguousarray(values, dtype="<f8")
    header = dict(header, shape=list(arr.shape))
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
            fh.write(arr.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_array(path) -> tuple[dict, np.ndarray]:
    with Path(path).open("rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        data = np.frombuffer(fh.read(), dtype="<f8")
    return header, data.reshape(header["shape"]).astype(float)


class NullCache:
    """Directory of simulated null replicates keyed by their full configuration."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    @classmethod
    def from_env(cls) -> "NullCache | None":
        path = os.environ.get(CACHE_ENV)
        return cls(path) if path else None

    def path_for(self, key: dict) -> Path:
        digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode("utf-8")).hexdigest()[:20]
        return self.directory / f"{key['kind']}-{key.get('statistic', key.get('process'))}-{digest}.bin"

    def get(self, key: dict) -> np.ndarray | None:
        path = self.path_for(key)
        if not path.exists():
            return None
        header, values = _read_array(path)
        header.pop("shape")
        if header != key:
            return None
        return values

    def put(self, key: dict, values: np.ndarray) -> Path:
        path = self.path_for(key)
        _write_array(path, key, values)
        return path


# -- chunking and seeding ------------------------------------------------------


def _stream_id(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def _chunk_sizes(total: int, rows: int) -> list[int]:
    full, rest = divmod(total, rows)
    return [rows] * full + ([rest] if rest else [])


def _rng(seed: int, stream: str, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_stream_id(stream), chunk)))


def _run_chunks(func, args_list, workers: int):
    if workers <= 1 or len(args_list) <= 1:
        return [func(*a) for a in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, *zip(*args_list)))


# -- rank engine for the grid processes ---------------------------------------


def _unpooled_counts(rng: np.random.Generator, rows: int, m: int, n: int, ks: np.ndarray) -> np.ndarray:
    """Number of Y at or below the X order statistics ``ks`` (sorted, unique, 1-based).

    X order statistics of a uniform sample are ratios of gamma partial sums;
    given them, Y counts in successive gaps are sequential binomials.
    """
    gaps = np.diff(np.concatenate([[0], ks, [m + 1]]))
    spacings = rng.standard_gamma(gaps.astype(float), size=(rows, gaps.size))
    partial = np.cumsum(spacings, axis=1)
    u = partial[:, :-1] / partial[:, -1:]
    counts = np.empty((rows, ks.size), dtype=np.int64)
    remaining = np.full(rows, n, dtype=np.int64)
    acc = np.zeros(rows, dtype=np.int64)
    prev = np.zeros(rows)
    for i in range(ks.size):
        free = 1.0 - prev
        prob = np.where(free > 0, (u[:, i] - prev) / np.where(free > 0, free, 1.0), 1.0)
        inc = rng.binomial(remaining, np.clip(prob, 0.0, 1.0))
        acc += inc
        remaining -= inc
        counts[:, i] = acc
        prev = u[:, i]
    return counts


def _pooled_counts(rng: np.random.Generator, rows: int, m: int, n: int, ls: np.ndarray) -> np.ndarray:
    """Number of X among the first ``ls`` pooled order statistics, via sequential hypergeometrics."""
    counts = np.empty((rows, ls.size), dtype=np.int64)
    acc = np.zeros(rows, dtype=np.int64)
    prev = 0
    for i, l in enumerate(ls):
        good = m - acc
        bad = n - (prev - acc)
        acc = acc + rng.hypergeometric(good, bad, int(l - prev))
        counts[:, i] = acc
        prev = l
    return counts


def _bar_rows(process: str, m: int, n: int, grid: DyadicGrid) -> int:
    size = m if process == "U" else m + n
    unique = np.unique(grid.order_indices(size)).size
    return max(1, min(MAX_ROWS, CHUNK_CELLS // max(unique, grid.d)))


def _bar_chunk(process: str, m: int, n: int, s: int, seed: int, chunk: int, rows: int) -> np.ndarray:
    grid = DyadicGrid(s)
    rng = _rng(seed, f"bars-{process}", chunk)
    if process == "U":
        k = grid.order_indices(m)
        ks, inv = np.unique(k, return_inverse=True)
        counts = _unpooled_counts(rng, rows, m, n, ks)[:, inv]
        return u_bars_from_counts(counts, grid, m, n)
    l = grid.order_indices(m + n)
    ls, inv = np.unique(l, return_inverse=True)
    counts = _pooled_counts(rng, rows, m, n, ls)[:, inv]
    return p_bars_from_counts(counts, grid, m, n)


def simulate_bars(process: str, m: int, n: int, grid: DyadicGrid, replicates: int, seed: int = 0, workers: int = 1):
    """Iterator over ``(rows, grid.d)`` blocks of null bars of process ``'U'`` or ``'P'``."""
    process = process.upper()
    if process not in ("U", "P"):
        raise ValueError(f"process must be 'U' or 'P', got {process!r}")
    sizes = _chunk_sizes(replicates, _bar_rows(process, m, n, grid))
    args = [(process, m, n, grid.s, seed, c, rows) for c, rows in enumerate(sizes)]
    if workers <= 1:
        for a in args:
            yield _bar_chunk(*a)
    else:
        yield from _run_chunks(_bar_chunk, args, workers)


# -- label engine --------------------------------------------------------------


def _label_chunk(stat_id, m, n, s, epsilon, interval, seed, chunk, rows) -> np.ndarray:
    N = m + n
    rng = _rng(seed, f"labels-{stat_id}", chunk)
    base = np.zeros((rows, N), dtype=bool)
    base[:, :m] = True
    labels = rng.permuted(base, axis=1)
    grid = DyadicGrid(s) if s is not None else None
    return statistics_from_labels(labels, m, [stat_id], grid=grid, epsilon=epsilon, interval=interval)[stat_id]


def _samples_null(stat_id, m, n, grid, epsilon, interval, replicates, seed, sampler) -> np.ndarray:
    out = np.empty(replicates)
    for c, rows in enumerate(_chunk_sizes(replicates, 1000)):
        rng = _rng(seed, f"samples-{stat_id}", c)
        if sampler is None:
            x = rng.random((rows, m))
            y = rng.random((rows, n))
        else:
            x = sampler.sample(rng, (rows, m))
            y = sampler.sample(rng, (rows, n))
        for i in range(rows):
            data = TwoSampleData(Sample(x[i]), Sample(y[i]))
            out[c * 1000 + i] = compute_statistic(data, stat_id, grid=grid, epsilon=epsilon, interval=interval)
    return out


def simulate_null(
    statistic: str,
    m: int,
    n: int,
    replicates: int,
    seed: int = 0,
    grid: DyadicGrid | None = None,
    epsilon: float | None = None,
    interval: tuple[float, float] | None = None,
    engine: str = "ranks",
    sampler=None,
    workers: int = 1,
    cache: NullCache | None = None,
) -> NullDistribution:
    """Simulate ``replicates`` values of ``statistic`` under F = G for sample sizes ``(m, n)``.

    ``sampler`` (a :class:`~compcurves.curves.DistributionModel`) only
    applies to the ``samples`` engine; its default is Uniform(0, 1).
    """
    stat = get_statistic(statistic)
    if replicates < 100:
        raise ValueError("at least 100 replicates are required")
    if stat.uses_grid and grid is None:
        raise ValueError(f"statistic {stat.id!r} needs a grid")
    if engine not in ("ranks", "samples"):
        raise ValueError(f"unknown engine {engine!r}")
    grid_s = grid.s if stat.uses_grid else None
    eps = epsilon if stat.uses_epsilon else None
    interval = tuple(interval) if (interval is not None and stat.uses_grid) else None
    engine_tag = engine if sampler is None else f"samples:{sampler.name}"
    key = null_key(stat.id, m, n, replicates, seed, grid_s, eps, interval, engine_tag)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return NullDistribution(stat.id, hit, m, n, seed, grid_s, eps, interval, engine_tag)

    if engine == "samples":
        values = _samples_null(stat.id, m, n, grid, eps, interval, replicates, seed, sampler)
    elif stat.uses_grid:
        mask = grid.mask(interval)
        if not mask.any():
            raise ValueError(f"no grid points inside {interval}")
        blocks = simulate_bars(stat.process, m, n, grid, replicates, seed, workers)
        values = np.concatenate([b[:, mask].min(axis=1) for b in blocks])
    else:
        rows = max(1, min(MAX_ROWS, CHUNK_CELLS // (m + n)))
        args = [
            (stat.id, m, n, None, eps, None, seed, c, r)
            for c, r in enumerate(_chunk_sizes(replicates, rows))
        ]
        values = np.concatenate(_run_chunks(_label_chunk, args, workers))

    null = NullDistribution(stat.id, values, m, n, seed, grid_s, eps, interval, engine_tag)
    if cache is not None:
        cache.put(key, null.values)
    return null


# -- critical values and p-values ----------------------------------------------


def _level_count(alpha: float, R: int) -> int:
    """Largest integer ``K`` with ``K / R <= alpha``."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    K = int(math.floor(alpha * R))
    while (K + 1) / R <= alpha:
        K += 1
    while K > 0 and K / R > alpha:
        K -= 1
    return K


def critical_value(null: NullDistribution, alpha: float, tail: str | None = None) -> float:
    """Critical value under the non-randomized convention.

    Lower tail: the largest ``q`` with ``#{replicates < q} / R <= alpha``;
    the test rejects when the statistic is ``< q``. Upper tail, the mirror
    image: the smallest ``t`` with ``#{replicates > t} / R <= alpha``; the
    test rejects when the statistic is ``> t``.
    """
    tail = tail or null.tail
    K = _level_count(alpha, null.R)
    if null.is_degenerate:
        warnings.warn(f"null distribution of {null.statistic!r} is degenerate", DegenerateNullWarning)
    if tail == "lower":
        return float(null.values[K])
    if tail == "upper":
        return float(null.values[null.R - K - 1])
    raise ValueError(f"tail must be 'lower' or 'upper', got {tail!r}")


def rejects(value: float, critical: float, tail: str) -> bool:
    return value < critical if tail == "lower" else value > critical


def p_value(null: NullDistribution, observed: float, tail: str | None = None) -> float:
    """Raw proportion of replicates at least as extreme as ``observed`` (no +1 correction)."""
    tail = tail or null.tail
    if tail == "lower":
        return int(np.searchsorted(null.values, observed, side="right")) / null.R
    if tail == "upper":
        return (null.R - int(np.searchsorted(null.values, observed, side="left"))) / null.R
    raise ValueError(f"tail must be 'lower' or 'upper', got {tail!r}")


def critical_value_se(null: NullDistribution, alpha: float, tail: str | None = None) -> float:
    """Monte Carlo standard error of the critical value from the spread of nearby order statistics."""
    tail = tail or null.tail
    R = null.R
    K = _level_count(alpha, R)
    idx = K if tail == "lower" else R - K - 1
    h = max(1, int(math.ceil(math.sqrt(R * alpha * (1 - alpha)))))
    lo, hi = max(0, idx - h), min(R - 1, idx + h)
    return float(null.values[hi] - null.values[lo]) / 2.0


# -- barriers ------------------------------------------------------------------


def simulate_bucket_minima(
    process: str,
    m: int,
    n: int,
    grid: DyadicGrid,
    replicates: int,
    seed: int = 0,
    workers: int = 1,
    cache: NullCache | None = None,
) -> np.ndarray:
    """(R, 10) matrix of null bucket minima ``L(., I_k)``; NaN columns for empty buckets."""
    process = process.upper()
    key = {
        "kind": "minima",
        "process": process,
        "m": int(m),
        "n": int(n),
        "R": int(replicates),
        "seed": int(seed),
        "grid_s": grid.s,
        "version": FORMAT_VERSION,
    }
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            return hit
    mins = np.concatenate(
        [bucket_minima_matrix(b, grid) for b in simulate_bars(process, m, n, grid, replicates, seed, workers)]
    )
    if cache is not None:
        cache.put(key, mins)
    return mins


def _column_critical(col: np.ndarray, K: int) -> float:
    return float(np.sort(col)[K])


def barriers_from_minima(minima: np.ndarray, alpha: float, familywise: bool = False) -> list[float | None]:
    """Lower barriers ``l(N, alpha, I_k)`` from simulated bucket minima."""
    R = minima.shape[0]
    present = [k for k in range(N_BUCKETS) if not np.isnan(minima[0, k])]
    srt = {k: np.sort(minima[:, k]) for k in present}
    K = _level_count(alpha, R)
    if familywise and present:
        # largest common per-bucket count whose union of exceedances keeps level alpha
        lo, hi = 0, K
        while lo < hi:
            mid = (lo + hi + 1) // 2
            any_below = np.zeros(R, dtype=bool)
            for k in present:
                any_below |= minima[:, k] < srt[k][mid]
            if any_below.sum() <= K:
                lo = mid
            else:
                hi = mid - 1
        K = lo
    return [float(srt[k][K]) if k in srt else None for k in range(N_BUCKETS)]


def barriers(
    process: str,
    m: int,
    n: int,
    grid: DyadicGrid,
    alpha: float = 0.05,
    replicates: int = 100_000,
    seed: int = 0,
    familywise: bool = False,
    workers: int = 1,
    cache: NullCache | None = None,
) -> list[float | None]:
    """Per-decile barriers with ``P(L(., I_k) >= l_k; F = G) >= 1 - alpha``; ``None`` for empty buckets."""
    if replicates < 100:
        raise ValueError("at least 100 replicates are required")
    minima = simulate_bucket_minima(process, m, n, grid, replicates, seed, workers, cache)
    return barriers_from_minima(minima, alpha, familywise)
