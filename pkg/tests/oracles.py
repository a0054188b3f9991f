"""Independent brute-force oracles shared by the unit and acceptance tests."""

import math

import numpy as np

from compcurves.empirical import Sample, TwoSampleData

DENSE = 10**6

# (m, n) with m and m + n dividing 10**6, so every breakpoint k/m and l/N lies on the dense grid
DENSE_SIZES = [
    (5, 5), (8, 8), (10, 10), (5, 15), (10, 15), (16, 16), (20, 20), (25, 25),
    (10, 30), (8, 12), (16, 4), (20, 5), (5, 20), (10, 40), (20, 30),
]


def dense_process(data: TwoSampleData, kind: str, eps: float):
    """Process values at every dense grid point of [eps, 1-eps], both one-sided limits.

    Left-continuous values use ceil(size p); right limits use floor(size p) + 1.
    The right limit at 1 - eps lies outside the interval and is dropped.
    """
    i = np.arange(math.ceil(eps * DENSE - 1e-9), math.floor((1 - eps) * DENSE + 1e-9) + 1, dtype=np.int64)
    p = i / DENSE
    m, n = data.m, data.n
    eta = math.sqrt(m * n / (m + n))
    w = 1.0 / np.sqrt(p * (1 - p))
    if kind == "CC":
        yb = np.searchsorted(data.y.values, data.x.values, side="right")
        size = m

        def value(k):
            return eta * (p - yb[k - 1] / n) * w

    else:
        cx = np.cumsum(data.labels())
        size = m + n

        def value(l):
            a = cx[l - 1]
            return eta * (a / m - (l - a) / n) * w

    k_left = (size * i + DENSE - 1) // DENSE
    k_right = np.minimum((size * i) // DENSE + 1, size)
    left = value(k_left)
    right = value(k_right)[:-1]
    return np.concatenate([left, right])


def random_dense_dataset(rng, idx):
    m, n = DENSE_SIZES[idx % len(DENSE_SIZES)]
    shift = rng.normal(0, 0.7)
    return TwoSampleData(Sample(rng.normal(size=m)), Sample(rng.normal(shift, rng.uniform(0.5, 2), size=n)))
