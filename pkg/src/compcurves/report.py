"""Running a test end to end and the JSON test report."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from .empirical import TwoSampleData
from .grid import N_BUCKETS, DyadicGrid, bucket_minima, default_resolution, evaluate
from .montecarlo import NullCache, barriers, critical_value, p_value, rejects, simulate_null
from .statistics import _resolve_epsilon, compute_statistic, get_statistic


@dataclass
class TestConfig:
    """Settings shared by every test run; ``grid=None`` means the 127-point grid."""

    __test__ = False  # keep pytest from collecting this class

    grid: DyadicGrid | None = None
    epsilon: float | None = None
    interval: tuple[float, float] | None = None
    replicates: int = 100_000
    seed: int = 0
    workers: int = 1
    cache: NullCache | None = None
    with_barriers: bool = True


@dataclass
class TestReport:
    __test__ = False

    statistic: str
    value: float
    critical_value: float
    p_value: float
    alpha: float
    decision: str
    tail: str
    barriers: list = field(default_factory=lambda: [None] * N_BUCKETS)
    local_minima: list = field(default_factory=lambda: [None] * N_BUCKETS)
    m: int = 0
    n: int = 0
    d: int | None = None
    s: int | None = None
    epsilon: float | None = None
    interval: list | None = None
    seed: int = 0
    replicates: int = 0
    degenerate: bool = False

    @property
    def rejected(self) -> bool:
        return self.decision == "reject"

    def flagged(self) -> list[bool]:
        """Buckets whose observed minimum lies below the barrier."""
        return [
            lm is not None and b is not None and lm < b for lm, b in zip(self.local_minima, self.barriers)
        ]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "TestReport":
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "TestReport":
        return cls.from_dict(json.loads(text))


def run_test(
    data: TwoSampleData, statistic: str, alpha: float = 0.05, config: TestConfig | None = None
) -> TestReport:
    """Compute the statistic, simulate its null law and decide at level ``alpha``.

    For the grid statistics the report also carries the per-decile barriers
    and the observed bucket minima of the corresponding B-plot.
    """
    config = config or TestConfig()
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    stat = get_statistic(statistic)
    grid = (config.grid or default_resolution(data.N)) if stat.uses_grid else None
    eps = _resolve_epsilon(config.epsilon, data.N) if stat.uses_epsilon else None
    interval = config.interval if stat.uses_grid else None

    value = compute_statistic(data, stat.id, grid=grid, epsilon=eps, interval=interval)
    null = simulate_null(
        stat.id,
        data.m,
        data.n,
        config.replicates,
        seed=config.seed,
        grid=grid,
        epsilon=eps,
        interval=interval,
        workers=config.workers,
        cache=config.cache,
    )
    q = critical_value(null, alpha)
    report = TestReport(
        statistic=stat.id,
        value=float(value),
        critical_value=q,
        p_value=p_value(null, value),
        alpha=alpha,
        decision="reject" if rejects(value, q, stat.tail) else "accept",
        tail=stat.tail,
        m=data.m,
        n=data.n,
        d=grid.d if grid else None,
        s=grid.s if grid else None,
        epsilon=eps,
        interval=list(interval) if interval else None,
        seed=config.seed,
        replicates=config.replicates,
        degenerate=null.is_degenerate,
    )
    if stat.uses_grid and config.with_barriers:
        report.barriers = barriers(
            stat.process,
            data.m,
            data.n,
            grid,
            alpha,
            config.replicates,
            config.seed,
            workers=config.workers,
            cache=config.cache,
        )
        report.local_minima = bucket_minima(evaluate(data, grid, stat.process))
    return report


def format_summary(reports: list[TestReport]) -> str:
    """Plain-text table of value, critical value, p-value and decision per statistic."""
    lines = [f"{'statistic':<10} {'value':>10} {'critical':>10} {'p-value':>9}  decision"]
    for r in reports:
        lines.append(
            f"{r.statistic:<10} {r.value:>10.3f} {r.critical_value:>10.3f} {r.p_value:>9.4f}  {r.decision}"
        )
    if reports:
        r = reports[0]
        d = r.d if r.d is not None else "-"
        lines.append(f"m={r.m} n={r.n} D(N)={d} alpha={r.alpha} R={r.replicates} seed={r.seed}")
    return "\n".join(lines)

