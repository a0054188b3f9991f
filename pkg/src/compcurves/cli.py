"""Command-line front end.

Subcommands: ``test``, ``bplot``, ``curves``, ``nullsim`` and ``power``.
Exit status is 0 when every requested test accepts, 3 when at least one
rejects, 1 on usage errors and 2 on data errors. Simulated null laws are
cached in the directory named by ``COMPCURVES_CACHE`` when it is set.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import alternatives as alt
from .curves import mc_estimated_curves, theoretical_curves, write_curves_csv, cc_empirical, ccc_empirical
from .empirical import DataError, TiesPolicy, load_csv, load_two_files
from .grid import DyadicGrid, bucket_minima, default_resolution, evaluate_P, evaluate_U
from .montecarlo import NullCache, barriers, critical_value, critical_value_se, simulate_null
from .report import TestConfig, format_summary, run_test
from .statistics import STATISTICS, get_statistic
from .svg import write_bplot_svg

EXIT_ACCEPT = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_REJECT = 3

DEFAULT_STATS = ["u", "p", "ks", "auc"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _stat_list(values) -> list[str]:
    if values is None:
        return list(DEFAULT_STATS)
    out = []
    for v in values:
        for part in v.split(","):
            part = part.strip().lower()
            if part not in STATISTICS:
                raise UsageError(f"unknown statistic {part!r}; choose from {', '.join(STATISTICS)}")
            out.append(part)
    if not out:
        raise UsageError("no statistics requested")
    return out


def _add_data(p):
    g = p.add_argument_group("data")
    g.add_argument("--x", metavar="FILE", help="reference sample, one value per line")
    g.add_argument("--y", metavar="FILE", help="comparison sample, one value per line")
    g.add_argument("--csv", metavar="FILE", help="CSV with columns value,group (group x or y)")
    g.add_argument("--ties", choices=["reject", "jitter"], default="reject")


def _add_grid(p):
    p.add_argument("--grid", choices=["127", "largest", "ustar"], default="127", help="grid cap (default 127 points)")
    p.add_argument("--s", type=int, default=None, help="explicit resolution level, d = 2^(s+1) - 1")


def _add_common(p, runs_default=100_000, runs_help="null replicates R"):
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--runs", type=int, default=runs_default, help=runs_help)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", metavar="DIR", default=".")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="compcurves", description="Comparison-curve tests of H: F >= G.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("test", help="run tests on two samples")
    _add_data(t)
    _add_grid(t)
    _add_common(t)
    t.add_argument("--stat", action="append", help="statistic id, repeatable (default u,p,ks,auc)")
    t.add_argument("--eps", type=float, default=None, help="trimming for uc/index-cc/index-ccc")
    t.add_argument("--interval", type=float, nargs=2, metavar=("P1", "P2"), default=None)

    b = sub.add_parser("bplot", help="B-plot bars and barriers as CSV (and SVG)")
    _add_data(b)
    _add_grid(b)
    _add_common(b)
    b.add_argument("--svg", action="store_true", help="also write bplot_U.svg and bplot_P.svg")

    c = sub.add_parser("curves", help="theoretical and Monte Carlo comparison curves for a model pair")
    c.add_argument("--alt", default=None, help="model pair id A1..A9, or 'null' for F = G")
    _add_data(c)
    _add_grid(c)
    c.add_argument("--lambda", dest="lam", type=float, default=0.5, help="pooled weight m/N for CCC")
    c.add_argument("--m", type=int, default=None)
    c.add_argument("--n", type=int, default=None)
    c.add_argument("--mc-runs", type=int, default=0, help="Monte Carlo replicates for estimated curves")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", metavar="DIR", default=".")

    ns = sub.add_parser("nullsim", help="simulate and cache null distributions")
    ns.add_argument("--m", type=int, required=True)
    ns.add_argument("--n", type=int, required=True)
    ns.add_argument("--stat", action="append")
    _add_grid(ns)
    ns.add_argument("--alpha", type=float, action="append", help="level(s) to report, repeatable (default 0.05)")
    ns.add_argument("--runs", type=int, default=100_000)
    ns.add_argument("--seed", type=int, default=0)
    ns.add_argument("--workers", type=int, default=1)
    ns.add_argument("--eps", type=float, default=None)
    ns.add_argument("--interval", type=float, nargs=2, metavar=("P1", "P2"), default=None)
    ns.add_argument("--out", metavar="DIR", default=None, help="cache directory (default $COMPCURVES_CACHE or .)")

    pw = sub.add_parser("power", help="empirical power study over the model pairs")
    pw.add_argument("--alt", action="append", help="model pair id, repeatable (default all available)")
    pw.add_argument("--stat", action="append")
    pw.add_argument("--m", type=int, default=120)
    pw.add_argument("--n", type=int, default=120)
    _add_grid(pw)
    _add_common(pw, runs_default=5000, runs_help="Monte Carlo datasets per alternative")
    pw.add_argument("--null-runs", type=int, default=100_000, help="null replicates R for critical values")
    pw.add_argument("--eps", type=float, default=None)
    return parser


# -- helpers -------------------------------------------------------------------


def _load(args):
    ties = TiesPolicy(args.ties, seed=getattr(args, "seed", 0))
    if args.csv:
        if args.x or args.y:
            raise UsageError("use either --csv or --x/--y, not both")
        return load_csv(args.csv, ties)
    if not (args.x and args.y):
        raise UsageError("data input needs --x FILE --y FILE or --csv FILE")
    return load_two_files(args.x, args.y, ties)


def _grid(args, N: int) -> DyadicGrid:
    if args.s is not None:
        if args.s < 0:
            raise UsageError("--s must be nonnegative")
        return DyadicGrid(args.s)
    return default_resolution(N, cap=args.grid)


def _check_common(alpha, runs):
    if not 0 < alpha < 1:
        raise UsageError("--alpha must lie in (0, 1)")
    if runs < 100:
        raise UsageError("--runs must be at least 100")


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cache(path=None) -> NullCache | None:
    return NullCache(path) if path else NullCache.from_env()


# -- commands ------------------------------------------------------------------


def cmd_test(args) -> int:
    stats = _stat_list(args.stat)
    _check_common(args.alpha, args.runs)
    data = _load(args)
    grid = _grid(args, data.N)
    config = TestConfig(
        grid=grid,
        epsilon=args.eps,
        interval=tuple(args.interval) if args.interval else None,
        replicates=args.runs,
        seed=args.seed,
        workers=args.workers,
        cache=_cache(),
    )
    reports = [run_test(data, s, args.alpha, config) for s in stats]
    out = _outdir(args.out)
    payload = {"reports": [r.to_dict() for r in reports]}
    (out / "report.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    summary = format_summary(reports)
    (out / "summary.txt").write_text(summary + "\n", encoding="utf-8")
    print(summary)
    return EXIT_REJECT if any(r.rejected for r in reports) else EXIT_ACCEPT


def cmd_bplot(args) -> int:
    _check_common(args.alpha, args.runs)
    data = _load(args)
    grid = _grid(args, data.N)
    plots = {"U": evaluate_U(data, grid), "P": evaluate_P(data, grid)}
    cache = _cache()
    bars_lim = {
        k: barriers(k, data.m, data.n, grid, args.alpha, args.runs, args.seed, workers=args.workers, cache=cache)
        for k in plots
    }
    meta = {"m": data.m, "n": data.n, "d": grid.d, "s": grid.s, "alpha": args.alpha, "R": args.runs, "seed": args.seed}
    out = _outdir(args.out)
    buckets = grid.bucket_index()
    with (out / "bplot.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        w = csv.writer(fh)
        w.writerow(["j", "p", "bar_U", "bar_P", "bucket", "barrier_U", "barrier_P", "flag_U", "flag_P"])
        for i in range(grid.d):
            k = int(buckets[i])
            row = [int(grid.j[i]), repr(float(grid.points[i]))]
            row += [repr(float(plots["U"].bars[i])), repr(float(plots["P"].bars[i])), k]
            flags = []
            for name in ("U", "P"):
                b = bars_lim[name][k - 1]
                row.append("" if b is None else repr(b))
                flags.append(int(b is not None and plots[name].bars[i] < b))
            w.writerow(row + flags)
    lines = []
    for name, plot in plots.items():
        mins = bucket_minima(plot)
        lim = bars_lim[name]
        cells = []
        for lm, b in zip(mins, lim):
            if lm is None:
                cells.append("     -")
            else:
                cells.append(f"{lm:7.3f}{'*' if b is not None and lm < b else ' '}")
        lines.append(f"L({name},I_k) " + " ".join(cells))
        lines.append(f"l_{name}(I_k)  " + " ".join("     -  " if b is None else f"{b:7.3f} " for b in lim))
        if args.svg:
            write_bplot_svg(out / f"bplot_{name}.svg", plot, lim, meta)
    print("\n".join(lines))
    print(f"m={data.m} n={data.n} D(N)={grid.d} alpha={args.alpha} R={args.runs} seed={args.seed}")
    return EXIT_ACCEPT


def cmd_curves(args) -> int:
    out = _outdir(args.out)
    if args.alt is not None:
        spec = alt.null_model() if args.alt.lower() == "null" else alt.make_alternative(args.alt)
        grid = DyadicGrid(args.s) if args.s is not None else DyadicGrid(6)
        if not 0 < args.lam < 1:
            raise UsageError("--lambda must lie in (0, 1)")
        tc = theoretical_curves(spec.F, spec.G, args.lam, grid.points)
        cols = {"cc": tc.cc, "ccc": tc.ccc, "r": tc.r, "r1": tc.r1, "r2": tc.r2}
        meta = {"alt": spec.id, "lambda": args.lam, "d": grid.d, "s": grid.s, "seed": args.seed, "R": args.mc_runs}
        if args.mc_runs:
            m = args.m or 1000
            n = args.n or 1000
            cc_mc, ccc_mc = mc_estimated_curves(spec.F, spec.G, m, n, grid, args.mc_runs, seed=args.seed)
            cols.update(cc_mc=cc_mc, ccc_mc=ccc_mc)
            meta.update(m=m, n=n)
        write_curves_csv(out / "curves.csv", grid.points, cols, meta)
        print(f"wrote {out / 'curves.csv'} ({grid.d} rows)")
        return EXIT_ACCEPT
    data = _load(args)
    grid = _grid(args, data.N)
    cols = {"cc": np.atleast_1d(cc_empirical(data, grid.points)), "ccc": np.atleast_1d(ccc_empirical(data, grid.points))}
    meta = {"m": data.m, "n": data.n, "d": grid.d, "s": grid.s, "seed": args.seed, "R": 0}
    write_curves_csv(out / "curves.csv", grid.points, cols, meta)
    print(f"wrote {out / 'curves.csv'} ({grid.d} rows)")
    return EXIT_ACCEPT


def cmd_nullsim(args) -> int:
    stats = _stat_list(args.stat)
    alphas = args.alpha or [0.05]
    for a in alphas:
        _check_common(a, args.runs)
    grid = _grid(args, args.m + args.n)
    cache = _cache(args.out) or NullCache(".")
    header = f"{'statistic':<10}" + "".join(f"  q({a:g})  " for a in alphas) + "  se"
    print(header)
    for s in stats:
        stat = get_statistic(s)
        null = simulate_null(
            s,
            args.m,
            args.n,
            args.runs,
            seed=args.seed,
            grid=grid,
            epsilon=args.eps,
            interval=tuple(args.interval) if args.interval else None,
            workers=args.workers,
            cache=cache,
        )
        qs = "".join(f"{critical_value(null, a):>10.4f}" for a in alphas)
        print(f"{stat.id:<10}{qs}  {critical_value_se(null, alphas[0]):.4f}")
    print(f"m={args.m} n={args.n} D(N)={grid.d} R={args.runs} seed={args.seed} cache={cache.directory}")
    return EXIT_ACCEPT


def cmd_power(args) -> int:
    stats = _stat_list(args.stat)
    _check_common(args.alpha, args.null_runs)
    if args.runs < 1:
        raise UsageError("--runs must be positive")
    alts = args.alt or list(alt.AVAILABLE)
    grid = _grid(args, args.m + args.n)
    table = alt.power_study(
        stats,
        alts,
        m=args.m,
        n=args.n,
        grid=grid,
        alpha=args.alpha,
        runs=args.runs,
        seed=args.seed,
        null_replicates=args.null_runs,
        epsilon=args.eps,
        workers=args.workers,
        cache=_cache(),
    )
    out = _outdir(args.out)
    table.write_csv(out / "power.csv")
    print(table.format())
    print(f"m={args.m} n={args.n} D(N)={grid.d} alpha={args.alpha} runs={args.runs} R={args.null_runs} seed={args.seed}")
    return EXIT_ACCEPT


COMMANDS = {"test": cmd_test, "bplot": cmd_bplot, "curves": cmd_curves, "nullsim": cmd_nullsim, "power": cmd_power}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"compcurves: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        print(f"compcurves: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NotImplementedError as exc:
        print(f"compcurves: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"compcurves: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
