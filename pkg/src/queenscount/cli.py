"""Command-line entry point.

Exit status: 0 on success, 2 on a usage error, 1 when an estimator fails.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

from .board import BoardSpec, Embedding, format_fixed_cells, parse_fixed_cells
from .errors import InfeasibleSpec, QueensError
from .rng import DEFAULT_SEED

THREADS_ENV = "QUEENSCOUNT_THREADS"


class UsageError(Exception):
    pass


def _int(text: str) -> int:
    """Integer that also accepts forms like 1e7."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v) or v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def _positive(text: str) -> int:
    v = _int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return v


def _add_common(p: argparse.ArgumentParser, default_embedding: str, embeddings):
    p.add_argument("--n", type=_int, required=True, help="board size")
    p.add_argument("--embedding", choices=embeddings, default=default_embedding)
    p.add_argument("--seed", type=_int, default=DEFAULT_SEED)
    p.add_argument("--budget", type=_positive, default=None, help="energy evaluations per replica")
    p.add_argument("--replicas", type=_positive, default=1)
    p.add_argument("--threads", type=_positive, default=None,
                   help=f"worker threads (default ${THREADS_ENV} or 1); never changes the output")
    p.add_argument("--fixed", default=None, help='fixed queens as "row,col;row,col" (1-based)')
    _add_output(p)


def _add_output(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", dest="output", action="store_const", const="json", help="JSON output (default)")
    g.add_argument("--human", dest="output", action="store_const", const="human", help="fixed-width table")
    p.set_defaults(output="json")
    p.add_argument("--timing", action="store_true", help="report wall time as elapsed_ms")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="queenscount", description="Count N-queens solutions.")
    sub = parser.add_subparsers(dest="command", required=True)
    perm_row = ["permutation", "rowwise"]

    p = sub.add_parser("exact", help="backtracking count")
    p.add_argument("--n", type=_int, required=True)
    p.add_argument("--fixed", default=None)
    p.add_argument("--workers", type=_positive, default=1)
    _add_output(p)

    p = sub.add_parser("completion", help="exact count of completions of fixed queens")
    p.add_argument("--n", type=_int, required=True)
    p.add_argument("--fixed", required=True)
    p.add_argument("--workers", type=_positive, default=1)
    _add_output(p)

    p = sub.add_parser("naive", help="plain Monte Carlo")
    _add_common(p, "permutation", [e.value for e in Embedding])
    p.add_argument("--samples", type=_positive, default=1_000_000)

    p = sub.add_parser("split", help="adaptive multilevel splitting")
    _add_common(p, "permutation", perm_row)
    p.add_argument("--particles", type=_int, default=1000)
    p.add_argument("--rho", type=float, default=0.3)
    p.add_argument("--burn-in", type=_int, default=10)
    p.add_argument("--move-set", choices=["uniform_swap", "adjacent_swap", "row_reassign"], default=None)

    p = sub.add_parser("ce", help="cross-entropy importance sampling")
    _add_common(p, "rowwise", ["rowwise"])
    p.add_argument("--samples", type=_positive, default=5000)
    p.add_argument("--elite-rho", type=float, default=0.1)
    p.add_argument("--smoothing", type=float, default=0.3)
    p.add_argument("--iterations", type=_int, default=10)
    p.add_argument("--final-samples", type=_positive, default=None)
    p.add_argument("--weighted", action="store_true", help="likelihood-ratio weighted elite update")

    p = sub.add_parser("nested", help="nested sampling")
    _add_common(p, "permutation", perm_row)
    p.add_argument("--live", type=_int, default=500)
    p.add_argument("--mode", choices=["rare_event", "evidence"], default="rare_event")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--sweeps", type=_int, default=20)
    p.add_argument("--move-set", choices=["uniform_swap", "adjacent_swap", "row_reassign"], default=None)

    p = sub.add_parser("splitsamp", help="split sampling")
    _add_common(p, "permutation", perm_row)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--t-max", type=_int, default=50)
    p.add_argument("--level-visits", type=_int, default=1000)
    p.add_argument("--boost", type=float, default=0.0)
    p.add_argument("--iterations", type=_int, default=400_000)
    p.add_argument("--rebalance", choices=["visits", "flat"], default="visits")
    p.add_argument("--top-beta", type=float, default=None)
    p.add_argument("--fh-tolerance", type=float, default=0.05)
    p.add_argument("--fh-gain", type=float, default=1.0)
    p.add_argument("--move-set", choices=["uniform_swap", "adjacent_swap", "row_reassign"], default=None)

    p = sub.add_parser("wanglandau", help="Wang-Landau density of states")
    _add_common(p, "permutation", ["permutation"])
    p.add_argument("--flatness", type=float, default=0.8)
    p.add_argument("--f-init", type=float, default=1.0, help="initial ln f")
    p.add_argument("--f-final", type=float, default=1e-8, help="final ln f")
    p.add_argument("--check-every", type=_positive, default=1_000_000)
    p.add_argument("--production-steps", type=_int, default=2_000_000)

    p = sub.add_parser("probe", help="ordered-draw quadrature error against N")
    p.add_argument("--estimator", choices=["riemann", "measure"], default="riemann")
    p.add_argument("--integrand", choices=["const", "linear", "quadratic", "exp"], default="quadratic")
    p.add_argument("--sizes", default=None, help="comma-separated sample sizes (default 16,32,...,4096)")
    p.add_argument("--repeats", type=_positive, default=50)
    p.add_argument("--seed", type=_int, default=DEFAULT_SEED)
    _add_output(p)

    p = sub.add_parser("bench", help="run a JSON-configured sweep against the exact oracle")
    p.add_argument("--config", required=True, help="JSON file")
    p.add_argument("--csv", default=None, help="also write the flat CSV here")
    p.add_argument("--threads", type=_positive, default=None)
    _add_output(p)
    return parser


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            v = int(env)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be a positive integer") from None
        if v < 1:
            raise UsageError(f"{THREADS_ENV} must be a positive integer")
        return v
    return 1


def _spec(args, embedding=None) -> BoardSpec:
    if args.n < 1:
        raise UsageError("--n must be at least 1")
    try:
        cells = parse_fixed_cells(args.fixed)
        return BoardSpec(args.n, embedding or getattr(args, "embedding", "permutation"), cells)
    except (ValueError, InfeasibleSpec) as exc:
        raise UsageError(str(exc)) from None


def _method_params(args) -> dict:
    c = args.command
    if c == "naive":
        return {"N": args.samples}
    if c == "split":
        return {"n_per_level": args.particles, "rho": args.rho, "burn_in": args.burn_in, "move_set": args.move_set}
    if c == "ce":
        return {"N": args.samples, "elite_rho": args.elite_rho, "smoothing": args.smoothing,
                "iterations": args.iterations, "final_samples": args.final_samples, "weighted": args.weighted}
    if c == "nested":
        return {"n_live": args.live, "mode": args.mode, "beta": args.beta, "sweeps": args.sweeps,
                "move_set": args.move_set}
    if c == "splitsamp":
        return {"rho": args.rho, "t_max": args.t_max, "n_level": args.level_visits, "boost": args.boost,
                "n_iter": args.iterations, "rebalance": args.rebalance, "top_beta": args.top_beta,
                "fh_tolerance": args.fh_tolerance, "fh_gain": args.fh_gain, "move_set": args.move_set}
    if c == "wanglandau":
        return {"flatness_c": args.flatness, "f_init": args.f_init, "f_final": args.f_final,
                "check_every": args.check_every, "production_steps": args.production_steps}
    raise AssertionError(c)


def _check_ranges(args):
    c = args.command
    checks = []
    if c in ("split", "splitsamp"):
        checks.append((0 < args.rho < 1, "--rho must lie in (0, 1)"))
    if c == "split":
        checks.append((args.particles >= 10, "--particles must be at least 10"))
        checks.append((args.burn_in >= 0, "--burn-in must be nonnegative"))
    if c == "ce":
        checks.append((0 < args.elite_rho <= 1, "--elite-rho must lie in (0, 1]"))
        checks.append((0 <= args.smoothing <= 1, "--smoothing must lie in [0, 1]"))
        checks.append((args.iterations >= 0, "--iterations must be nonnegative"))
    if c == "nested":
        checks.append((args.live >= 2, "--live must be at least 2"))
        checks.append((args.sweeps >= 1, "--sweeps must be at least 1"))
    if c == "splitsamp":
        checks.append((args.t_max >= 1, "--t-max must be at least 1"))
        checks.append((args.level_visits >= 1, "--level-visits must be at least 1"))
        checks.append((args.iterations >= 1, "--iterations must be at least 1"))
    if c == "wanglandau":
        checks.append((0 < args.flatness < 1, "--flatness must lie in (0, 1)"))
        checks.append((args.f_init > args.f_final > 0, "need --f-init > --f-final > 0"))
        checks.append((args.production_steps >= 0, "--production-steps must be nonnegative"))
    for ok, msg in checks:
        if not ok:
            raise UsageError(msg)


def _elapsed(args, t0):
    return (time.perf_counter() - t0) * 1000 if args.timing else None


def cmd_exact(args) -> dict:
    from .exact import count_exact
    spec = _spec(args, "permutation")
    if args.command == "completion" and not spec.fixed_cells:
        raise UsageError("completion needs at least one fixed cell")
    t0 = time.perf_counter()
    r = count_exact(spec.n, spec.fixed_cells, workers=args.workers)
    return {"n": r.n, "count": r.count, "fixed": format_fixed_cells(spec.fixed_cells),
            "elapsed_ms": _elapsed(args, t0)}


def cmd_estimate(args) -> dict:
    from .harness import estimate
    _check_ranges(args)
    spec = _spec(args)
    threads = _threads(args)
    t0 = time.perf_counter()
    e = estimate(args.command, spec, args.seed, args.budget, args.replicas, threads, **_method_params(args))
    out = e.to_dict()
    out.update(seed=args.seed, replicas=args.replicas, fixed=format_fixed_cells(spec.fixed_cells),
               elapsed_ms=_elapsed(args, t0))
    return out


def cmd_probe(args) -> dict:
    from .quantile import DEFAULT_SIZES, riemann_probe
    if args.sizes is None:
        sizes = DEFAULT_SIZES
    else:
        try:
            sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
        except ValueError:
            raise UsageError("--sizes must be comma-separated integers") from None
        if not sizes or min(sizes) < 2:
            raise UsageError("--sizes must be integers >= 2")
    t0 = time.perf_counter()
    out = riemann_probe(args.integrand, sizes, args.repeats, args.seed, args.estimator)
    out["pairs"] = [[N, err] for N, err in zip(out["sizes"], out["mse"])]
    out["elapsed_ms"] = _elapsed(args, t0)
    return out


def cmd_bench(args) -> dict:
    from .harness import ExperimentConfig, run_experiment
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise UsageError("config must be a JSON object")
    if args.threads is not None or os.environ.get(THREADS_ENV):
        raw["threads"] = _threads(args)
    raw.setdefault("timing", bool(args.timing))
    try:
        config = ExperimentConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config: {exc}") from None
    report = run_experiment(config)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(report.to_csv())
    if config.output:
        with open(config.output, "w") as fh:
            fh.write(report.to_json() + "\n")
    return report.to_dict()


COMMANDS = {"exact": cmd_exact, "completion": cmd_exact, "probe": cmd_probe, "bench": cmd_bench}


def render_human(obj: dict) -> str:
    """Fixed-width table: one row per record for bench reports, else the top-level scalars."""
    from .harness import CSV_FIELDS, _plain
    flat = _plain(obj)
    if "records" in flat:
        rows = [[str("-" if r.get(k) is None else r.get(k)) for k in CSV_FIELDS] for r in flat["records"]]
        widths = [max([len(k)] + [len(row[i]) for row in rows]) for i, k in enumerate(CSV_FIELDS)]
        lines = ["  ".join(k.ljust(w) for k, w in zip(CSV_FIELDS, widths))]
        lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in rows]
        return "\n".join(line.rstrip() for line in lines)
    rows = [(k, v) for k, v in sorted(flat.items()) if not isinstance(v, (dict, list))]
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k:<{width}}  {'-' if v is None else v}" for k, v in rows)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        result = COMMANDS.get(args.command, cmd_estimate)(args)
    except UsageError as exc:
        print(f"queenscount: error: {exc}", file=sys.stderr)
        return 2
    except (QueensError, ValueError, TypeError) as exc:
        print(f"queenscount: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.output == "human":
        print(render_human(result))
    else:
        from .harness import canonical_json
        print(canonical_json(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
