"""Independent replicas of one estimator, merged in replica order."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ..rng import make_rng
from .types import Estimate


def run_replicas(fn, module: str, replicas: int = 1, seed: int = 0, threads: int = 1) -> list:
    """Call ``fn(rng)`` once per replica with the generator for ``(seed, module, r)``.

    Results come back in replica order whatever the thread count, so merged
    output never depends on scheduling.
    """
    if replicas < 1:
        raise ValueError("need at least one replica")
    rngs = [make_rng(seed, module, replica=r) for r in range(replicas)]
    if threads <= 1 or replicas == 1:
        return [fn(g) for g in rngs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, rngs))


def merge_estimates(estimates: list) -> Estimate:
    """Average replica counts; the standard error pools the per-replica errors.

    A single replica is returned unchanged.
    """
    if len(estimates) == 1:
        return estimates[0]
    R = len(estimates)
    counts = np.array([e.count for e in estimates])
    var = np.array([(e.count * e.stderr_log) ** 2 if e.count > 0 else 0.0 for e in estimates])
    mean = float(counts.mean())
    head = estimates[0]
    per = [{"count": e.count, "log_count": e.log_count if e.count > 0 else None,
            "stderr_log": e.stderr_log, "budget_used": int(e.budget_used),
            "diagnostics": e.diagnostics} for e in estimates]
    diag = {"replicas": R, "per_replica": per,
            "spread_stderr_count": float(counts.std(ddof=1) / math.sqrt(R))}
    budget = int(sum(e.budget_used for e in estimates))
    if mean == 0:
        bounds = [e.upper_bound for e in estimates if e.upper_bound is not None]
        ub = float(np.mean(bounds)) / R if len(bounds) == R else None
        return Estimate(head.method, head.n, head.embedding, -math.inf, math.inf, budget, diag, ub)
    if any(not math.isfinite(e.stderr_log) for e in estimates if e.count > 0):
        se = math.inf
    else:
        se = math.sqrt(var.sum()) / R / mean
    return Estimate(head.method, head.n, head.embedding, math.log(mean), se, budget, diag)
