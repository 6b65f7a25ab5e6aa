"""Adaptive multilevel splitting over nested energy sublevel sets {S <= m}.

Fixed-effort variant: every level holds N particles.  The next threshold is
the energy of the ceil(rho*N)-th lowest particle; the realized fraction at
or below it is the level ratio.  Survivors are cloned uniformly back to N
and decorrelated with threshold-kernel sweeps.
"""
from __future__ import annotations

import math

import numpy as np

from ..board import BoardSpec, Embedding, Population, random_columns, state_space_size
from ..chains import log_weight_table, Threshold, move_code, mutate_population, has_moves
from ..errors import BudgetExhausted
from ..rng import as_rng
from .types import Estimate, LevelSchedule, product_variance


def level_ratio(energies: np.ndarray, threshold: int) -> float:
    """Fraction of the population at or below ``threshold``."""
    return float(np.mean(np.asarray(energies) <= threshold))


def next_threshold(energies: np.ndarray, rho: float, previous: int | None) -> tuple:
    """Empirical rho-quantile threshold, forced one below ``previous`` on a tie stall.

    Returns ``(threshold, forced)``.
    """
    e = np.sort(np.asarray(energies))
    k = max(1, math.ceil(rho * e.size))
    m = int(e[k - 1])
    if previous is not None and m >= previous:
        return previous - 1, True
    return m, False


def clustered_ratio_se(energies: np.ndarray, parents: np.ndarray | None, threshold: int) -> float:
    """Standard error of a level ratio, treating clones of one parent as a cluster.

    Independent draws (``parents is None``) use the binomial formula.
    """
    y = (np.asarray(energies) <= threshold).astype(np.float64)
    N = y.size
    r = y.mean()
    if parents is None:
        return math.sqrt(r * (1 - r) / N)
    _, inv = np.unique(parents, return_inverse=True)
    G = inv.max() + 1
    if G < 2:
        return math.sqrt(r * (1 - r) / N)
    sums = np.bincount(inv, weights=y, minlength=G)
    sizes = np.bincount(inv, minlength=G)
    resid = sums - r * sizes
    return math.sqrt(G / (G - 1) * float(np.sum(resid ** 2))) / N


def splitting_count(spec: BoardSpec, n_per_level: int = 1000, rho: float = 0.3, burn_in: int = 10,
                    seed=0, budget: int | None = None, thresholds=None, move_set=None,
                    max_levels: int = 1000) -> tuple:
    """Estimate the solution count by a product of conditional level ratios.

    ``burn_in`` is in sweeps; one sweep is one proposal per free row.  Pass
    ``thresholds`` to use a fixed decreasing schedule instead of the adaptive
    quantiles.  Returns ``(Estimate, LevelSchedule)``.
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if n_per_level < 10:
        raise ValueError("need at least 10 particles per level")
    if spec.embedding is Embedding.BINARY:
        raise TypeError("splitting runs on the permutation or row-wise embedding")
    rng = as_rng(seed, "split")
    N = int(n_per_level)
    size = state_space_size(spec)
    code = move_code(spec, move_set)
    sweep = max(1, int(spec.free_rows.size))

    pop = Population(spec, random_columns(spec, N, rng))
    used = N
    parents = None
    sched = LevelSchedule()
    stats = []
    fixed = list(thresholds) if thresholds is not None else None
    previous = None
    zero_hit = False

    while True:
        if fixed is not None:
            if not fixed:
                break
            m, forced = int(fixed.pop(0)), False
        else:
            m, forced = next_threshold(pop.E, rho, previous)
            m = max(m, 0)
        r = level_ratio(pop.E, m)
        se = clustered_ratio_se(pop.E, parents, m)
        sched.thresholds.append(m)
        sched.ratios.append(r)
        sched.cv.append(se / r if r > 0 else math.inf)
        sched.forced.append(forced)
        stats.append((r, se))
        if r == 0:
            zero_hit = True
            break
        if m == 0 and fixed is None:
            break
        if len(sched.thresholds) >= max_levels:
            break
        survivors = np.flatnonzero(pop.E <= m)
        pick = rng.integers(0, survivors.size, size=N)
        parents = survivors[pick]
        pop = pop.take(parents)
        steps = burn_in * sweep
        if has_moves(spec, code) and steps > 0:
            if budget is not None and used + steps * N > budget:
                raise BudgetExhausted(f"budget {budget} exhausted at level {len(sched.thresholds)}", used)
            used += mutate_population(pop, log_weight_table(Threshold(m), spec.max_energy), steps, rng,
                                      move_set)
        previous = m

    diag = {"levels": sched.to_dict(), "particles": N, "burn_in": burn_in, "rho": rho,
            "state_space_size": size}
    if zero_hit:
        diag["zero_hits"] = True
        diag["stalled_level"] = len(sched.thresholds) - 1
        return Estimate("split", spec.n, spec.embedding.value, -math.inf, math.inf, used, diag), sched
    rel_mse = product_variance(stats)
    log_z = sched.log_product
    return (Estimate("split", spec.n, spec.embedding.value, log_z + math.log(size),
                     math.sqrt(math.log1p(rel_mse)), used, diag), sched)
