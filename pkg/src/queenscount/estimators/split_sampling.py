"""Split sampling: a single chain weighted by a discrete schedule over energy levels.

Level t is the sublevel set ``{S <= m_t}`` with ``m_0`` vacuous.  A state's
weight is ``Omega`` at the deepest level it satisfies.  Phase 1 finds the
thresholds; phase 2 re-estimates every ``Z_t`` by importance weighting the
visits with ``1 / Omega``.
"""
from __future__ import annotations

import math

import numpy as np

from .. import _kernels as K
from ..board import BoardSpec, Embedding, energy, random_placement, state_space_size
from ..chains import has_moves, move_code
from ..errors import BudgetExhausted, StallError
from ..rng import as_rng
from .types import Estimate

REBALANCE = ("visits", "flat")


def level_map(thresholds, max_energy: int) -> np.ndarray:
    """Energy -> deepest level index whose threshold admits it."""
    out = np.zeros(max_energy + 1, dtype=np.int64)
    for t, m in enumerate(thresholds):
        out[: m + 1] = t
    return out


def boost_profile(T: int, boost: float, top_beta: float | None = None) -> np.ndarray:
    """Additive log-weight per level: ``boost * t``, with the optional top-level variant.

    With ``top_beta`` the deepest level gets
    ``log(top_beta * (e^(boost*T) - 1) / (e^boost - 1))`` instead.
    """
    prof = boost * np.arange(T + 1, dtype=np.float64)
    if top_beta is not None and T >= 1:
        geo = T if boost == 0 else math.expm1(boost * T) / math.expm1(boost)
        prof[T] = math.log(top_beta * geo)
    return prof


def _find_levels(p, e, spec, code, rho, t_max, n_level, boost, top_beta, rng, max_steps):
    thresholds = [spec.max_energy]
    log_z = [0.0]
    used = 0
    free = spec.free_rows
    chunk = max(4 * n_level, 4096)
    while len(thresholds) - 1 < t_max:
        T = len(thresholds)
        lmap = level_map(thresholds, spec.max_energy)
        table = (boost_profile(T - 1, boost, top_beta) - np.array(log_z))[lmap]
        seen = []
        count = 0
        while count < n_level:
            if used >= max_steps:
                raise StallError(f"level {T - 1} visited only {count} times", level=T - 1)
            rand = rng.random((chunk, 3))
            trace = np.empty(chunk, dtype=np.int64)
            e, _ = K.run_single(p.x, p.cols, p.diag, p.anti, e, free, code, table, rand, trace)
            used += chunk
            top = trace[lmap[trace] == T - 1]
            seen.append(top)
            count += top.size
        vals = np.sort(np.concatenate(seen))[:n_level]
        m = int(vals[max(1, math.ceil(rho * n_level)) - 1])
        forced = m >= thresholds[-1]
        if forced:
            m = thresholds[-1] - 1
        m = max(m, 0)
        thresholds.append(m)
        log_z.append(T * math.log(rho))
        if m == 0:
            break
    return thresholds, log_z, e, used


def split_sampling_count(spec: BoardSpec, rho: float = 0.5, t_max: int = 50, n_level: int = 1000,
                         boost: float = 0.0, seed=0, n_iter: int = 400_000, nu_init: float = 10.0,
                         rebalance: str = "visits", top_beta: float | None = None, fh_tolerance: float = 0.05,
                         fh_gain: float = 1.0, batches: int = 20, move_set=None,
                         max_level_steps: int = 50_000_000, budget: int | None = None) -> Estimate:
    """Estimate the solution count as Z at the level with threshold 0.

    ``rebalance="visits"`` refreshes ``Omega_t = e^(boost*t) / Z_t`` after every
    draw.  ``rebalance="flat"`` instead nudges ``log Omega`` once per batch by
    ``-gain/k * (occupancy - 1/(T+1))`` and reports whether the flat-histogram
    test ``max |occupancy - 1/(T+1)| < fh_tolerance`` was met.  A ``budget``
    caps both phases together; phase 2 gets what level finding leaves.
    """
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    if t_max < 1:
        raise ValueError("t_max must be at least 1")
    if rebalance not in REBALANCE:
        raise ValueError(f"rebalance must be one of {REBALANCE}")
    if spec.embedding is Embedding.BINARY:
        raise TypeError("split sampling runs on the permutation or row-wise embedding")
    rng = as_rng(seed, "splitsamp")
    size = state_space_size(spec)
    code = move_code(spec, move_set)
    p = random_placement(spec, rng)
    e = energy(p)
    if not has_moves(spec, code):
        raise StallError("no legal moves", level=0)

    limit = max_level_steps if budget is None else min(max_level_steps, budget)
    thresholds, log_z, e, used = _find_levels(p, e, spec, code, rho, t_max, n_level, boost, top_beta,
                                              rng, limit)
    if budget is not None:
        if used >= budget:
            raise BudgetExhausted(f"budget {budget} spent finding levels", used)
        n_iter = min(n_iter, budget - used)
    if thresholds[-1] != 0:
        raise StallError(f"threshold 0 not reached within {t_max} levels", level=len(thresholds) - 1)
    T = len(thresholds) - 1
    initial_log_z = list(log_z)
    lmap = level_map(thresholds, spec.max_energy)
    prof = boost_profile(T, boost, top_beta)
    log_omega = prof - np.array(log_z)
    nu = nu_init * np.exp(np.array(log_z))
    occupancy = np.zeros(T + 1, dtype=np.int64)
    batch_len = max(1, n_iter // batches)
    batch_sums = np.zeros((batches, T + 1))
    free = spec.free_rows
    phi = 1.0 / (T + 1)
    fh_met = False
    fh_dev = None
    done = 0
    k = 0
    while done < n_iter:
        m = min(batch_len, n_iter - done)
        rand = rng.random((m, 3))
        occ = np.zeros(T + 1, dtype=np.int64)
        e = K.split_sampling_run(p.x, p.cols, p.diag, p.anti, e, free, code, lmap, log_omega, nu, prof,
                                 rebalance == "visits", occ, batch_sums, batch_len, done, rand)
        occupancy += occ
        done += m
        k += 1
        if rebalance == "flat":
            mu = occ / m
            fh_dev = float(np.max(np.abs(mu - phi)))
            fh_met = fh_met or fh_dev < fh_tolerance
            log_omega -= fh_gain / k * (mu - phi)
    used += done

    log_zt = float(np.log(nu[T] / nu[0]))
    good = (batch_sums[:, T] > 0) & (batch_sums[:, 0] > 0)
    if good.sum() >= 2:
        per = np.log(batch_sums[good, T] / batch_sums[good, 0])
        stderr = float(np.std(per, ddof=1) / math.sqrt(good.sum()))
    else:
        stderr = math.inf
    occ_frac = occupancy / occupancy.sum()
    diag = {
        "thresholds": [int(m) for m in thresholds],
        "initial_log_z": initial_log_z,
        "log_z": [float(v) for v in np.log(nu / nu[0])],
        "occupancy": [float(v) for v in occ_frac],
        "mean_level": float(np.dot(occ_frac, np.arange(T + 1))),
        "rebalance": rebalance,
        "boost": boost,
        "phase2_steps": int(done),
        "state_space_size": size,
    }
    if rebalance == "flat":
        diag["flat_histogram_met"] = bool(fh_met)
        diag["flat_histogram_deviation"] = fh_dev
    return Estimate("splitsamp", spec.n, spec.embedding.value, log_zt + math.log(size), stderr, used, diag)


def check_flat(occupancy, target, tolerance: float) -> bool:
    """Flat-histogram test ``max |occupancy - target| < tolerance``."""
    occ = np.asarray(occupancy, dtype=np.float64)
    occ = occ / occ.sum()
    return bool(np.max(np.abs(occ - np.asarray(target))) < tolerance)

