"""Nested sampling with likelihood L(x) = exp(-beta * S(x)).

Energies are integers, so every live point also carries a uniform label and
points are ranked by (S, -label).  Ties then have probability zero, each
iteration removes exactly one point, and the prior mass after t removals is
exp(-t / N) as in the continuous case.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from .. import _kernels as K
from ..board import BoardSpec, Embedding, Population, random_columns, state_space_size
from ..chains import has_moves, move_code
from ..errors import BudgetExhausted, StallError
from ..rng import as_rng
from .types import Estimate

MODES = ("rare_event", "evidence")


def nested_sampling_count(spec: BoardSpec, n_live: int = 500, mode: str = "rare_event", beta: float = 1.0,
                          sweeps: int = 20, seed=0, budget: int | None = None, move_set=None,
                          max_iterations: int | None = None) -> Estimate:
    """Shrink the live set onto {S = 0}; the remaining prior mass is the hit probability.

    ``log p = -t / N`` after t removals, with standard error sqrt(t) / N.  In
    ``evidence`` mode the diagnostics also carry the quadrature estimate of
    ``E_uniform[exp(-beta * S)]`` with Skilling's sqrt(H / N) log-error.
    """
    if n_live < 2:
        raise ValueError("need at least two live points")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if spec.embedding is Embedding.BINARY:
        raise TypeError("nested sampling runs on the permutation or row-wise embedding")
    rng = as_rng(seed, "nested")
    N = int(n_live)
    size = state_space_size(spec)
    code = move_code(spec, move_set)
    movable = has_moves(spec, code)
    free = spec.free_rows
    steps = sweeps * max(1, int(free.size))
    if max_iterations is None:
        max_iterations = 200 * N * max(1, spec.n)

    pop = Population(spec, random_columns(spec, N, rng))
    labels = rng.random(N)
    used = N
    t = 0
    accepted = 0
    terms = []
    term_log_l = []
    while True:
        worst_e = int(pop.E.max())
        if worst_e == 0:
            break
        if t >= max_iterations:
            raise StallError(f"no convergence after {t} replacements", level=worst_e)
        cand = np.flatnonzero(pop.E == worst_e)
        w = int(cand[np.argmin(labels[cand])])
        u_star = float(labels[w])
        # prior mass X_t = exp(-t/N); the removed point carries X_t - X_{t+1}
        terms.append(-beta * worst_e - t / N + math.log1p(-math.exp(-1.0 / N)))
        term_log_l.append(-beta * worst_e)
        t += 1
        if not movable:
            raise StallError("no legal moves to refill the live set", level=worst_e)
        j = int(rng.integers(0, N - 1))
        if j >= w:
            j += 1
        for name in ("X", "cols", "diag", "anti"):
            getattr(pop, name)[w] = getattr(pop, name)[j]
        if budget is not None and used + steps > budget:
            raise BudgetExhausted(f"budget {budget} exhausted after {t} replacements", used)
        rand = rng.random((steps, 3))
        e, lab, acc = K.nested_refill(pop.X[w], pop.cols[w], pop.diag[w], pop.anti[w], int(pop.E[j]),
                                      float(labels[j]), free, code, worst_e, u_star, rand)
        pop.E[w] = e
        labels[w] = lab
        used += steps
        accepted += acc

    log_p = -t / N
    diag = {
        "mode": mode,
        "n_live": N,
        "removals": t,
        "log_p": log_p,
        "sqrt_t_over_n": math.sqrt(t) / N,
        "acceptance": accepted / max(1, t * steps),
        "state_space_size": size,
    }
    if mode == "evidence":
        all_terms = np.array(terms + [log_p + float(logsumexp(-beta * pop.E)) - math.log(N)])
        log_z = float(logsumexp(all_terms))
        log_l = np.array(term_log_l + [0.0])
        p = np.exp(all_terms - log_z)
        h = float(np.sum(p * (log_l - log_z)))
        diag["log_evidence"] = log_z
        diag["evidence"] = math.exp(log_z)
        diag["evidence_stderr_log"] = math.sqrt(max(h, 0.0) / N)
        diag["information"] = h
    return Estimate("nested", spec.n, spec.embedding.value, log_p + math.log(size),
                    math.sqrt(t) / N, used, diag)
