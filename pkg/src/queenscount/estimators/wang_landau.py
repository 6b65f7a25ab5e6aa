"""Wang-Landau estimation of the density of states over energy levels."""
from __future__ import annotations

import math

import numpy as np

from .. import _kernels as K
from ..board import BoardSpec, Embedding, energy, random_placement, state_space_size
from ..chains import has_moves, move_code
from ..errors import BudgetExhausted, ConvergenceError
from ..rng import as_rng
from .types import DensityOfStates, Estimate

CHUNK = 1 << 20


def wang_landau_count(spec: BoardSpec, flatness_c: float = 0.8, f_init: float = 1.0, f_final: float = 1e-8,
                      seed=0, check_every: int = 1_000_000, max_steps: int = 2_000_000_000,
                      production_steps: int = 2_000_000, production_batches: int = 20,
                      move_set=None, budget: int | None = None) -> tuple:
    """Run Wang-Landau until the log modification factor drops below ``f_final``.

    ``f_init`` and ``f_final`` are log-modification factors (ln f), halved at
    every flat histogram.  Levels never visited are left out of the flatness
    test and the normalization.  A fixed-weight production run afterwards
    measures how far the final weights are from flat; that residual and its
    batch spread give ``stderr_log``.

    Returns ``(Estimate, DensityOfStates)`` with the density normalized to the
    state-space size.  A ``budget`` caps the adaptive and production steps
    together.
    """
    if spec.embedding is not Embedding.PERMUTATION:
        raise TypeError("Wang-Landau runs on the permutation embedding")
    if not 0 < flatness_c < 1:
        raise ValueError("flatness criterion must lie in (0, 1)")
    if not f_init > f_final > 0:
        raise ValueError("need f_init > f_final > 0")
    if budget is not None:
        max_steps = min(max_steps, budget - production_steps)
        if max_steps <= 0:
            raise BudgetExhausted(f"budget {budget} does not cover the production run", 0)
    rng = as_rng(seed, "wanglandau")
    size = state_space_size(spec)
    levels = spec.max_energy + 1
    code = move_code(spec, move_set)
    p = random_placement(spec, rng)
    e = energy(p)
    log_n = np.zeros(levels)
    hist = np.zeros(levels, dtype=np.int64)
    visited = np.zeros(levels, dtype=np.bool_)
    ln_f = float(f_init)
    used = 0
    stages = 0
    if not has_moves(spec, code):
        visited[e] = True
    else:
        while ln_f >= f_final:
            if used >= max_steps:
                raise ConvergenceError(f"histogram not flat after {used} steps (ln f = {ln_f:.3g})")
            k = min(CHUNK, max_steps - used)
            rand = rng.random((k, 3))
            e, ln_f, done, st = K.wang_landau_run(p.x, p.cols, p.diag, p.anti, e, spec.free_rows, code,
                                                  log_n, hist, visited, ln_f, f_final, flatness_c,
                                                  check_every, rand)
            used += int(done)
            stages += int(st)
    raw = DensityOfStates(np.where(visited, log_n, -np.inf), hist.copy())
    dos = raw.normalized(size)

    residual, spread = 0.0, 0.0
    if has_moves(spec, code) and production_steps > 0:
        residual, spread = _production_check(p, e, spec, code, dos, size, production_steps,
                                             production_batches, rng)
        used += production_steps
    stderr = math.sqrt(residual ** 2 + spread ** 2)
    diag = {
        "stages": stages,
        "steps": used,
        "ln_f_final": ln_f,
        "flatness": flatness_c,
        "visited_levels": int(visited.sum()),
        "production_residual": residual,
        "production_spread": spread,
        "dos": dos.to_dict(),
        "state_space_size": size,
    }
    log0 = float(dos.log_n[0])
    return Estimate("wanglandau", spec.n, spec.embedding.value, log0,
                    stderr if math.isfinite(log0) else math.inf, used, diag), dos


def _production_check(p, e, spec, code, dos, size, steps, batches, rng):
    """Reweighted log N(0) from a fixed-weight run, relative to the WL value."""
    table = np.where(np.isfinite(dos.log_n), -dos.log_n, -np.inf)
    per = max(1, steps // batches)
    hists = np.zeros((batches, table.shape[0]))
    trace = np.empty(per, dtype=np.int64)
    for b in range(batches):
        rand = rng.random((per, 3))
        e, _ = K.run_single(p.x, p.cols, p.diag, p.anti, e, spec.free_rows, code, table, rand, trace)
        hists[b] = np.bincount(trace, minlength=table.shape[0])

    def shifted(h):
        with np.errstate(divide="ignore"):
            lg = np.where(h > 0, dos.log_n + np.log(np.maximum(h, 1)), -np.inf)
        if not np.isfinite(lg[0]):
            return None
        return DensityOfStates(lg).normalized(size).log_n[0] - dos.log_n[0]

    pooled = shifted(hists.sum(axis=0))
    per_batch = [v for v in (shifted(h) for h in hists) if v is not None]
    if pooled is None or len(per_batch) < 2:
        return math.inf, math.inf
    return float(pooled), float(np.std(per_batch, ddof=1) / math.sqrt(len(per_batch)))
