"""Cross-entropy importance sampling over independent per-row column choices."""
from __future__ import annotations

import math

import numpy as np

from ..board import BoardSpec, Embedding, batch_energy, state_space_size
from ..errors import BudgetExhausted
from ..rng import as_rng
from .types import Estimate

FLOOR = 1e-6


def sample_rows(theta: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` placements, row i taking column c with probability theta[i, c]."""
    cum = np.cumsum(theta, axis=1)
    cum[:, -1] = 1.0
    u = rng.random((size, theta.shape[0]))
    return (u[:, :, None] >= cum[None, :, :]).sum(axis=2)


def ce_update(theta: np.ndarray, X: np.ndarray, weights: np.ndarray, smoothing: float) -> np.ndarray:
    """Weighted elite column frequencies per row, smoothed and floored."""
    n = theta.shape[0]
    freq = np.zeros_like(theta)
    for i in range(n):
        freq[i] = np.bincount(X[:, i], weights=weights, minlength=n)
    freq /= weights.sum()
    new = smoothing * freq + (1 - smoothing) * theta
    new = np.maximum(new, FLOOR)
    return new / new.sum(axis=1, keepdims=True)


def ce_count(spec: BoardSpec, N: int = 5000, elite_rho: float = 0.1, smoothing: float = 0.3,
             iterations: int = 10, seed=0, final_samples: int | None = None,
             weighted: bool = False, budget: int | None = None) -> Estimate:
    """Tune a product-of-categoricals sampler by cross-entropy, then importance sample.

    Each iteration keeps the ``elite_rho`` fraction with the lowest energy
    and refits every row's column distribution to the elite column
    frequencies.  ``weighted=True`` weights each elite draw by its likelihood
    ratio against the uniform sampler instead.  ``elite_rho = 1`` means no
    selection and leaves the sampler uniform.
    """
    if spec.embedding is not Embedding.ROWWISE:
        raise TypeError("the cross-entropy sampler is defined on the row-wise embedding")
    if not 0 < elite_rho <= 1:
        raise ValueError("elite fraction must lie in (0, 1]")
    if not 0 <= smoothing <= 1:
        raise ValueError("smoothing must lie in [0, 1]")
    if budget is not None and final_samples is None:
        final_samples = budget - (iterations if elite_rho < 1 else 0) * N
        if final_samples < 2:
            raise BudgetExhausted(f"budget {budget} leaves no room for the final pass", 0)
    rng = as_rng(seed, "ce")
    n = spec.n
    theta = np.full((n, n), 1.0 / n)
    for r, c in spec.pinned.items():
        theta[r] = 0.0
        theta[r, c] = 1.0
    free = spec.free_rows
    used = 0
    levels = []
    for _ in range(iterations if elite_rho < 1 else 0):
        X = sample_rows(theta, N, rng)
        S = batch_energy(X)
        used += N
        gamma = int(np.sort(S)[max(1, math.ceil(elite_rho * N)) - 1])
        elite = S <= gamma
        if weighted:
            llr = _free_llr(theta, X, free, n)
            w = np.where(elite, np.exp(llr - llr[elite].max()), 0.0)
        else:
            w = elite.astype(np.float64)
        sub = ce_update(theta[free], X[:, free], w, smoothing)
        theta[free] = sub
        levels.append({"gamma": gamma, "elite": int(elite.sum())})

    M = final_samples if final_samples is not None else 5 * N
    X = sample_rows(theta, M, rng)
    S = batch_energy(X)
    used += M
    w = np.where(S == 0, np.exp(_free_llr(theta, X, free, n)), 0.0)
    z = float(w.mean())
    size = state_space_size(spec)
    diag = {"iterations": levels, "final_samples": M, "hits": int((S == 0).sum()),
            "theta": theta.tolist(), "state_space_size": size}
    if z == 0:
        diag["zero_hits"] = True
        return Estimate("ce", n, spec.embedding.value, -math.inf, math.inf, used, diag)
    se = float(w.std(ddof=1) / math.sqrt(M)) if M > 1 else math.inf
    diag["stderr_count"] = se * size
    ess = float(w.sum() ** 2 / (w ** 2).sum())
    diag["effective_sample_size"] = ess
    return Estimate("ce", n, spec.embedding.value, math.log(z) + math.log(size), se / z, used, diag)


def _free_llr(theta, X, free, n):
    """Log likelihood ratio over free rows; pinned rows agree under both samplers."""
    return -free.size * math.log(n) - np.log(theta[free[None, :], X[:, free]]).sum(axis=1)
