"""Plain Monte Carlo: hit rate of uniform draws times the state-space size."""
from __future__ import annotations

import math

import numpy as np

from ..board import BoardSpec, Embedding, batch_energy, random_cells_energy, random_columns, state_space_size
from ..rng import as_rng
from .types import Estimate

CHUNK = 100_000
ZERO_HIT_ALPHA = 0.05


def count_hits(spec: BoardSpec, N: int, rng: np.random.Generator) -> int:
    hits = 0
    chunk = CHUNK if spec.embedding is not Embedding.BINARY else max(1, CHUNK // spec.n)
    done = 0
    while done < N:
        k = min(chunk, N - done)
        if spec.embedding is Embedding.BINARY:
            e = random_cells_energy(spec, k, rng)
        else:
            e = batch_energy(random_columns(spec, k, rng))
        hits += int(np.count_nonzero(e == 0))
        done += k
    return hits


def naive_count(spec: BoardSpec, N: int, seed=0) -> Estimate:
    """Fraction of N uniform draws with zero energy, scaled by the space size.

    With no hits the count is 0 and ``upper_bound`` holds the one-sided 95%
    bound ``-log(0.05) / N`` mapped to counts.
    """
    if N < 1:
        raise ValueError("need at least one sample")
    rng = as_rng(seed, "naive")
    size = state_space_size(spec)
    hits = count_hits(spec, N, rng)
    p = hits / N
    diag = {"hits": hits, "samples": int(N), "hit_rate": p, "state_space_size": size}
    if hits == 0:
        bound = -math.log(ZERO_HIT_ALPHA) / N * size
        diag["zero_hits"] = True
        return Estimate("naive", spec.n, spec.embedding.value, -math.inf, math.inf, N, diag,
                        upper_bound=bound)
    se_p = math.sqrt(p * (1 - p) / N)
    diag["stderr_count"] = se_p * size
    return Estimate("naive", spec.n, spec.embedding.value, math.log(p) + math.log(size),
                    se_p / p, N, diag)
