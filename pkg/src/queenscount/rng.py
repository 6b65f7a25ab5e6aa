"""Seed derivation.

Every random stream is a Philox generator keyed by ``SeedSequence(seed,
spawn_key=(module, replica, chain))``.  Module keys are fixed small integers so
adding a module never shifts the streams of existing ones.
"""
from __future__ import annotations

import numpy as np

MODULE_KEYS = {
    "board": 0,
    "chains": 1,
    "naive": 2,
    "split": 3,
    "ce": 4,
    "nested": 5,
    "splitsamp": 6,
    "wanglandau": 7,
    "probe": 8,
    "bench": 9,
}

DEFAULT_SEED = 0


def make_rng(seed: int, module: str = "board", replica: int = 0, chain: int = 0) -> np.random.Generator:
    """Return the generator for ``(seed, module, replica, chain)``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(MODULE_KEYS[module], int(replica), int(chain)))
    return np.random.Generator(np.random.Philox(ss))


def as_rng(seed_or_rng, module: str = "board") -> np.random.Generator:
    if isinstance(seed_or_rng, np.random.Generator):
        return seed_or_rng
    if seed_or_rng is None:
        seed_or_rng = DEFAULT_SEED
    return make_rng(int(seed_or_rng), module)
