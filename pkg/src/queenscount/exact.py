"""Exact ground truth: bitmask backtracking and exhaustive densities of states."""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .board import BoardSpec, Embedding, Placement

MAX_DOS_N = 10
MAX_ENUMERATE_N = 14


@dataclass(frozen=True)
class ExactCount:
    n: int
    count: int
    fixed_cells: frozenset = field(default_factory=frozenset)
    elapsed: float = 0.0


def _forced_masks(n, fixed_cells):
    """Per-row allowed-column mask, or None if the constraints clash outright."""
    forced = [0] * n
    fixed_cols = 0
    for r, c in fixed_cells:
        if not (1 <= r <= n and 1 <= c <= n):
            raise ValueError(f"fixed cell ({r},{c}) is off the {n}x{n} board")
        bit = 1 << (c - 1)
        if forced[r - 1] and forced[r - 1] != bit:
            return None, 0
        if fixed_cols & bit and forced[r - 1] != bit:
            return None, 0
        forced[r - 1] = bit
        fixed_cols |= bit
    return forced, fixed_cols


def _count_from(n, forced, fixed_cols, row, cols, ld, rd):
    full = (1 << n) - 1
    free_mask = full & ~fixed_cols

    def rec(row, cols, ld, rd):
        if row == n:
            return 1
        avail = ~(cols | ld | rd) & (forced[row] or free_mask)
        total = 0
        while avail:
            bit = avail & -avail
            avail ^= bit
            total += rec(row + 1, cols | bit, ((ld | bit) << 1) & full, (rd | bit) >> 1)
        return total

    return rec(row, cols, ld, rd)


def _count_branch(args):
    n, forced, fixed_cols, bit = args
    full = (1 << n) - 1
    return _count_from(n, forced, fixed_cols, 1, bit, (bit << 1) & full, bit >> 1)


def count_exact(n: int, fixed_cells=(), workers: int = 1) -> ExactCount:
    """Number of n-queens solutions that contain every fixed cell.

    Depth-first over rows with column and diagonal bitmasks.  With
    ``workers > 1`` the first-row branches run in separate processes; the
    total does not depend on the worker count.
    """
    if n < 1:
        raise ValueError(f"board size must be positive, got {n}")
    fixed = frozenset((int(r), int(c)) for r, c in fixed_cells)
    t0 = time.perf_counter()
    forced, fixed_cols = _forced_masks(n, fixed)
    if forced is None:
        return ExactCount(n, 0, fixed, time.perf_counter() - t0)
    if workers <= 1 or n < 6:
        total = _count_from(n, forced, fixed_cols, 0, 0, 0, 0)
    else:
        first = forced[0] or (((1 << n) - 1) & ~fixed_cols)
        bits = [1 << c for c in range(n) if first >> c & 1]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_count_branch, [(n, forced, fixed_cols, b) for b in bits]))
        total = sum(parts)
    return ExactCount(n, total, fixed, time.perf_counter() - t0)


def count_completion(n: int, fixed_cells, workers: int = 1) -> ExactCount:
    """Completion count: full solutions extending a nonempty partial placement."""
    if not fixed_cells:
        raise ValueError("completion needs at least one fixed cell")
    return count_exact(n, fixed_cells, workers=workers)


def enumerate_solutions(n: int, limit: int | None = None, fixed_cells=()) -> list:
    """Solutions in lexicographic order of the column vector, at most ``limit``."""
    if n > MAX_ENUMERATE_N:
        raise ValueError(f"enumeration is limited to n <= {MAX_ENUMERATE_N}")
    spec = BoardSpec(n, Embedding.PERMUTATION)
    fixed = frozenset(fixed_cells)
    forced, fixed_cols = _forced_masks(n, fixed)
    out = []
    if forced is None or (limit is not None and limit <= 0):
        return out
    full = (1 << n) - 1
    free_mask = full & ~fixed_cols
    x = [0] * n

    def rec(row, cols, ld, rd):
        if row == n:
            out.append(Placement(spec, x=np.array(x)))
            return limit is not None and len(out) >= limit
        avail = ~(cols | ld | rd) & (forced[row] or free_mask)
        c = 0
        while avail >> c:
            if avail >> c & 1:
                bit = 1 << c
                x[row] = c
                if rec(row + 1, cols | bit, ((ld | bit) << 1) & full, (rd | bit) >> 1):
                    return True
            c += 1
        return False

    rec(0, 0, 0, 0)
    return out


def all_permutations(n: int) -> np.ndarray:
    """Every permutation of 0..n-1 as rows of an ``(n!, n)`` int8 array."""
    perms = np.zeros((1, 0), dtype=np.int8)
    for k in range(1, n + 1):
        m = perms.shape[0]
        nxt = np.empty((m * k, k), dtype=np.int8)
        for pos in range(k):
            block = nxt[pos * m:(pos + 1) * m]
            block[:, :pos] = perms[:, :pos]
            block[:, pos] = k - 1
            block[:, pos + 1:] = perms[:, pos:]
        perms = nxt
    return perms


def permutation_energies(perms: np.ndarray) -> np.ndarray:
    """Diagonal attacking pairs for every permutation row (columns never clash)."""
    n = perms.shape[1]
    P = perms.astype(np.int16)
    e = np.zeros(P.shape[0], dtype=np.int32)
    for i in range(n):
        for j in range(i + 1, n):
            d = np.abs(P[:, i] - P[:, j])
            e += d == (j - i)
    return e


def exact_dos(n: int, fixed_cells=()) -> np.ndarray:
    """Exact N(s), s = 0..n(n-1)/2, over the permutation embedding by exhaustion."""
    if n > MAX_DOS_N:
        raise ValueError(f"exhaustive density of states is limited to n <= {MAX_DOS_N}")
    if n < 1:
        raise ValueError("board size must be positive")
    perms = all_permutations(n)
    for r, c in fixed_cells:
        perms = perms[perms[:, r - 1] == c - 1]
    e = permutation_energies(perms)
    return np.bincount(e, minlength=n * (n - 1) // 2 + 1).astype(np.int64)


def fundamental_estimate(count: int) -> float:
    """count / 8, the symmetry-class diagnostic (not an exact fundamental count)."""
    return count / 8


def brute_force_count(n: int) -> int:
    """Plain itertools sweep over permutations; tiny-n cross-check only."""
    total = 0
    for p in itertools.permutations(range(n)):
        if all(abs(p[i] - p[j]) != j - i for i in range(n) for j in range(i + 1, n)):
            total += 1
    return total


def log_factorial(n: int) -> float:
    return math.lgamma(n + 1)
