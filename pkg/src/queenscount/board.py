"""State spaces, the attacking-pair energy, and incremental moves.

Rows and columns are 1-based in every public signature and in the text
formats; arrays held by :class:`Placement` are 0-based.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

import numpy as np

from . import _kernels as K
from .errors import IllegalMove, InfeasibleSpec


class Embedding(str, Enum):
    PERMUTATION = "permutation"
    ROWWISE = "rowwise"
    BINARY = "binary"


def _coerce_cells(cells) -> frozenset:
    if isinstance(cells, str):
        return parse_fixed_cells(cells)
    return frozenset((int(r), int(c)) for r, c in (cells or ()))


@dataclass(frozen=True)
class BoardSpec:
    n: int
    embedding: Embedding = Embedding.PERMUTATION
    fixed_cells: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError(f"board size must be positive, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "embedding", Embedding(self.embedding))
        cells = _coerce_cells(self.fixed_cells)
        object.__setattr__(self, "fixed_cells", cells)
        rows = set()
        cols = set()
        for r, c in cells:
            if not (1 <= r <= self.n and 1 <= c <= self.n):
                raise InfeasibleSpec(f"fixed cell ({r},{c}) is off the {self.n}x{self.n} board")
            if r in rows:
                raise InfeasibleSpec(f"two fixed cells share row {r}")
            if c in cols and self.embedding is Embedding.PERMUTATION:
                raise InfeasibleSpec(f"two fixed cells share column {c}")
            rows.add(r)
            cols.add(c)

    @property
    def pinned(self) -> dict:
        """0-based row -> 0-based column for every fixed cell."""
        return {r - 1: c - 1 for r, c in self.fixed_cells}

    @property
    def free_rows(self) -> np.ndarray:
        pinned = self.pinned
        return np.array([r for r in range(self.n) if r not in pinned], dtype=np.int64)

    @property
    def free_columns(self) -> np.ndarray:
        taken = set(self.pinned.values())
        return np.array([c for c in range(self.n) if c not in taken], dtype=np.int64)

    @property
    def max_energy(self) -> int:
        return self.n * (self.n - 1) // 2


class Placement:
    """Queen positions plus column/diagonal tallies.

    For the row-indexed embeddings ``x[r]`` is the 0-based column of the
    queen in row ``r``.  For the binary embedding ``cells`` is an ``(n, 2)``
    array of 0-based (row, column) pairs and ``rows`` carries the row tally.
    """

    __slots__ = ("spec", "x", "cells", "rows", "cols", "diag", "anti")

    def __init__(self, spec: BoardSpec, x=None, cells=None):
        n = spec.n
        self.spec = spec
        self.cols = np.zeros(n, dtype=np.int64)
        self.diag = np.zeros(2 * n - 1, dtype=np.int64)
        self.anti = np.zeros(2 * n - 1, dtype=np.int64)
        if spec.embedding is Embedding.BINARY:
            cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
            if cells.shape[0] != n or len({tuple(c) for c in cells}) != n:
                raise ValueError("binary placement needs n distinct cells")
            if cells.min() < 0 or cells.max() >= n:
                raise ValueError("cell outside the board")
            self.x = None
            self.cells = cells[np.lexsort((cells[:, 1], cells[:, 0]))]
            self.rows = np.zeros(n, dtype=np.int64)
        else:
            x = np.asarray(x, dtype=np.int64).copy()
            if x.shape != (n,):
                raise ValueError(f"expected {n} columns, got {x.shape}")
            if x.min() < 0 or x.max() >= n:
                raise ValueError("column outside the board")
            if spec.embedding is Embedding.PERMUTATION and len(set(x.tolist())) != n:
                raise ValueError("permutation embedding needs distinct columns")
            self.x = x
            self.cells = None
            self.rows = None
        self._recount()
        for r, c in spec.pinned.items():
            if not self.occupies(r, c):
                raise IllegalMove(f"fixed cell ({r + 1},{c + 1}) is not occupied")

    # construction -----------------------------------------------------
    @classmethod
    def from_columns(cls, spec: BoardSpec, columns: Iterable[int]) -> "Placement":
        """Build from 1-based columns, one per row."""
        return cls(spec, x=np.asarray(list(columns), dtype=np.int64) - 1)

    @classmethod
    def from_cells(cls, spec: BoardSpec, cells: Iterable) -> "Placement":
        """Build a binary placement from 1-based (row, column) pairs."""
        return cls(spec, cells=np.asarray(list(cells), dtype=np.int64) - 1)

    def copy(self) -> "Placement":
        new = object.__new__(Placement)
        new.spec = self.spec
        for name in ("x", "cells", "rows", "cols", "diag", "anti"):
            v = getattr(self, name)
            setattr(new, name, None if v is None else v.copy())
        return new

    # queries ----------------------------------------------------------
    @property
    def columns(self) -> tuple:
        """1-based columns per row (row-indexed embeddings only)."""
        if self.x is None:
            raise TypeError("binary placements have no column vector")
        return tuple(int(c) + 1 for c in self.x)

    def occupied_cells(self) -> frozenset:
        """1-based (row, column) pairs."""
        if self.x is None:
            return frozenset((int(r) + 1, int(c) + 1) for r, c in self.cells)
        return frozenset((r + 1, int(c) + 1) for r, c in enumerate(self.x))

    def occupies(self, r: int, c: int) -> bool:
        if self.x is not None:
            return int(self.x[r]) == c
        return bool(np.any((self.cells[:, 0] == r) & (self.cells[:, 1] == c)))

    def _recount(self):
        n = self.spec.n
        for a in (self.cols, self.diag, self.anti):
            a[:] = 0
        if self.x is not None:
            r = np.arange(n)
            c = self.x
        else:
            r, c = self.cells[:, 0], self.cells[:, 1]
            self.rows[:] = np.bincount(r, minlength=n)
        np.add.at(self.cols, c, 1)
        np.add.at(self.diag, r - c + n - 1, 1)
        np.add.at(self.anti, r + c, 1)

    def tallies_consistent(self) -> bool:
        """Full recount check of the incremental tallies."""
        fresh = self.copy()
        fresh._recount()
        same = all(np.array_equal(getattr(self, k), getattr(fresh, k)) for k in ("cols", "diag", "anti"))
        if self.rows is not None:
            same = same and np.array_equal(self.rows, fresh.rows)
        return same

    def __eq__(self, other):
        if not isinstance(other, Placement):
            return NotImplemented
        return self.spec == other.spec and self.occupied_cells() == other.occupied_cells()

    def __hash__(self):
        return hash((self.spec, self.occupied_cells()))

    def __repr__(self):
        if self.x is not None:
            return f"Placement(n={self.spec.n}, {format_columns(self.columns)})"
        return f"Placement(n={self.spec.n}, cells={sorted(self.occupied_cells())})"


# moves ----------------------------------------------------------------

@dataclass(frozen=True)
class Swap:
    """Exchange the columns of rows i and j (1-based)."""
    i: int
    j: int


@dataclass(frozen=True)
class Reassign:
    """Move the queen of ``row`` to ``column`` (both 1-based)."""
    row: int
    column: int


def _pair_sum(t: np.ndarray) -> int:
    return int((t * (t - 1) // 2).sum())


def energy(p: Placement) -> int:
    """Number of unordered attacking queen pairs."""
    e = _pair_sum(p.diag) + _pair_sum(p.anti)
    if p.spec.embedding is not Embedding.PERMUTATION:
        e += _pair_sum(p.cols)
    if p.rows is not None:
        e += _pair_sum(p.rows)
    return e


def is_solution(p: Placement) -> bool:
    return energy(p) == 0


def _check_rows(p: Placement, *rows: int):
    n = p.spec.n
    pinned = p.spec.pinned
    for r in rows:
        if not 1 <= r <= n:
            raise IllegalMove(f"row {r} is off the board")
        if r - 1 in pinned:
            raise IllegalMove(f"row {r} is pinned by a fixed cell")


def energy_delta_swap(p: Placement, i: int, j: int) -> int:
    """Energy change from swapping rows i and j, via the tallies."""
    if p.spec.embedding is not Embedding.PERMUTATION:
        raise TypeError("swaps are defined on the permutation embedding")
    if i == j:
        raise IllegalMove("swap needs two distinct rows")
    _check_rows(p, i, j)
    n = p.spec.n
    d = K.swap_in_place(p.x, p.cols, p.diag, p.anti, n, i - 1, j - 1)
    K.swap_in_place(p.x, p.cols, p.diag, p.anti, n, i - 1, j - 1)
    return int(d)


def energy_delta_reassign(p: Placement, row: int, column: int) -> int:
    if p.spec.embedding is not Embedding.ROWWISE:
        raise TypeError("row reassignment is defined on the row-wise embedding")
    _check_rows(p, row)
    if not 1 <= column <= p.spec.n:
        raise IllegalMove(f"column {column} is off the board")
    n = p.spec.n
    old = int(p.x[row - 1])
    d = K.reassign_in_place(p.x, p.cols, p.diag, p.anti, n, row - 1, column - 1)
    K.reassign_in_place(p.x, p.cols, p.diag, p.anti, n, row - 1, old)
    return int(d)


def apply_move(p: Placement, move) -> Placement:
    """Return a new placement with ``move`` applied; ``p`` is untouched."""
    q = p.copy()
    n = p.spec.n
    if isinstance(move, Swap):
        if p.spec.embedding is not Embedding.PERMUTATION:
            raise IllegalMove("swap moves need the permutation embedding")
        if move.i == move.j:
            raise IllegalMove("swap needs two distinct rows")
        _check_rows(p, move.i, move.j)
        K.swap_in_place(q.x, q.cols, q.diag, q.anti, n, move.i - 1, move.j - 1)
    elif isinstance(move, Reassign):
        if p.spec.embedding is not Embedding.ROWWISE:
            raise IllegalMove("reassign moves need the row-wise embedding")
        _check_rows(p, move.row)
        if not 1 <= move.column <= n:
            raise IllegalMove(f"column {move.column} is off the board")
        K.reassign_in_place(q.x, q.cols, q.diag, q.anti, n, move.row - 1, move.column - 1)
    else:
        raise IllegalMove(f"unknown move {move!r}")
    return q


# sampling and sizes ------------------------------------------------------

def random_placement(spec: BoardSpec, rng: np.random.Generator) -> Placement:
    """Uniform draw from the embedding's state space with fixed cells held."""
    n = spec.n
    pinned = spec.pinned
    if spec.embedding is Embedding.PERMUTATION:
        x = np.empty(n, dtype=np.int64)
        for r, c in pinned.items():
            x[r] = c
        x[spec.free_rows] = rng.permutation(spec.free_columns)
        return Placement(spec, x=x)
    if spec.embedding is Embedding.ROWWISE:
        x = rng.integers(0, n, size=n)
        for r, c in pinned.items():
            x[r] = c
        return Placement(spec, x=x)
    fixed = sorted((r, c) for r, c in pinned.items())
    fixed_idx = {r * n + c for r, c in fixed}
    pool = np.array([k for k in range(n * n) if k not in fixed_idx], dtype=np.int64)
    chosen = rng.choice(pool, size=n - len(fixed), replace=False)
    flat = np.concatenate([np.array([r * n + c for r, c in fixed], dtype=np.int64), chosen])
    return Placement(spec, cells=np.stack([flat // n, flat % n], axis=1))


def state_space_size(spec: BoardSpec) -> int:
    """Exact size of the embedding's state space, reduced by any fixed cells."""
    n, k = spec.n, len(spec.fixed_cells)
    if spec.embedding is Embedding.PERMUTATION:
        return math.factorial(n - k)
    if spec.embedding is Embedding.ROWWISE:
        return n ** (n - k)
    return math.comb(n * n - k, n - k)


# batched helpers used by the estimators ------------------------------

def random_columns(spec: BoardSpec, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` independent uniform placements as an ``(size, n)`` 0-based array."""
    n = spec.n
    if spec.embedding is Embedding.PERMUTATION:
        free = spec.free_rows
        X = np.empty((size, n), dtype=np.int64)
        if free.size:
            X[:, free] = rng.permuted(np.tile(spec.free_columns, (size, 1)), axis=1)
    elif spec.embedding is Embedding.ROWWISE:
        X = rng.integers(0, n, size=(size, n))
    else:
        raise TypeError("binary placements are not row-indexed")
    for r, c in spec.pinned.items():
        X[:, r] = c
    return X


def batch_energy(X: np.ndarray) -> np.ndarray:
    """Attacking pairs for each row-indexed placement in ``X`` (pairwise check)."""
    return K.batch_pair_energy(np.ascontiguousarray(X, dtype=np.int64))


def random_cells_energy(spec: BoardSpec, size: int, rng: np.random.Generator) -> np.ndarray:
    """Energies of ``size`` uniform binary placements."""
    n = spec.n
    pinned = spec.pinned
    fixed = np.array([r * n + c for r, c in pinned.items()], dtype=np.int64)
    pool = np.setdiff1d(np.arange(n * n), fixed)
    m = n - fixed.size
    keys = rng.random((size, pool.size))
    pick = pool[np.argpartition(keys, m - 1, axis=1)[:, :m]] if m else np.empty((size, 0), np.int64)
    flat = np.concatenate([np.tile(fixed, (size, 1)), pick], axis=1)
    r, c = flat // n, flat % n
    e = np.zeros(size, dtype=np.int64)
    for a in range(n):
        for b in range(a + 1, n):
            dr = r[:, a] - r[:, b]
            dc = c[:, a] - c[:, b]
            e += (dr == 0) | (dc == 0) | (np.abs(dr) == np.abs(dc))
    return e


class Population:
    """Struct-of-arrays population of row-indexed placements."""

    def __init__(self, spec: BoardSpec, X: np.ndarray):
        n = spec.n
        self.spec = spec
        self.X = np.ascontiguousarray(X, dtype=np.int64)
        N = self.X.shape[0]
        self.cols = np.zeros((N, n), dtype=np.int64)
        self.diag = np.zeros((N, 2 * n - 1), dtype=np.int64)
        self.anti = np.zeros((N, 2 * n - 1), dtype=np.int64)
        self.E = np.zeros(N, dtype=np.int64)
        K.population_tallies(self.X, self.cols, self.diag, self.anti, self.E)

    def __len__(self):
        return self.X.shape[0]

    def take(self, idx) -> "Population":
        new = object.__new__(Population)
        new.spec = self.spec
        for name in ("X", "cols", "diag", "anti", "E"):
            setattr(new, name, np.ascontiguousarray(getattr(self, name)[idx]))
        return new

    def placement(self, k: int) -> Placement:
        return Placement(self.spec, x=self.X[k])


# symmetries and text formats ---------------------------------------------

def transform_cells(cells: Iterable, n: int, k: int) -> frozenset:
    """Apply the k-th of the 8 board symmetries to 1-based cells."""
    out = []
    for r, c in cells:
        r0, c0 = r - 1, c - 1
        for _ in range(k % 4):
            r0, c0 = c0, n - 1 - r0
        if k >= 4:
            c0 = n - 1 - c0
        out.append((r0 + 1, c0 + 1))
    return frozenset(out)


def symmetric_images(p: Placement) -> list:
    """The 8 images of a permutation or binary placement under board symmetries."""
    spec = BoardSpec(p.spec.n, p.spec.embedding)
    images = []
    for k in range(8):
        cells = transform_cells(p.occupied_cells(), p.spec.n, k)
        if spec.embedding is Embedding.BINARY:
            images.append(Placement.from_cells(spec, sorted(cells)))
        else:
            cols = [c for _, c in sorted(cells)]
            images.append(Placement.from_columns(spec, cols))
    return images


def parse_columns(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(","))
    except ValueError as exc:
        raise ValueError(f"malformed placement {text!r}") from exc


def format_columns(columns: Iterable[int]) -> str:
    return ",".join(str(int(c)) for c in columns)


def parse_fixed_cells(text: str | None) -> frozenset:
    """Parse ``"r,c;r,c"`` into a set of 1-based cells."""
    if text is None or not text.strip():
        return frozenset()
    cells = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise ValueError(f"malformed fixed cell {chunk!r}")
        try:
            cells.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ValueError(f"malformed fixed cell {chunk!r}") from exc
    return frozenset(cells)


def format_fixed_cells(cells: Iterable) -> str:
    return ";".join(f"{r},{c}" for r, c in sorted(cells))
