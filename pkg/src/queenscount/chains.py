"""Metropolis kernels over placements.

All three kernels are the same Metropolis update on the target
``exp(log_w(S(x)))``: Boltzmann uses ``-S/gamma``, the threshold kernel uses
0 on ``{S <= m}`` and ``-inf`` above it, and the weighted kernel takes any
level weight.  Weights are tabulated per energy level before the compiled
loop runs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Union

import numpy as np

from . import _kernels as K
from .board import BoardSpec, Embedding, Placement, random_placement
from .rng import as_rng


class MoveSet(str, Enum):
    UNIFORM_SWAP = "uniform_swap"
    ADJACENT_SWAP = "adjacent_swap"
    ROW_REASSIGN = "row_reassign"


_MOVE_CODES = {
    MoveSet.UNIFORM_SWAP: K.UNIFORM_SWAP,
    MoveSet.ADJACENT_SWAP: K.ADJACENT_SWAP,
    MoveSet.ROW_REASSIGN: K.ROW_REASSIGN,
}


def default_move_set(spec: BoardSpec) -> MoveSet:
    if spec.embedding is Embedding.PERMUTATION:
        return MoveSet.UNIFORM_SWAP
    if spec.embedding is Embedding.ROWWISE:
        return MoveSet.ROW_REASSIGN
    raise TypeError("MCMC kernels run on the permutation and row-wise embeddings only")


def move_code(spec: BoardSpec, move_set: MoveSet | None = None) -> int:
    move_set = MoveSet(move_set) if move_set is not None else default_move_set(spec)
    swap = move_set is not MoveSet.ROW_REASSIGN
    if swap and spec.embedding is not Embedding.PERMUTATION:
        raise ValueError(f"{move_set.value} needs the permutation embedding")
    if not swap and spec.embedding is not Embedding.ROWWISE:
        raise ValueError("row_reassign needs the row-wise embedding")
    return _MOVE_CODES[move_set]


def has_moves(spec: BoardSpec, code: int) -> bool:
    k = spec.free_rows.size
    return k >= 2 if code != K.ROW_REASSIGN else (k >= 1 and spec.n >= 2)


@dataclass(frozen=True)
class Boltzmann:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class Threshold:
    m: int


@dataclass(frozen=True)
class Weighted:
    log_w: Union[Callable[[int], float], np.ndarray]


def log_weight_table(kind, max_energy: int) -> np.ndarray:
    """Tabulate the kernel's log-weight for energies 0..max_energy."""
    s = np.arange(max_energy + 1, dtype=np.float64)
    if isinstance(kind, Boltzmann):
        return -s / kind.gamma
    if isinstance(kind, Threshold):
        return np.where(s <= kind.m, 0.0, -np.inf)
    if isinstance(kind, Weighted):
        lw = kind.log_w
        if callable(lw):
            return np.array([_safe_call(lw, int(v)) for v in s], dtype=np.float64)
        table = np.asarray(lw, dtype=np.float64)
        if table.shape[0] < max_energy + 1:
            table = np.concatenate([table, np.full(max_energy + 1 - table.shape[0], -np.inf)])
        return np.ascontiguousarray(table[:max_energy + 1])
    raise TypeError(f"unknown kernel kind {kind!r}")


def _safe_call(fn, s):
    try:
        return float(fn(s))
    except (ValueError, ZeroDivisionError):
        return -np.inf


@dataclass
class KernelConfig:
    kind: object
    steps_per_sweep: int | None = None
    move_set: MoveSet | None = None

    def sweep_length(self, spec: BoardSpec) -> int:
        if self.steps_per_sweep is not None:
            if self.steps_per_sweep < 1:
                raise ValueError("steps_per_sweep must be positive")
            return self.steps_per_sweep
        return max(1, int(spec.free_rows.size))


@dataclass
class ChainState:
    """A placement with its cached energy and private generator."""
    placement: Placement
    energy: int
    rng: np.random.Generator
    step_count: int = 0
    accepted: int = 0
    move_set: MoveSet | None = None
    _free: np.ndarray = field(default=None, repr=False)

    @classmethod
    def start(cls, placement: Placement, seed=0, move_set=None) -> "ChainState":
        from .board import energy
        rng = as_rng(seed, "chains")
        p = placement.copy()
        ms = MoveSet(move_set) if move_set is not None else default_move_set(p.spec)
        move_code(p.spec, ms)
        return cls(p, energy(p), rng, move_set=ms, _free=p.spec.free_rows)

    @classmethod
    def random(cls, spec: BoardSpec, seed=0, move_set=None) -> "ChainState":
        rng = as_rng(seed, "chains")
        st = cls.start(random_placement(spec, rng), rng, move_set)
        return st

    @property
    def code(self) -> int:
        return move_code(self.placement.spec, self.move_set)

    def coherent(self) -> bool:
        from .board import energy
        return self.energy == energy(self.placement) and self.placement.tallies_consistent()


def _advance(state: ChainState, table: np.ndarray, nsteps: int, trace=None) -> np.ndarray:
    rand = state.rng.random((nsteps, 3))
    if trace is None:
        trace = np.empty(nsteps, dtype=np.int64)
    p = state.placement
    if has_moves(p.spec, state.code):
        e, acc = K.run_single(p.x, p.cols, p.diag, p.anti, state.energy, state._free,
                              state.code, table, rand, trace)
        state.energy = int(e)
        state.accepted += int(acc)
    else:
        trace[:] = state.energy
    state.step_count += nsteps
    return trace


def acceptance_probability(table: np.ndarray, s_old: int, s_new: int) -> float:
    """Metropolis acceptance for a move between energy levels."""
    with np.errstate(invalid="ignore"):
        d = table[s_new] - table[s_old]
    if np.isnan(d):
        return 0.0
    return float(min(1.0, np.exp(d)))


def weighted_step(state: ChainState, log_w) -> ChainState:
    """One Metropolis update with acceptance min(1, w(S')/w(S))."""
    kind = log_w if isinstance(log_w, Weighted) else Weighted(log_w)
    _advance(state, log_weight_table(kind, state.placement.spec.max_energy), 1)
    return state


def boltzmann_step(state: ChainState, gamma: float) -> ChainState:
    _advance(state, log_weight_table(Boltzmann(gamma), state.placement.spec.max_energy), 1)
    return state


def threshold_step(state: ChainState, m: int) -> ChainState:
    """Random walk on the uniform distribution over ``{S <= m}``."""
    if state.energy > m:
        raise ValueError(f"chain state has energy {state.energy} above the threshold {m}")
    _advance(state, log_weight_table(Threshold(m), state.placement.spec.max_energy), 1)
    return state


def run_chain(config: KernelConfig, initial: ChainState, sweeps: int, observer=None) -> ChainState:
    """Apply ``sweeps * steps_per_sweep`` kernel steps.

    ``observer(state, trace)`` is called after every sweep with the energies
    visited during that sweep.
    """
    if sweeps < 0:
        raise ValueError("sweeps must be non-negative")
    spec = initial.placement.spec
    if isinstance(config.kind, Threshold) and initial.energy > config.kind.m:
        raise ValueError("initial state lies outside the threshold set")
    if config.move_set is not None and MoveSet(config.move_set) != initial.move_set:
        initial.move_set = MoveSet(config.move_set)
        move_code(spec, initial.move_set)
    table = log_weight_table(config.kind, spec.max_energy)
    length = config.sweep_length(spec)
    trace = np.empty(length, dtype=np.int64)
    for _ in range(sweeps):
        _advance(initial, table, length, trace)
        if observer is not None:
            observer(initial, trace)
    return initial


def mutate_population(pop, table: np.ndarray, steps: int, rng: np.random.Generator,
                      move_set=None, chunk: int = 64) -> int:
    """Advance every particle of a :class:`~queenscount.board.Population` by ``steps``.

    Returns the number of evaluated proposals.
    """
    spec = pop.spec
    code = move_code(spec, move_set)
    if not has_moves(spec, code) or steps <= 0 or len(pop) == 0:
        return 0
    free = spec.free_rows
    done = 0
    while done < steps:
        k = min(chunk, steps - done)
        rand = rng.random((len(pop), k, 3))
        K.run_population(pop.X, pop.cols, pop.diag, pop.anti, pop.E, free, code, table, rand)
        done += k
    return steps * len(pop)
