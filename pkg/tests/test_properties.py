"""Randomized invariant suites, 1000 cases each."""
import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import columns_energy
from queenscount import _kernels as K
from queenscount.board import (BoardSpec, Placement, Reassign, Swap, apply_move, energy,
                               energy_delta_reassign, energy_delta_swap)
from queenscount.chains import (Boltzmann, ChainState, KernelConfig, Threshold, acceptance_probability,
                                log_weight_table, run_chain)
from queenscount.estimators import DensityOfStates
from queenscount.exact import all_permutations, exact_dos, permutation_energies
from queenscount.quantile import empirical_survival, lambda_inverse, lorenz_curve, midpoint_convex

CASES = settings(max_examples=1000, deadline=None)


@st.composite
def placement_and_moves(draw):
    n = draw(st.integers(2, 12))
    emb = draw(st.sampled_from(["permutation", "rowwise"]))
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    if emb == "permutation":
        cols = tuple(int(c) + 1 for c in rng.permutation(n))
    else:
        cols = tuple(int(c) + 1 for c in rng.integers(0, n, n))
    fixed = set()
    if draw(st.booleans()):
        r = draw(st.integers(1, n))
        fixed = {(r, cols[r - 1])}
    spec = BoardSpec(n, emb, fixed)
    free = [r for r in range(1, n + 1) if r not in {f[0] for f in fixed}]
    moves = []
    for _ in range(draw(st.integers(1, 20))):
        if emb == "permutation":
            if len(free) < 2:
                break
            i, j = draw(st.lists(st.sampled_from(free), min_size=2, max_size=2, unique=True))
            moves.append(Swap(i, j))
        else:
            moves.append(Reassign(draw(st.sampled_from(free)), draw(st.integers(1, n))))
    return Placement.from_columns(spec, cols), moves


@CASES
@given(placement_and_moves())
def test_tally_coherence(case):
    p, moves = case
    s = energy(p)
    for m in moves:
        d = energy_delta_swap(p, m.i, m.j) if isinstance(m, Swap) else energy_delta_reassign(p, m.row, m.column)
        p = apply_move(p, m)
        s += d
        assert s == energy(p) == columns_energy(p.columns)
        assert p.tallies_consistent()


PERMS4 = [tuple(int(c) for c in p) for p in all_permutations(4)]
INDEX4 = {p: k for k, p in enumerate(PERMS4)}
E4 = permutation_energies(all_permutations(4))


def _proposal_matrix(move_kind):
    """Exact proposal probabilities, enumerating the kernel's uniforms at cell midpoints."""
    free = np.arange(4, dtype=np.int64)
    k = 4
    if move_kind == K.UNIFORM_SWAP:
        grid = [((a + 0.5) / k, (b + 0.5) / (k - 1)) for a in range(k) for b in range(k - 1)]
    else:
        grid = [((a + 0.5) / (k - 1), 0.5) for a in range(k - 1)]
    Q = np.zeros((24, 24))
    for i, p in enumerate(PERMS4):
        for u1, u2 in grid:
            x = np.array(p, dtype=np.int64)
            ra, rb, _ = K.propose(x, free, move_kind, 4, u1, u2)
            y = list(p)
            y[ra], y[rb] = y[rb], y[ra]
            Q[i, INDEX4[tuple(y)]] += 1 / len(grid)
    return Q


PROPOSALS = {K.UNIFORM_SWAP: _proposal_matrix(K.UNIFORM_SWAP), K.ADJACENT_SWAP: _proposal_matrix(K.ADJACENT_SWAP)}


@st.composite
def weight_tables(draw):
    kind = draw(st.sampled_from(["boltzmann", "threshold", "weighted"]))
    if kind == "boltzmann":
        return log_weight_table(Boltzmann(draw(st.floats(0.05, 20.0))), 6)
    if kind == "threshold":
        return log_weight_table(Threshold(draw(st.integers(0, 6))), 6)
    return np.array(draw(st.lists(st.floats(-8.0, 8.0), min_size=7, max_size=7)))


@CASES
@given(weight_tables(), st.sampled_from([K.UNIFORM_SWAP, K.ADJACENT_SWAP]))
def test_detailed_balance_n4(table, move_kind):
    Q = PROPOSALS[move_kind]
    A = np.array([[acceptance_probability(table, E4[i], E4[j]) for j in range(24)] for i in range(24)])
    P = Q * A
    P[np.diag_indices(24)] += 1 - P.sum(axis=1)
    with np.errstate(over="ignore"):
        w = np.exp(table[E4] - np.max(table[E4]))
    pi = w / w.sum()
    flow = pi[:, None] * P
    assert np.allclose(flow, flow.T, atol=1e-12)
    assert np.allclose(P.sum(axis=1), 1.0)
    assert np.all(P >= -1e-15)


@CASES
@given(st.integers(4, 10), st.integers(0, 2 ** 32 - 1), st.integers(0, 6), st.integers(1, 300))
def test_threshold_closure(n, seed, slack, steps):
    state = ChainState.random(BoardSpec(n), seed)
    m = state.energy + slack
    trace = []
    run_chain(KernelConfig(Threshold(m)), state, 1, lambda s, t: trace.extend(t.tolist()))
    for _ in range(steps // n):
        run_chain(KernelConfig(Threshold(m)), state, 1, lambda s, t: trace.extend(t.tolist()))
    assert max(trace) <= m
    assert state.energy <= m and state.coherent()


@CASES
@given(st.lists(st.one_of(st.just(0.0), st.floats(1e-3, 1e6)), min_size=1, max_size=40).filter(any),
       st.floats(1.0, 1e12))
def test_dos_normalization(counts, total):
    d = DensityOfStates.from_counts(counts).normalized(total)
    finite = np.isfinite(d.log_n)
    assert math.isclose(np.exp(d.log_n[finite]).sum(), total, rel_tol=1e-9)
    assert np.array_equal(finite, np.asarray(counts) > 0)


@settings(max_examples=1000, deadline=None)
@given(st.integers(1, 7), st.data())
def test_exact_dos_normalization(n, data):
    fixed = set()
    if n > 1 and data.draw(st.booleans()):
        fixed = {(data.draw(st.integers(1, n)), data.draw(st.integers(1, n)))}
    d = exact_dos(n, fixed)
    assert d.sum() == math.factorial(n - len(fixed))


finite_values = st.lists(st.floats(0.0, 1e6), min_size=1, max_size=60)


@CASES
@given(finite_values.filter(lambda v: sum(v) > 0), st.data())
def test_lorenz_convexity(values, data):
    weights = None
    if data.draw(st.booleans()):
        weights = data.draw(st.lists(st.floats(0.01, 10.0), min_size=len(values), max_size=len(values)))
    c = lorenz_curve(values, weights)
    assert c.u[0] == 0 and c.L[0] == 0 and c.u[-1] == 1 and c.L[-1] == 1
    assert midpoint_convex(c, atol=1e-9)
    assert np.all(c.L <= c.u + 1e-9)


@CASES
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=60), st.data())
def test_rearrangement_identity(values, data):
    weights = None
    if data.draw(st.booleans()):
        weights = data.draw(st.lists(st.floats(0.01, 10.0), min_size=len(values), max_size=len(values)))
    integral = lambda_inverse(empirical_survival(values, weights)).integral()
    mean = np.average(values, weights=weights)
    scale = max(1.0, float(np.max(np.abs(values))))
    assert abs(integral - mean) <= 1e-9 * scale
