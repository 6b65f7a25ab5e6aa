import math

import numpy as np
import pytest
from scipy import stats

from conftest import columns_energy, pair_energy
from queenscount.board import (BoardSpec, Embedding, Placement, Population, Reassign, Swap, apply_move,
                               batch_energy, energy, energy_delta_reassign, energy_delta_swap,
                               format_columns, format_fixed_cells, is_solution, parse_columns,
                               parse_fixed_cells, random_cells_energy, random_columns, random_placement,
                               state_space_size, symmetric_images)
from queenscount.errors import IllegalMove, InfeasibleSpec
from queenscount.exact import all_permutations

FIG1 = (6, 4, 7, 1, 8, 2, 5, 3)


def perm(n, cols, fixed=()):
    return Placement.from_columns(BoardSpec(n, "permutation", fixed), cols)


def test_figure_solution_has_zero_energy():
    p = perm(8, FIG1)
    assert energy(p) == 0
    assert is_solution(p)
    assert columns_energy(FIG1) == 0


def test_main_diagonal_energy():
    assert energy(perm(4, (1, 2, 3, 4))) == 6 == math.comb(4, 2)
    assert not is_solution(perm(4, (1, 2, 3, 4)))


def test_four_queens_solution():
    assert energy(perm(4, (2, 4, 1, 3))) == 0
    assert columns_energy((2, 4, 1, 3)) == 0


def test_two_queens_has_no_solution():
    assert not is_solution(perm(2, (1, 2)))
    assert not is_solution(perm(2, (2, 1)))


def test_energy_matches_pairwise_oracle_all_embeddings():
    rng = np.random.default_rng(1)
    for emb in ("permutation", "rowwise"):
        spec = BoardSpec(6, emb)
        for _ in range(50):
            p = random_placement(spec, rng)
            assert energy(p) == columns_energy(p.columns)
    spec = BoardSpec(5, "binary")
    for _ in range(50):
        p = random_placement(spec, rng)
        assert energy(p) == pair_energy(sorted(p.occupied_cells()))


def test_swap_delta_example():
    p = perm(4, (1, 2, 3, 4))
    assert energy_delta_swap(p, 1, 2) == -4
    q = apply_move(p, Swap(1, 2))
    assert q.columns == (2, 1, 3, 4)
    assert energy(q) == 2
    assert p.columns == (1, 2, 3, 4)


def test_swap_involution_and_solution_minimum():
    p = perm(4, (2, 4, 1, 3))
    for i in range(1, 5):
        for j in range(1, 5):
            if i != j:
                assert energy_delta_swap(p, i, j) >= 0
                back = apply_move(apply_move(p, Swap(i, j)), Swap(i, j))
                assert back == p


def test_swap_same_row_rejected():
    with pytest.raises(IllegalMove):
        energy_delta_swap(perm(4, (1, 2, 3, 4)), 2, 2)


def test_reassign_example():
    spec = BoardSpec(4, "rowwise")
    p = Placement.from_columns(spec, (1, 2, 1, 4))
    q = apply_move(p, Reassign(3, 3))
    assert q.columns == (1, 2, 3, 4)
    assert energy(q) == energy(p) + energy_delta_reassign(p, 3, 3)


def test_moves_respect_fixed_cells():
    p = perm(4, (2, 4, 1, 3), fixed={(1, 2)})
    with pytest.raises(IllegalMove):
        apply_move(p, Swap(1, 3))
    with pytest.raises(IllegalMove):
        energy_delta_swap(p, 2, 1)
    r = Placement.from_columns(BoardSpec(4, "rowwise", {(2, 4)}), (1, 4, 1, 1))
    with pytest.raises(IllegalMove):
        apply_move(r, Reassign(2, 1))
    with pytest.raises(IllegalMove):
        apply_move(r, Reassign(1, 5))


def test_wrong_move_kind_for_embedding():
    with pytest.raises(IllegalMove):
        apply_move(perm(4, (1, 2, 3, 4)), Reassign(1, 2))


def test_placement_must_cover_fixed_cells():
    with pytest.raises(IllegalMove):
        perm(4, (1, 2, 3, 4), fixed={(1, 2)})


def test_infeasible_specs():
    with pytest.raises(InfeasibleSpec):
        BoardSpec(4, "permutation", {(1, 1), (1, 2)})
    with pytest.raises(InfeasibleSpec):
        BoardSpec(4, "permutation", {(1, 1), (2, 1)})
    with pytest.raises(InfeasibleSpec):
        BoardSpec(4, "permutation", {(5, 1)})
    BoardSpec(4, "rowwise", {(1, 1), (2, 1)})
    with pytest.raises(ValueError):
        BoardSpec(0)


def test_state_space_sizes():
    assert state_space_size(BoardSpec(8, "binary")) == 4_426_165_368
    assert state_space_size(BoardSpec(8, "rowwise")) == 16_777_216
    assert state_space_size(BoardSpec(8, "permutation")) == 40_320
    assert state_space_size(BoardSpec(8, "permutation", {(1, 1)})) == math.factorial(7)
    assert state_space_size(BoardSpec(8, "rowwise", {(1, 1)})) == 8 ** 7
    assert state_space_size(BoardSpec(8, "binary", {(1, 1)})) == math.comb(63, 7)


def test_singleton_space():
    p = random_placement(BoardSpec(1), np.random.default_rng(0))
    assert p.columns == (1,)
    assert is_solution(p)


def test_random_placement_respects_fixed_cell():
    rng = np.random.default_rng(0)
    spec = BoardSpec(4, "permutation", {(1, 3)})
    for _ in range(200):
        assert random_placement(spec, rng).columns[0] == 3
    X = random_columns(spec, 500, rng)
    assert np.all(X[:, 0] == 2)


def test_random_placement_uniform_chi2_n8():
    rng = np.random.default_rng(123)
    spec = BoardSpec(8)
    perms = all_permutations(8).astype(np.int64)
    weights = 8 ** np.arange(8)
    index = {int(k): i for i, k in enumerate(perms @ weights)}
    X = random_columns(spec, 4_032_000, rng)
    counts = np.bincount([index[int(k)] for k in X @ weights], minlength=perms.shape[0])
    p = stats.chisquare(counts).pvalue
    assert p > 1e-3


def test_random_placement_single_draws_uniform_small():
    rng = np.random.default_rng(7)
    spec = BoardSpec(4)
    seen = {}
    for _ in range(24_000):
        c = random_placement(spec, rng).columns
        seen[c] = seen.get(c, 0) + 1
    assert len(seen) == 24
    assert stats.chisquare(list(seen.values())).pvalue > 1e-3


def test_binary_energy_batch_matches_pairwise():
    rng = np.random.default_rng(3)
    spec = BoardSpec(4, "binary")
    e = random_cells_energy(spec, 2000, rng)
    assert e.min() >= 0
    # all C(16, 4) subsets, exhaustive mean as the oracle
    import itertools
    cells = [(r, c) for r in range(1, 5) for c in range(1, 5)]
    exact = np.mean([pair_energy(s) for s in itertools.combinations(cells, 4)])
    assert abs(e.mean() - exact) < 4 * e.std() / math.sqrt(e.size)


def test_batch_and_population_energy():
    rng = np.random.default_rng(5)
    spec = BoardSpec(7, "rowwise")
    X = random_columns(spec, 300, rng)
    e = batch_energy(X)
    pop = Population(spec, X)
    assert np.array_equal(e, pop.E)
    assert all(e[k] == columns_energy(X[k] + 1) for k in range(300))


def test_symmetric_images_preserve_energy():
    rng = np.random.default_rng(9)
    for emb in ("permutation", "binary"):
        spec = BoardSpec(6, emb)
        for _ in range(20):
            p = random_placement(spec, rng)
            imgs = symmetric_images(p)
            assert len(imgs) == 8
            assert {energy(q) for q in imgs} == {energy(p)}


def test_text_formats_round_trip():
    assert parse_columns("6,4,7,1,8,2,5,3") == FIG1
    assert format_columns(FIG1) == "6,4,7,1,8,2,5,3"
    cells = parse_fixed_cells("1,2; 3,4")
    assert cells == {(1, 2), (3, 4)}
    assert format_fixed_cells(cells) == "1,2;3,4"
    assert parse_fixed_cells("") == frozenset()
    for bad in ("1", "1,2,3", "a,b"):
        with pytest.raises(ValueError):
            parse_fixed_cells(bad)


def test_embedding_enum_values():
    assert {e.value for e in Embedding} == {"permutation", "rowwise", "binary"}
