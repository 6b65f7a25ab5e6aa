import math

import numpy as np
import pytest
from scipy import stats

from queenscount.exact import all_permutations, exact_dos, permutation_energies
from queenscount.quantile import (concentration_curve, empirical_survival, lambda_inverse, lorenz_curve,
                                  midpoint_convex, nested_grid, riemann_measure_estimate, riemann_probe,
                                  riemann_quantile_estimate, trapezoid_lambda_estimate)


def test_survival_constant_values():
    Z = empirical_survival([1, 1, 1])
    assert Z(0.999) == 1.0 and Z(1.0) == 0.0 and Z(5.0) == 0.0
    lam = lambda_inverse(Z)
    assert np.all(lam(np.array([0.0, 0.3, 0.999])) == 1.0)


def test_survival_two_points():
    assert empirical_survival([0, 1])(0.5) == 0.5


def test_survival_non_increasing_with_limits():
    Z = empirical_survival(np.random.default_rng(0).normal(size=200))
    t = np.linspace(-5, 5, 400)
    z = Z(t)
    assert np.all(np.diff(z) <= 0)
    assert Z(-1e9) == 1.0 and Z(1e9) == 0.0


def test_survival_from_dos_n4():
    L = np.exp(-permutation_energies(all_permutations(4)).astype(float))
    Z = empirical_survival(L)
    dos = exact_dos(4)
    levels = np.nonzero(dos)[0]
    for s in levels:
        # mass strictly above e^-s is the mass with energy strictly below s
        assert Z(math.exp(-s)) == pytest.approx(dos[:s].sum() / 24, abs=1e-15)
    assert np.allclose(Z.mass, dos[levels][::-1] / 24)


def test_lambda_outside_domain():
    lam = lambda_inverse(empirical_survival([0.2, 0.5]))
    with pytest.raises(ValueError):
        lam(1.0)
    with pytest.raises(ValueError):
        lam(-0.1)


def test_rearrangement_identity_exact():
    v = np.random.default_rng(1).exponential(size=37)
    assert lambda_inverse(empirical_survival(v)).integral() == pytest.approx(v.mean(), rel=1e-12)


def test_lambda_round_trip_order_statistics():
    v = np.array([3.0, 1.0, 2.0, 2.0, 5.0])
    Z = empirical_survival(v)
    lam = lambda_inverse(Z)
    # just below each knot Z-value, Lambda returns the value whose mass sits there
    u = np.unique(v)
    for k, y in enumerate(u):
        assert lam(np.nextafter(Z(np.nextafter(y, -np.inf)), 0.0)) == y


def test_lambda_uniform_sample_close_to_one_minus_s():
    u = np.random.default_rng(2).random(100_000)
    lam = lambda_inverse(empirical_survival(u))
    s = np.linspace(0, 0.999, 1000)
    assert np.max(np.abs(lam(s) - (1 - s))) < 0.01


def test_lambda_of_uniform_matches_likelihood_distribution_n5():
    rng = np.random.default_rng(3)
    L_all = np.exp(-permutation_energies(all_permutations(5)).astype(float))
    lam = lambda_inverse(empirical_survival(L_all))
    a = lam(rng.random(3000))
    b = L_all[rng.integers(0, L_all.size, 3000)]
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_riemann_exact_cases():
    u = np.random.default_rng(4).random(17)
    assert riemann_quantile_estimate(u, lambda x: np.full_like(x, 2.5)) == pytest.approx(2.5, abs=1e-14)
    assert riemann_quantile_estimate(u, lambda x: x) == pytest.approx(0.5, abs=1e-14)
    with pytest.raises(ValueError):
        riemann_quantile_estimate([0.5], lambda x: x)


def test_riemann_without_endpoints_is_biased_for_constants():
    u = np.random.default_rng(5).random(10)
    assert riemann_quantile_estimate(u, np.ones_like, augment=False) < 1.0


def test_measure_estimator_converges():
    u = np.random.default_rng(6).random(50_000)
    assert riemann_measure_estimate(u, lambda x: x * x, np.ones_like) == pytest.approx(1 / 3, abs=1e-3)
    with pytest.raises(ValueError):
        riemann_measure_estimate([0.1], lambda x: x, np.ones_like)


def test_probe_slope_quadratic():
    r = riemann_probe("quadratic", repeats=50, seed=0)
    assert r["slope"] <= -3.0
    assert r["sizes"] == [2 ** k for k in range(4, 13)]


def test_probe_exact_integrands_have_no_error():
    assert max(riemann_probe("linear", sizes=[16, 64], repeats=3)["mse"]) < 1e-28
    r = riemann_probe("const", sizes=[16, 64], repeats=3)
    assert max(r["mse"]) < 1e-28


def test_probe_deterministic():
    assert riemann_probe("exp", sizes=[16, 32], repeats=5, seed=9) == \
        riemann_probe("exp", sizes=[16, 32], repeats=5, seed=9)
    with pytest.raises(ValueError):
        riemann_probe("quadratic", estimator="other")


def test_trapezoid_constant_and_linear():
    grid = nested_grid(1000, 20)
    assert trapezoid_lambda_estimate(lambda s: np.ones_like(s), grid) == pytest.approx(1.0)
    assert trapezoid_lambda_estimate(lambda s: 1 - s, grid) == pytest.approx(0.5, abs=1e-3)


def test_trapezoid_beats_rectangle_on_linear_and_convex():
    grid = nested_grid(200, 20)
    for f, truth in ((lambda s: 1 - s, 0.5), (lambda s: (1 - s) ** 2, 1 / 3)):
        t = abs(trapezoid_lambda_estimate(f, grid, "trapezoid") - truth)
        r = abs(trapezoid_lambda_estimate(f, grid, "rectangle") - truth)
        assert t <= r


def test_trapezoid_sampled_ordinates_and_errors():
    grid = np.array([0.8, 0.5, 0.2])
    assert trapezoid_lambda_estimate(np.array([2.0, 2.0, 2.0]), grid) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        trapezoid_lambda_estimate(np.array([]), np.array([]))
    with pytest.raises(ValueError):
        trapezoid_lambda_estimate(lambda s: s, np.array([0.2, 0.5]))
    with pytest.raises(ValueError):
        trapezoid_lambda_estimate(lambda s: s, grid, rule="simpson")


def test_lorenz_examples():
    eq = lorenz_curve([3.0, 3.0, 3.0])
    t = np.linspace(0, 1, 11)
    assert np.allclose(eq(t), t)
    c = lorenz_curve([0, 0, 0, 1])
    assert np.allclose(c(np.array([0.0, 0.5, 0.75])), 0.0)
    assert c(0.875) == pytest.approx(0.5)
    assert c(1.0) == 1.0
    with pytest.raises(ValueError):
        lorenz_curve([0, 0])
    with pytest.raises(ValueError):
        lorenz_curve([-1, 2])


def test_lorenz_from_dos_n4():
    L = np.exp(-permutation_energies(all_permutations(4)).astype(float))
    c = lorenz_curve(L)
    dos = exact_dos(4)
    s = np.nonzero(dos)[0][::-1]      # ascending likelihood
    p = dos[s] / 24
    share = p * np.exp(-s)
    assert np.allclose(c.u, np.concatenate(([0], np.cumsum(p))))
    assert np.allclose(c.L, np.concatenate(([0], np.cumsum(share) / share.sum())))
    assert midpoint_convex(c)


def test_concentration_examples():
    u = np.linspace(0, 1, 21)
    assert np.allclose(concentration_curve(np.ones(50), u), u)
    r = np.random.default_rng(7).exponential(size=100)
    phi = concentration_curve(r, np.array([0.0, 1.0]))
    assert phi[0] == 0.0
    assert phi[1] == pytest.approx(r.mean())
    with pytest.raises(ValueError):
        concentration_curve([], u)


def test_importance_identity_uniform_vs_boltzmann_n4():
    E = permutation_energies(all_permutations(4)).astype(float)
    L = (E == 0).astype(float)
    P = np.full(24, 1 / 24)
    Q = np.exp(-E) / np.exp(-E).sum()
    lhs = float(np.sum(L * P))
    ratio = P / Q
    rhs = float(np.sum(L * ratio * Q))
    assert lhs == pytest.approx(2 / 24, rel=1e-12)
    assert rhs == pytest.approx(lhs, rel=1e-12)
    # the ratios have mean one under Q, so the concentration curve ends at one
    phi = concentration_curve(ratio, np.array([1.0]), weights=Q)
    assert phi[0] == pytest.approx(1.0, rel=1e-12)
    dos = exact_dos(4)
    z0 = float(np.sum(dos * np.exp(-np.arange(len(dos))))) / 24
    assert float(np.sum(L * Q)) == pytest.approx(lhs / z0, rel=1e-12)
