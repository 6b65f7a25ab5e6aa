"""Quantile reordering: survival curves, their pseudo-inverse, Lorenz curves and
ordered-draw quadrature.

All empirical curves are right-continuous step functions with tied values
merged into one knot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import make_rng


def _weighted_unique(values, weights=None):
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("need at least one value")
    w = np.ones_like(v) if weights is None else np.asarray(weights, dtype=np.float64).ravel()
    if w.shape != v.shape:
        raise ValueError("weights and values differ in length")
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive total")
    keep = w > 0
    u, inv = np.unique(v[keep], return_inverse=True)
    mass = np.bincount(inv, weights=w[keep], minlength=u.size)
    return u, mass / mass.sum()


@dataclass(frozen=True)
class SurvivalCurve:
    """Z(y) = mass strictly above y, stored at the distinct values ``y`` (ascending)."""
    y: np.ndarray
    above: np.ndarray

    def __call__(self, t):
        t = np.asarray(t, dtype=np.float64)
        k = np.searchsorted(self.y, t, side="right")
        ext = np.concatenate(([1.0], self.above))
        return ext[k]

    @property
    def mass(self) -> np.ndarray:
        return -np.diff(np.concatenate(([1.0], self.above)))


def empirical_survival(values, weights=None) -> SurvivalCurve:
    """Empirical 1 - F of ``values`` (optionally weighted)."""
    u, p = _weighted_unique(values, weights)
    above = np.clip(1.0 - np.cumsum(p), 0.0, 1.0)
    above[-1] = 0.0
    return SurvivalCurve(u, above)


@dataclass(frozen=True)
class LambdaCurve:
    """Lambda(s) = sup{y : Z(y) > s} on [0, 1).

    With breakpoints z_0 > z_1 > ... > z_K = 0 and values v_k,
    Lambda(s) = v_j for the first j with z_j <= s.
    """
    z: np.ndarray
    v: np.ndarray

    def __call__(self, s):
        s = np.asarray(s, dtype=np.float64)
        if np.any((s < 0) | (s >= 1)):
            raise ValueError("Lambda is defined on [0, 1)")
        j = np.searchsorted(-self.z, -s, side="left")
        return self.v[j]

    def integral(self) -> float:
        """Exact integral over [0, 1] of the step function."""
        widths = np.concatenate(([1.0], self.z[:-1])) - self.z
        return float(np.dot(widths, self.v))


def lambda_inverse(curve: SurvivalCurve) -> LambdaCurve:
    return LambdaCurve(curve.above.copy(), curve.y.copy())


def riemann_quantile_estimate(draws, L, augment: bool = True) -> float:
    """Trapezoid sum of L over sorted uniform draws on [0, 1].

    With ``augment`` the nodes 0 and 1 are added, which makes the rule exact
    for constant and linear L.
    """
    u = np.sort(np.asarray(draws, dtype=np.float64).ravel())
    if u.size < 2:
        raise ValueError("need at least two draws")
    if augment:
        u = np.concatenate(([0.0], u, [1.0]))
    f = np.asarray(L(u), dtype=np.float64)
    return float(np.sum(np.diff(u) * (f[1:] + f[:-1]) / 2))


def riemann_measure_estimate(draws, L, density) -> float:
    """Sum of (x_(i+1) - x_(i)) p(x_(i)) L(x_(i)) over the ordered sample."""
    x = np.sort(np.asarray(draws, dtype=np.float64).ravel())
    if x.size < 2:
        raise ValueError("need at least two draws")
    head = x[:-1]
    return float(np.sum(np.diff(x) * np.asarray(density(head)) * np.asarray(L(head))))


def nested_grid(m: int, n: int) -> np.ndarray:
    """Deterministic grid s_i = exp(-i / n), i = 1..m."""
    return np.exp(-np.arange(1, m + 1) / n)


def trapezoid_lambda_estimate(lam, grid, rule: str = "trapezoid") -> float:
    """Quadrature of Lambda over [0, 1] at a decreasing grid s_1 > ... > s_m.

    The grid is closed with s_0 = 1 and s_(m+1) = 0.  ``lam`` is either a
    callable, evaluated at every node including the two ends, or the sampled
    ordinates Lambda(s_i), extended as constants to the ends.
    ``rule="rectangle"`` weights Lambda(s_i) by s_(i-1) - s_i;
    ``rule="trapezoid"`` weights it by (s_(i-1) - s_(i+1)) / 2.
    """
    s = np.asarray(grid, dtype=np.float64).ravel()
    if s.size == 0:
        raise ValueError("empty grid")
    if np.any(np.diff(s) >= 0) or s[0] > 1 or s[-1] <= 0:
        raise ValueError("grid must be strictly decreasing in (0, 1]")
    if callable(lam):
        f = np.asarray(lam(s), dtype=np.float64)
        f_hi = float(lam(np.float64(1.0))) if s[0] < 1 else f[0]
        f_lo = float(lam(np.float64(0.0)))
    else:
        f = np.asarray(lam, dtype=np.float64).ravel()
        if f.shape != s.shape:
            raise ValueError("ordinates and grid differ in length")
        f_hi, f_lo = f[0], f[-1]
    nodes = np.concatenate(([1.0], s, [0.0]))
    vals = np.concatenate(([f_hi], f, [f_lo]))
    if rule == "rectangle":
        return float(np.sum(vals[1:] * (nodes[:-1] - nodes[1:])))
    if rule == "trapezoid":
        return float(np.sum((nodes[:-1] - nodes[1:]) * (vals[:-1] + vals[1:]) / 2))
    raise ValueError("rule must be 'rectangle' or 'trapezoid'")


@dataclass(frozen=True)
class LorenzCurve:
    """Knots (u_k, L_k) of a Lorenz curve, linear in between."""
    u: np.ndarray
    L: np.ndarray

    def __call__(self, t):
        return np.interp(t, self.u, self.L)


def lorenz_curve(values, weights=None) -> LorenzCurve:
    """Normalized cumulative sum of the sorted values."""
    v, p = _weighted_unique(values, weights)
    if np.any(v < 0):
        raise ValueError("values must be nonnegative")
    share = v * p
    total = share.sum()
    if total <= 0:
        raise ValueError("all values are zero")
    u = np.concatenate(([0.0], np.cumsum(p)))
    L = np.concatenate(([0.0], np.cumsum(share) / total))
    u[-1] = 1.0
    L[-1] = 1.0
    return LorenzCurve(u, L)


def concentration_curve(ratios, u_grid, weights=None) -> np.ndarray:
    """phi(u) = integral_0^u of the quantile function of the likelihood ratios.

    Unnormalized, so phi(1) is the mean ratio (one when P << Q exactly).
    """
    r, p = _weighted_unique(ratios, weights)
    if np.any(r < 0):
        raise ValueError("likelihood ratios must be nonnegative")
    u = np.concatenate(([0.0], np.cumsum(p)))
    u[-1] = 1.0
    phi = np.concatenate(([0.0], np.cumsum(r * p)))
    return np.interp(np.asarray(u_grid, dtype=np.float64), u, phi)


def midpoint_convex(curve: LorenzCurve, atol: float = 1e-12) -> bool:
    """Chord test at every adjacent knot triple."""
    u, L = curve.u, curve.L
    if u.size < 3:
        return True
    a, b, c = u[:-2], u[1:-1], u[2:]
    chord = L[:-2] + (L[2:] - L[:-2]) * (b - a) / np.where(c > a, c - a, 1.0)
    return bool(np.all(L[1:-1] <= chord + atol))


INTEGRANDS = {
    "const": (lambda u: np.ones_like(u), 1.0),
    "linear": (lambda u: u, 0.5),
    "quadratic": (lambda u: u * u, 1.0 / 3.0),
    "exp": (np.exp, math.e - 1.0),
}

DEFAULT_SIZES = tuple(2 ** k for k in range(4, 13))


def riemann_probe(integrand: str = "quadratic", sizes=DEFAULT_SIZES, repeats: int = 50, seed: int = 0,
                  estimator: str = "riemann") -> dict:
    """Error of the ordered-draw estimator against N, with fitted log-log slopes.

    ``mse`` averages the squared error over ``repeats`` seeds; ``slope`` is the
    least-squares slope of log(mse) on log(N).  ``abs_slope`` does the same for
    the mean absolute error.  Slopes are None when an error is exactly zero.
    """
    L, truth = INTEGRANDS[integrand]
    if estimator == "riemann":
        est = lambda u: riemann_quantile_estimate(u, L)
    elif estimator == "measure":
        est = lambda u: riemann_measure_estimate(u, L, np.ones_like)
    else:
        raise ValueError("estimator must be 'riemann' or 'measure'")
    sizes = [int(N) for N in sizes]
    if any(N < 2 for N in sizes) or repeats < 1:
        raise ValueError("sizes must be >= 2 and repeats >= 1")
    mse, mae = [], []
    for k, N in enumerate(sizes):
        rng = make_rng(seed, "probe", replica=k)
        err = np.array([est(rng.random(N)) - truth for _ in range(repeats)])
        mse.append(float(np.mean(err ** 2)))
        mae.append(float(np.mean(np.abs(err))))

    def fit(y):
        if len(sizes) < 2 or min(y) <= 0:
            return None
        return float(np.polyfit(np.log(sizes), np.log(y), 1)[0])

    return {"integrand": integrand, "estimator": estimator, "truth": truth, "repeats": repeats,
            "sizes": sizes, "mse": mse, "mean_abs_error": mae, "slope": fit(mse), "abs_slope": fit(mae)}
