"""Result types shared by the estimators, plus the small closed-form helpers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp


@dataclass
class Estimate:
    """A solution-count estimate on the log scale.

    ``stderr_log`` is the standard error of ``log_count``.  A zero count has
    ``log_count = -inf`` and may carry a one-sided ``upper_bound``.
    """
    method: str
    n: int
    embedding: str
    log_count: float
    stderr_log: float
    budget_used: int
    diagnostics: dict = field(default_factory=dict)
    upper_bound: float | None = None

    @property
    def count(self) -> float:
        return math.exp(self.log_count) if self.log_count > -math.inf else 0.0

    def interval(self, z: float = 1.96) -> tuple:
        """Log-normal confidence interval for the count."""
        if self.log_count == -math.inf:
            return 0.0, self.upper_bound if self.upper_bound is not None else 0.0
        return (math.exp(self.log_count - z * self.stderr_log),
                math.exp(self.log_count + z * self.stderr_log))

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "n": self.n,
            "embedding": self.embedding,
            "count": self.count,
            "log_count": self.log_count if self.log_count > -math.inf else None,
            "stderr_log": self.stderr_log,
            "budget_used": int(self.budget_used),
            "diagnostics": self.diagnostics,
        }
        if self.upper_bound is not None:
            out["upper_bound"] = self.upper_bound
        return out


@dataclass
class LevelSchedule:
    """Energy thresholds m_0 > m_1 > ... > m_T = 0 with per-level ratio estimates."""
    thresholds: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    cv: list = field(default_factory=list)
    forced: list = field(default_factory=list)

    @property
    def log_product(self) -> float:
        if any(r <= 0 for r in self.ratios):
            return -math.inf
        return float(sum(math.log(r) for r in self.ratios))

    def to_dict(self) -> dict:
        return {
            "thresholds": [int(m) for m in self.thresholds],
            "ratios": [float(r) for r in self.ratios],
            "cv": [float(c) for c in self.cv],
            "forced": [bool(f) for f in self.forced],
        }


@dataclass
class DensityOfStates:
    """log N(s) per energy level; unvisited levels hold -inf."""
    log_n: np.ndarray
    histogram: np.ndarray | None = None

    @property
    def levels(self) -> np.ndarray:
        return np.arange(self.log_n.shape[0])

    @classmethod
    def from_counts(cls, counts) -> "DensityOfStates":
        counts = np.asarray(counts, dtype=np.float64)
        with np.errstate(divide="ignore"):
            return cls(np.log(counts), counts.copy())

    def normalized(self, total: float) -> "DensityOfStates":
        """Shift log N so that sum_s N(s) equals ``total``."""
        finite = np.isfinite(self.log_n)
        if not finite.any():
            raise ValueError("density of states has no visited level")
        shift = math.log(total) - logsumexp(self.log_n[finite])
        out = np.where(finite, self.log_n + shift, -np.inf)
        return DensityOfStates(out, None if self.histogram is None else self.histogram.copy())

    @property
    def counts(self) -> np.ndarray:
        return np.exp(self.log_n)

    def log_cumulative(self) -> np.ndarray:
        """log Z(s) = log sum_{t <= s} N(t)."""
        return np.logaddexp.accumulate(self.log_n)

    def to_dict(self) -> dict:
        out = {
            "levels": self.levels.tolist(),
            "log_n": [float(v) if np.isfinite(v) else None for v in self.log_n],
        }
        if self.histogram is not None:
            out["histogram"] = [int(h) for h in self.histogram]
        return out


def product_variance(level_stats) -> float:
    """Relative MSE of a product of independent ratio estimates.

    ``level_stats`` holds ``(mu_t, sigma_t)`` pairs; returns
    ``prod(sigma_t**2 / mu_t**2 + 1) - 1``.
    """
    out = 1.0
    for mu, sigma in level_stats:
        if mu == 0:
            raise ZeroDivisionError("a level has zero mean ratio")
        if sigma < 0:
            raise ValueError("standard deviations must be non-negative")
        out *= (sigma / mu) ** 2 + 1.0
    return out - 1.0


class LevelWeight:
    """Log-weight over energy levels, usable as a chain weight function."""

    def __init__(self, kind: str, table: np.ndarray):
        self.kind = kind
        self.table = table

    def __call__(self, s: int) -> float:
        v = self.table[s]
        if not np.isfinite(v):
            raise ValueError(f"energy level {s} has zero density")
        return float(v)


ENSEMBLES = ("canonical", "multicanonical", "one_over_k")


def ensemble_weight(kind: str, dos: DensityOfStates) -> LevelWeight:
    """Canonical ``-s``, multicanonical ``-log N(s)`` or 1/k ``-log Z(s)`` weights."""
    s = dos.levels.astype(np.float64)
    if kind == "canonical":
        table = -s
    elif kind == "multicanonical":
        table = np.where(np.isfinite(dos.log_n), -dos.log_n, -np.inf)
    elif kind in ("one_over_k", "1/k"):
        table = -dos.log_cumulative()
        table = np.where(np.isfinite(dos.log_n), table, -np.inf)
        kind = "one_over_k"
    else:
        raise ValueError(f"unknown ensemble {kind!r}; expected one of {ENSEMBLES}")
    return LevelWeight(kind, np.asarray(table, dtype=np.float64))
