"""Experiment sweeps against the exact oracle, reference asymptotics and report output."""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .board import BoardSpec, Embedding
from .exact import count_exact

EXACT_LIMIT = 14
ALPHA = 1.942
ALPHA_BAND = 0.003
# orders of magnitude quoted alongside the asymptotic formula
QUOTED_LOG10 = {25: 15.0, 10000: 31560.0}

CSV_FIELDS = ("method", "n", "seed", "count", "log_count", "stderr_log", "exact", "rel_err_log", "elapsed_ms")


def _plain(x):
    """Recursively convert to JSON-ready builtins, 12 significant digits, non-finite -> None."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return float(f"{x:.12g}")
    if isinstance(x, Embedding):
        return x.value
    return x


def canonical_json(obj) -> str:
    """Sorted keys, floats at 12 significant digits, NaN and infinities as null."""
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


METHODS = ("naive", "split", "ce", "nested", "splitsamp", "wanglandau")
MODULE_OF = {"naive": "naive", "split": "split", "ce": "ce", "nested": "nested",
             "splitsamp": "splitsamp", "wanglandau": "wanglandau"}
DEFAULT_EMBEDDING = {"ce": Embedding.ROWWISE}


def _single(method: str, spec: BoardSpec, rng, budget, params: dict):
    from . import estimators as est
    p = dict(params)
    if method == "naive":
        N = int(p.pop("N", budget if budget is not None else 1_000_000))
        if budget is not None:
            N = min(N, int(budget))
        return est.naive_count(spec, N, seed=rng, **p)
    if method == "split":
        return est.splitting_count(spec, seed=rng, budget=budget, **p)[0]
    if method == "ce":
        return est.ce_count(spec, seed=rng, budget=budget, **p)
    if method == "nested":
        return est.nested_sampling_count(spec, seed=rng, budget=budget, **p)
    if method == "splitsamp":
        return est.split_sampling_count(spec, seed=rng, budget=budget, **p)
    if method == "wanglandau":
        return est.wang_landau_count(spec, seed=rng, budget=budget, **p)[0]
    raise ValueError(f"unknown method {method!r}")


def estimate(method: str, spec: BoardSpec, seed: int = 0, budget: int | None = None, replicas: int = 1,
             threads: int = 1, **params):
    """Run ``replicas`` independent copies of one estimator and merge them.

    ``budget`` applies to each replica.
    """
    from .estimators import merge_estimates, run_replicas
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    results = run_replicas(lambda g: _single(method, spec, g, budget, params), MODULE_OF[method],
                           replicas, seed, threads)
    return merge_estimates(results)


@dataclass
class ExperimentConfig:
    method: str
    n_values: list
    seeds: list = field(default_factory=lambda: [0])
    embedding: str = "permutation"
    budget: int | None = None
    params: dict = field(default_factory=dict)
    replicas: int = 1
    threads: int = 1
    exact: bool = True
    timing: bool = False
    output: str | None = None

    def __post_init__(self):
        if self.method != "exact" and self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        self.n_values = [int(n) for n in self.n_values]
        if any(n < 1 for n in self.n_values):
            raise ValueError("board sizes must be positive")
        if (self.exact or self.method == "exact") and any(n > EXACT_LIMIT for n in self.n_values):
            raise ValueError(f"exact validation needs n <= {EXACT_LIMIT}")
        self.seeds = [int(s) for s in self.seeds]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "n" in d:
            n = d.pop("n")
            d["n_values"] = n if isinstance(n, list) else [n]
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)


@dataclass
class Report:
    config: dict
    records: list
    summary: dict

    def to_dict(self) -> dict:
        return {"config": self.config, "records": self.records, "summary": self.summary}

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.records:
            row = {}
            for k in CSV_FIELDS:
                v = _plain(r.get(k))
                row[k] = "" if v is None else v
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        return cls(d["config"], d["records"], d["summary"])


def _exact_table(ns, fixed):
    return {n: count_exact(n, fixed).count for n in sorted(set(ns))}


def run_experiment(config: ExperimentConfig) -> Report:
    """Run every (n, seed) cell in order; a failing cell is recorded, not raised."""
    exact = _exact_table(config.n_values, ()) if (config.exact or config.method == "exact") else {}
    records = []
    for n in config.n_values:
        for seed in config.seeds:
            rec = {"method": config.method, "n": n, "seed": seed, "exact": exact.get(n)}
            t0 = time.perf_counter()
            try:
                if config.method == "exact":
                    c = exact[n]
                    rec.update(count=c, log_count=math.log(c) if c > 0 else None, stderr_log=0.0,
                               budget_used=0)
                else:
                    emb = DEFAULT_EMBEDDING.get(config.method, Embedding(config.embedding))
                    e = estimate(config.method, BoardSpec(n, emb), seed, config.budget, config.replicas,
                                 config.threads, **config.params)
                    rec.update(count=e.count, log_count=e.log_count if e.count > 0 else None,
                               stderr_log=e.stderr_log, budget_used=int(e.budget_used))
            except Exception as exc:  # noqa: BLE001 - per-cell failure is data
                rec.update(count=None, log_count=None, stderr_log=None, budget_used=None,
                           error=f"{type(exc).__name__}: {exc}")
            rec["elapsed_ms"] = (time.perf_counter() - t0) * 1000 if config.timing else None
            rec["rel_err_log"] = rel_err_log(rec["count"], rec["exact"])
            rec["covered"] = covers(rec, rec["exact"])
            records.append(rec)
    # threads never changes results, so it is left out to keep reports byte-identical
    echo = {k: v for k, v in asdict(config).items() if k != "threads"}
    return Report(echo, records, summarize(records))


def rel_err_log(count, exact):
    """|log(count / exact)|; None when the exact count is unknown or zero."""
    if exact is None or exact == 0 or count is None:
        return None
    if count <= 0:
        return math.inf
    return abs(math.log(count / exact))


def covers(rec: dict, exact, z: float = 1.96):
    """Whether the nominal 95% log-normal interval contains the exact count."""
    if exact is None or rec.get("count") is None:
        return None
    if rec["count"] == 0:
        return exact == 0
    se = rec["stderr_log"]
    return bool(abs(math.log(exact / rec["count"])) <= z * se) if exact > 0 else False


def summarize(records: list) -> dict:
    out = {}
    for n in sorted({r["n"] for r in records}):
        rows = [r for r in records if r["n"] == n]
        errs = [r["rel_err_log"] for r in rows if r["rel_err_log"] is not None]
        cov = [r["covered"] for r in rows if r["covered"] is not None]
        counts = [r["count"] for r in rows if r["count"] is not None]
        out[str(n)] = {
            "cells": len(rows),
            "failures": sum(1 for r in rows if "error" in r),
            "mean_count": float(np.mean(counts)) if counts else None,
            "median_rel_err_log": float(np.median(errs)) if errs else None,
            "coverage": sum(cov) / len(cov) if cov else None,
        }
    return out


def simkin_reference(n: int) -> dict:
    """Asymptotic count (n e^-alpha)^n on the natural-log and log10 scales.

    The band uses alpha +- 0.003.  Where an order of magnitude is quoted for
    ``n`` it is returned alongside with a flag saying whether it falls inside
    the band.
    """
    if n < 1:
        raise ValueError("n must be positive")
    ln_n = math.log(n)
    log_count = n * (ln_n - ALPHA)
    lo, hi = n * (ln_n - ALPHA - ALPHA_BAND), n * (ln_n - ALPHA + ALPHA_BAND)
    out = {
        "n": n,
        "alpha": ALPHA,
        "log_count": log_count,
        "log10_count": log_count / math.log(10),
        "log10_band": [lo / math.log(10), hi / math.log(10)],
        "asymptotic_caveat": n < 16,
    }
    if n in QUOTED_LOG10:
        q = QUOTED_LOG10[n]
        lo10, hi10 = out["log10_band"]
        out["quoted_log10"] = q
        out["quoted_consistent"] = bool(lo10 - 0.5 <= q <= hi10 + 0.5)
    return out


def asymptotic_ratio_series(n_max: int = 10) -> list:
    """(n, ln(exact) / reference log count) where both are defined and nonzero."""
    out = []
    for n in range(1, n_max + 1):
        c = count_exact(n).count
        ref = simkin_reference(n)["log_count"]
        if c > 1 and ref != 0:
            out.append((n, math.log(c) / ref))
    return out
