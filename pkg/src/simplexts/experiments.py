"""Simulation studies: estimator RMSE over replicated series and a two-chain
ergodicity check.

Replicate ``r`` at sample size index ``s`` draws its data from the stream
``SeedSequence(master_seed, spawn_key=(s, r))``, so every replicate is
reproducible on its own and aggregation does not depend on execution order.
All estimators in a study see the same simulated series.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimation import (
    DataQualityError,
    EstimationError,
    Method,
    fit_convex,
    fit_dirichlet_mle,
    fit_ln_ls,
    fit_ln_qmle,
)
from .models import (
    ModelSpec,
    require_stationary,
    simulate,
    simulate_paths,
    spec_from_dict,
    spec_to_dict,
)
from .simplex import check_compositions, h1, shannon_entropy

log = logging.getLogger(__name__)

MAX_FAILURE_SHARE = 0.2


@dataclass
class StudyConfig:
    true_spec: ModelSpec
    sample_sizes: list[int]
    replications: int = 200
    estimators: list[str] = field(default_factory=lambda: [Method.DIRICHLET_MLE.value])
    master_seed: int = 0
    fixed: dict[str, float] | None = None
    burn_in: int = 1000

    def __post_init__(self):
        if self.replications < 2:
            raise ValueError("replications must be at least 2")
        if not self.sample_sizes or any(int(n) < 2 for n in self.sample_sizes):
            raise ValueError("sample sizes must be integers >= 2")
        self.sample_sizes = [int(n) for n in self.sample_sizes]
        self.estimators = [Method(e).value for e in self.estimators]
        family = self.true_spec.family
        for e in self.estimators:
            ln = e in (Method.LN_LS.value, Method.LN_QMLE.value)
            if ln != (family == "logistic_normal"):
                raise ValueError(f"estimator {e} does not apply to a {family} model")
        if self.burn_in < 0:
            raise ValueError("burn_in must be non-negative")

    def to_dict(self) -> dict:
        return {
            "true_spec": spec_to_dict(self.true_spec), "sample_sizes": self.sample_sizes,
            "replications": self.replications, "estimators": self.estimators,
            "master_seed": self.master_seed, "fixed": self.fixed, "burn_in": self.burn_in,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StudyConfig":
        doc = dict(doc)
        doc["true_spec"] = spec_from_dict(doc["true_spec"])
        return cls(**doc)


@dataclass
class CellResult:
    n: int
    estimator: str
    rmse: dict[str, float]
    converged: int
    failed: int
    aborted: bool = False


@dataclass
class StudyResult:
    config: StudyConfig
    cells: list[CellResult]

    def cell(self, n: int, estimator: str) -> CellResult:
        estimator = Method(estimator).value
        for c in self.cells:
            if c.n == n and c.estimator == estimator:
                return c
        raise KeyError((n, estimator))

    def rmse(self, n: int, estimator: str, name: str) -> float:
        return self.cell(n, estimator).rmse[name]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "cells": [
                {"n": c.n, "estimator": c.estimator, "rmse": c.rmse, "converged": c.converged,
                 "failed": c.failed, "aborted": c.aborted}
                for c in self.cells
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def write_csv(self, path) -> None:
        """One row per (estimator, n), one column per parameter."""
        names = []
        for c in self.cells:
            names += [k for k in c.rmse if k not in names]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["estimator", "n", "converged", "failed", *names])
            for c in self.cells:
                vals = ["" if k not in c.rmse or math.isnan(c.rmse[k]) else format(c.rmse[k], ".17g")
                        for k in names]
                w.writerow([c.estimator, c.n, c.converged, c.failed, *vals])


def _fit(method: str, data, spec: ModelSpec, fixed: dict | None):
    kind, p = spec.kind, spec.p
    if method == Method.CONVEX.value:
        mean_fixed = {k: v for k, v in (fixed or {}).items() if k in spec.param_names()[: spec.n_mean]}
        return fit_convex(data, p, fixed=mean_fixed)
    if method == Method.DIRICHLET_MLE.value:
        return fit_dirichlet_mle(data, kind, p, fixed=fixed)
    if method == Method.LN_LS.value:
        return fit_ln_ls(data, p)
    return fit_ln_qmle(data, kind, p, fixed=fixed)


def _replicate(config: StudyConfig, size_index: int, r: int) -> dict[str, np.ndarray | None]:
    """Errors theta_hat - theta for each estimator (None when a fit failed)."""
    ss = np.random.SeedSequence(config.master_seed, spawn_key=(size_index, r))
    n = config.sample_sizes[size_index]
    data = simulate(config.true_spec, n, config.burn_in, np.random.default_rng(ss))
    truth = dict(zip(config.true_spec.param_names(), config.true_spec.to_vector()))
    out = {}
    for method in config.estimators:
        try:
            fit = _fit(method, data, config.true_spec, config.fixed)
        except (EstimationError, DataQualityError, ValueError) as exc:
            log.info("replicate (n=%d, r=%d, %s) failed: %s", n, r, method, exc)
            out[method] = None
            continue
        if not fit.converged:
            out[method] = None
            continue
        out[method] = {k: v - truth[k] for k, v in fit.params.items()}
    return out


def run_rmse_study(config: StudyConfig, workers: int = 1) -> StudyResult:
    """RMSE of every estimated parameter, per sample size and estimator.

    Non-converged replicates are dropped and counted.  A cell with more
    than 20% failures is marked aborted and reports no RMSE.
    """
    require_stationary(config.true_spec)
    skip = set(config.fixed or {})
    cells = []
    for s, n in enumerate(config.sample_sizes):
        jobs = range(config.replications)
        if workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                reps = list(ex.map(lambda r, s=s: _replicate(config, s, r), jobs))
        else:
            reps = [_replicate(config, s, r) for r in jobs]
        for method in config.estimators:
            errs = [rep[method] for rep in reps if rep[method] is not None]
            failed = config.replications - len(errs)
            if failed > MAX_FAILURE_SHARE * config.replications or not errs:
                log.warning("n=%d %s: %d of %d replicates failed; cell aborted", n, method, failed,
                            config.replications)
                cells.append(CellResult(n, method, {}, len(errs), failed, aborted=True))
                continue
            names = [k for k in errs[0] if k not in skip]
            rmse = {k: float(np.sqrt(np.mean([e[k] ** 2 for e in errs]))) for k in names}
            cells.append(CellResult(n, method, rmse, len(errs), failed))
            log.info("n=%d %s done (%d failures)", n, method, failed)
    return StudyResult(config, cells)


# -- ergodicity ---------------------------------------------------------------

@dataclass(frozen=True)
class ErgodicityReport:
    statistics: list[str]
    means: np.ndarray        # (2, m) long-run means of each chain
    se: np.ndarray           # (2, m) batch-means standard errors
    threshold: float

    @property
    def differences(self) -> np.ndarray:
        return np.abs(self.means[0] - self.means[1])

    @property
    def combined_se(self) -> np.ndarray:
        return np.sqrt((self.se ** 2).sum(axis=0))

    @property
    def max_abs_difference(self) -> float:
        return float(self.differences.max())

    @property
    def z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.differences == 0, 0.0, self.differences / self.combined_se)

    @property
    def passed(self) -> bool:
        return bool(np.all(self.z < self.threshold))


def batch_means_se(x, batches: int = 50) -> np.ndarray:
    """Standard error of the mean of a correlated series by non-overlapping batch means."""
    x = np.asarray(x, dtype=float)
    m = x.shape[0] // batches
    if m < 2:
        raise ValueError("series too short for batch means")
    bm = x[: m * batches].reshape((batches, m) + x.shape[1:]).mean(axis=1)
    return bm.std(axis=0, ddof=1) / np.sqrt(batches)


def _start_state(spec: ModelSpec, init: dict):
    d = spec.d
    y = check_compositions(init.get("composition", np.full(d, 1.0 / d)))
    if spec.kind == "finite":
        return np.broadcast_to(y, (1, spec.p, d)).copy()
    mu0 = np.broadcast_to(np.asarray(init.get("mu0", 0.0), dtype=float), (d - 1,))
    return mu0[None, :].copy(), np.array([float(init.get("logphi0", 0.0))]), y[None, :].copy()


def default_inits(spec: ModelSpec) -> list[dict]:
    """A uniform start with zero latent state and a lopsided one."""
    d = spec.d
    skew = np.full(d, 0.05 / (d - 1))
    skew[0] = 0.95
    return [{}, {"composition": skew, "mu0": 3.0, "logphi0": 3.0}]


def run_ergodicity_check(spec: ModelSpec, n: int = 100_000, seeds=(1, 2), inits=None,
                         threshold: float = 4.0, batches: int = 50) -> ErgodicityReport:
    """Compare long-run means of h1 and the entropy across two chains.

    The chains start from different states (``inits``, see
    :func:`default_inits`) and are run without burn-in.  The check passes
    when every difference is below ``threshold`` combined batch-means SEs.
    """
    require_stationary(spec)
    if len(seeds) != 2:
        raise ValueError("need exactly two seeds")
    inits = default_inits(spec) if inits is None else list(inits)
    names = [f"h1[{k + 1}]" for k in range(spec.d - 1)] + ["entropy"]
    means, ses = [], []
    for seed, init in zip(seeds, inits):
        paths, _ = simulate_paths(spec, _start_state(spec, init), n, np.random.default_rng(seed))
        y = paths[0]
        stats = np.column_stack([h1(y), shannon_entropy(y)])
        means.append(stats.mean(axis=0))
        ses.append(batch_means_se(stats, batches))
    return ErgodicityReport(names, np.array(means), np.array(ses), threshold)
