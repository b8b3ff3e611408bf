"""Interpretation of fitted models through perturbations of one composition.

A perturbation ``gamma`` (coordinates summing to zero) added to the most
recent observation shifts the next conditional mean.  For the Dirichlet
models the ratio of means of species i and j is multiplied by
``EMR = exp([A(i,.) - A(j,.)] h1(gamma))``; for the logistic-normal models
the same exponent is the change ``Delta LR`` of the expected log-ratio.

Species indices are 0-based.  The reference species ``d - 1`` has an
implicit zero row in the lag matrix.  For observation-driven specs the
matrix ``A`` plays the role of the first lag matrix.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np

from .models import (
    ModelSpec,
    LatentPath,
    replace_last,
    require_stationary,
    simulate_paths,
    state_from_history,
)
from .rngs import seed_sequence
from .simplex import PerturbationVector, build_perturbation, check_compositions, h1

DEFAULT_GRID = 101


def lag_matrix(spec: ModelSpec, lag: int = 1) -> np.ndarray:
    """The matrix multiplying h1(Y_{t-lag}) in the conditional mean."""
    if spec.kind == "finite":
        if not 1 <= lag <= spec.p:
            raise ValueError(f"lag must lie in [1, {spec.p}]")
        return np.asarray(spec.A[lag - 1])
    if lag != 1:
        raise ValueError("observation-driven specs only expose the lag-1 matrix A")
    return np.asarray(spec.A)


def _check_pair(i: int, j: int, d: int):
    for k in (i, j):
        if not 0 <= k < d:
            raise IndexError(f"species index {k} out of range [0, {d - 1}]")
    if i == j:
        raise ValueError("i and j must differ")


def _row(A: np.ndarray, i: int) -> np.ndarray:
    k = A.shape[0]
    return np.zeros(k) if i == k else A[i]


def means_ratio_log(spec: ModelSpec, i: int, j: int, latent: LatentPath, t: int | None = None) -> float:
    """log(lambda_i / lambda_j) at filtered step ``t`` (default: the next step).

    ``j = d - 1`` (the reference) is allowed and gives ``mu_i`` directly.
    """
    _check_pair(i, j, spec.d)
    mu = latent.mu_next if t is None else latent.mu[t]
    full = np.append(mu, 0.0)
    return float(full[i] - full[j])


def delta_lr(A1, i: int, j: int, gamma) -> float:
    """Exponent ``[A(i,.) - A(j,.)] h1(gamma)`` (log EMR, or log RRR)."""
    A = np.atleast_2d(np.asarray(A1, dtype=float))
    k = A.shape[0]
    if A.shape != (k, k):
        raise ValueError("A1 must be square")
    g = np.asarray(gamma.gamma if isinstance(gamma, PerturbationVector) else gamma, dtype=float)
    if g.shape != (k + 1,):
        raise ValueError(f"gamma must have length {k + 1}")
    if abs(g.sum()) > 1e-12:
        raise ValueError("gamma must sum to zero")
    _check_pair(i, j, k + 1)
    return float((_row(A, i) - _row(A, j)) @ h1(g))


def emr(A1, i: int, j: int, gamma) -> float:
    """Evolution of the means ratio; values above one favour species ``i``."""
    return float(np.exp(delta_lr(A1, i, j, gamma)))


def perturbation_line(A1, i: int, j: int) -> tuple[float, float]:
    """(slope, intercept) with delta_lr(A1, i, j, build_perturbation(d, i, j, c, p)) = p (slope c + intercept)."""
    A = np.atleast_2d(np.asarray(A1, dtype=float))
    _check_pair(i, j, A.shape[0])  # both must be non-reference species
    slope = A[i, j] + A[j, i] - A[i, i] - A[j, j]
    intercept = A[j, j] - A[i, j]
    return float(slope), float(intercept)


def equilibrium_c(A1, i: int, j: int) -> float | None:
    """Mix ``c`` in [0, 1] at which the perturbation leaves the ratio unchanged."""
    slope, intercept = perturbation_line(A1, i, j)
    if slope == 0.0:
        return None
    c = -intercept / slope
    return float(c) if 0.0 <= c <= 1.0 else None


@dataclass(frozen=True)
class PerturbationReport:
    i: int
    j: int
    slope: float
    intercept: float
    equilibrium_c: float | None
    p: float
    status: str

    def log_ratio(self, c) -> np.ndarray:
        return self.p * (self.slope * np.asarray(c, dtype=float) + self.intercept)

    def sweep(self, points: int = DEFAULT_GRID) -> list[dict]:
        cs = np.linspace(0.0, 1.0, points)
        lr = self.log_ratio(cs)
        return [{"c": float(c), "log_ratio": float(v), "ratio": float(np.exp(v))} for c, v in zip(cs, lr)]

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def write_sweep_csv(self, path, points: int = DEFAULT_GRID) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["c", "log_ratio", "ratio"])
            for row in self.sweep(points):
                w.writerow([format(row[k], ".17g") for k in ("c", "log_ratio", "ratio")])


def perturbation_report(A1, i: int, j: int, p: float) -> PerturbationReport:
    if p <= 0:
        raise ValueError("p must be positive")
    slope, intercept = perturbation_line(A1, i, j)
    if slope == 0.0 and intercept == 0.0:
        status = "identically balanced"
    elif equilibrium_c(A1, i, j) is None:
        status = "no root in [0,1]"
    else:
        status = "root"
    return PerturbationReport(i, j, slope, intercept, equilibrium_c(A1, i, j), float(p), status)


# -- simulated multi-step ratio ---------------------------------------------

@dataclass(frozen=True)
class MultistepRatio:
    """Monte Carlo ratio of conditional means with a delta-method standard error."""

    ratio: float
    se: float
    reps: int
    ell: int

    @property
    def log_ratio(self) -> float:
        return float(np.log(self.ratio))


def multistep_perturbation_ratio(spec: ModelSpec, history, k: int, gamma, ell: int, i: int, j: int,
                                 reps: int = 10000, rng=None, init=None) -> MultistepRatio:
    """Effect of perturbing ``history[-k]`` on the means of species i and j ``ell`` steps later.

    Both scenarios start from the filter state just after ``history[-k]``
    (later observations are dropped) and are simulated with the same
    random stream, so ``gamma = 0`` gives exactly one.  The estimate is

        E[Y_i | pert] E[Y_j | base] / (E[Y_i | base] E[Y_j | pert])

    at step ``ell``.  With ``ell = 1`` it converges to the EMR index.
    """
    require_stationary(spec)
    history = check_compositions(history)
    if history.ndim != 2 or history.shape[1] != spec.d:
        raise ValueError("history must be an (n, d) array")
    if not 1 <= k <= history.shape[0]:
        raise ValueError(f"k must lie in [1, {history.shape[0]}]")
    if ell < 1:
        raise ValueError("ell must be at least 1")
    if reps < 2:
        raise ValueError("reps must be at least 2")
    _check_pair(i, j, spec.d)
    g = PerturbationVector(gamma.gamma if isinstance(gamma, PerturbationVector) else gamma)
    past = history[: history.shape[0] - k + 1]
    perturbed_y = g.apply(past[-1]).values
    base = state_from_history(spec, past, reps, init)
    pert = replace_last(spec, base, perturbed_y)
    seed = seed_sequence(rng)
    yb, _ = simulate_paths(spec, base, ell, np.random.default_rng(seed))
    yp, _ = simulate_paths(spec, pert, ell, np.random.default_rng(seed))
    yb, yp = yb[:, -1], yp[:, -1]
    m = np.array([yp[:, i].mean(), yb[:, j].mean(), yb[:, i].mean(), yp[:, j].mean()])
    ratio = m[0] * m[1] / (m[2] * m[3])
    # influence of each replicate on log(ratio)
    psi = yp[:, i] / m[0] + yb[:, j] / m[1] - yb[:, i] / m[2] - yp[:, j] / m[3]
    se = ratio * psi.std(ddof=1) / np.sqrt(reps)
    return MultistepRatio(float(ratio), float(se), reps, ell)


__all__ = [
    "DEFAULT_GRID",
    "MultistepRatio",
    "PerturbationReport",
    "build_perturbation",
    "delta_lr",
    "emr",
    "equilibrium_c",
    "lag_matrix",
    "means_ratio_log",
    "multistep_perturbation_ratio",
    "perturbation_line",
    "perturbation_report",
]
