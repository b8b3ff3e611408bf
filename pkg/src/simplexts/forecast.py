"""Monte Carlo forecasts: mean paths and per-coordinate prediction bands.

The fitted model is run over the observed history to obtain the latent
state, then ``reps`` independent continuations are simulated.  Paths are
generated in fixed-size chunks, each with its own stream spawned from the
master seed, so the output does not depend on how chunks are scheduled.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .models import ModelSpec, require_stationary, simulate_paths, state_from_history
from .rngs import seed_sequence
from .simplex import check_compositions

CHUNK = 2000


@dataclass(frozen=True)
class ForecastResult:
    """Per-step mean composition and (alpha/2, 1 - alpha/2) empirical quantiles.

    Arrays have shape ``(horizon, d)``.
    """

    horizon: int
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    alpha: float
    reps: int

    def rows(self, actual=None, species=None, first_step: int = 1) -> list[dict]:
        """Tidy rows (step, species, real, predicted, lower, upper)."""
        d = self.mean.shape[1]
        names = list(species) if species is not None else [str(k + 1) for k in range(d)]
        actual = None if actual is None else np.asarray(actual, dtype=float)
        out = []
        for s in range(self.horizon):
            for k in range(d):
                real = None
                if actual is not None and s < actual.shape[0]:
                    real = float(actual[s, k])
                out.append({
                    "step": first_step + s, "species": names[k], "real": real,
                    "predicted": float(self.mean[s, k]),
                    "lower": float(self.lower[s, k]), "upper": float(self.upper[s, k]),
                })
        return out

    def write_csv(self, path, actual=None, species=None, first_step: int = 1) -> None:
        lo = f"q{100 * self.alpha / 2:g}"
        hi = f"q{100 * (1 - self.alpha / 2):g}"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "species", "real", "predicted", lo, hi])
            for r in self.rows(actual, species, first_step):
                real = "" if r["real"] is None else format(r["real"], ".17g")
                w.writerow([r["step"], r["species"], real, format(r["predicted"], ".17g"),
                            format(r["lower"], ".17g"), format(r["upper"], ".17g")])

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon, "alpha": self.alpha, "reps": self.reps,
            "mean": self.mean.tolist(), "lower": self.lower.tolist(), "upper": self.upper.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def simulate_continuations(spec: ModelSpec, history, horizon: int, reps: int, rng=None,
                           init=None, workers: int = 1) -> np.ndarray:
    """``(reps, horizon, d)`` continuation paths after ``history``."""
    history = check_compositions(history)
    if history.ndim != 2:
        raise ValueError("history must be a sequence of compositions")
    need = spec.p if spec.kind == "finite" else 1
    if history.shape[0] < need:
        raise ValueError(f"history has {history.shape[0]} observations, need at least {need}")
    sizes = [CHUNK] * (reps // CHUNK) + ([reps % CHUNK] if reps % CHUNK else [])
    seeds = seed_sequence(rng).spawn(len(sizes))

    def chunk(args):
        size, ss = args
        state = state_from_history(spec, history, size, init)
        paths, _ = simulate_paths(spec, state, horizon, np.random.default_rng(ss))
        return paths

    jobs = list(zip(sizes, seeds))
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(chunk, jobs))
    else:
        parts = [chunk(j) for j in jobs]
    return np.concatenate(parts, axis=0)


def forecast(spec_hat: ModelSpec, history, horizon: int, reps: int = 10000, alpha: float = 0.05,
             rng=None, init=None, workers: int = 1) -> ForecastResult:
    """Mean and empirical (alpha/2, 1 - alpha/2) quantiles of simulated continuations.

    Quantiles interpolate linearly between order statistics.
    """
    require_stationary(spec_hat)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if reps < 100:
        raise ValueError("reps must be at least 100")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    paths = simulate_continuations(spec_hat, history, horizon, reps, rng, init, workers)
    mean = paths.mean(axis=0)
    lower, upper = np.quantile(paths, [alpha / 2, 1 - alpha / 2], axis=0, method="linear")
    # a strongly skewed marginal with a large alpha can put the mean outside
    # the central quantiles; the band is then widened to contain it
    lower = np.minimum(lower, mean)
    upper = np.maximum(upper, mean)
    return ForecastResult(horizon, mean, lower, upper, float(alpha), int(reps))
