"""Compositions on the open simplex and the transforms used by the models.

All array functions work on the last axis, so a single composition has shape
``(d,)`` and a time series has shape ``(n, d)``.  The last coordinate is the
reference coordinate of the additive log-ratio transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUM_TOL = 1e-10
RENORMALIZE_TOL = 1e-6


class InvalidCompositionError(ValueError):
    pass


def check_compositions(y, *, renormalize: bool = True) -> np.ndarray:
    """Validate (and lightly repair) one composition or a stack of them.

    Rows whose sum deviates from one by less than ``RENORMALIZE_TOL`` are
    rescaled; larger deviations and any non-positive coordinate are errors.
    """
    y = np.array(y, dtype=float)
    if y.ndim == 0 or y.shape[-1] < 2:
        raise InvalidCompositionError("a composition needs at least two coordinates")
    if not np.all(np.isfinite(y)):
        raise InvalidCompositionError("composition has non-finite coordinates")
    if np.any(y <= 0):
        raise InvalidCompositionError("composition coordinates must be strictly positive")
    s = y.sum(axis=-1, keepdims=True)
    dev = np.abs(s - 1.0)
    if np.any(dev > RENORMALIZE_TOL):
        raise InvalidCompositionError(
            f"coordinates sum to {float(s.flat[np.argmax(dev)]):.12g}, not 1"
        )
    if renormalize and np.any(dev > SUM_TOL):
        y = y / s
    return y


@dataclass(frozen=True)
class Composition:
    """A single observation on the simplex."""

    values: np.ndarray

    def __post_init__(self):
        v = check_compositions(self.values)
        if v.ndim != 1:
            raise InvalidCompositionError("Composition holds a single vector")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def d(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.d

    def __iter__(self):
        return iter(self.values.tolist())

    @classmethod
    def uniform(cls, d: int) -> "Composition":
        return cls(np.full(d, 1.0 / d))


@dataclass(frozen=True)
class PerturbationVector:
    """Additive shift of a composition; coordinates sum to zero."""

    gamma: np.ndarray

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        if g.ndim != 1 or g.shape[0] < 2:
            raise ValueError("perturbation must be a vector of length >= 2")
        if abs(g.sum()) > 1e-12:
            raise ValueError(f"perturbation sums to {g.sum():.3g}, not 0")
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.gamma, dtype=dtype)

    def apply(self, y) -> Composition:
        """Shift ``y`` by this vector; raises if a coordinate leaves (0, 1)."""
        z = np.asarray(y, dtype=float) + self.gamma
        if np.any(z <= 0):
            raise InvalidCompositionError("perturbed composition has a non-positive coordinate")
        return Composition(z)


def alr(y) -> np.ndarray:
    """Additive log-ratio with the last coordinate as reference."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise InvalidCompositionError("alr is undefined for non-positive coordinates")
    logy = np.log(y)
    return logy[..., :-1] - logy[..., -1:]


def alr_inv(z) -> np.ndarray:
    """Inverse of :func:`alr` (softmax with a zero logit for the reference)."""
    z = np.asarray(z, dtype=float)
    full = np.concatenate([z, np.zeros(z.shape[:-1] + (1,))], axis=-1)
    full = full - full.max(axis=-1, keepdims=True)
    e = np.exp(full)
    y = e / e.sum(axis=-1, keepdims=True)
    # underflowed coordinates would leave the open simplex; the dominant
    # coordinate is then kept just below one (the sum stays within SUM_TOL)
    tiny = np.finfo(float).tiny
    if np.any(y < tiny):
        y = np.maximum(y, tiny)
        y = y / y.sum(axis=-1, keepdims=True)
    return np.minimum(y, np.nextafter(1.0, 0.0))


def h1(y) -> np.ndarray:
    """First d-1 coordinates (the regressors of the conditional mean)."""
    return np.asarray(y, dtype=float)[..., :-1]


def shannon_entropy(y) -> np.ndarray | float:
    """Shannon entropy ``-sum y log y`` (the dispersion regressor)."""
    y = np.asarray(y, dtype=float)
    h = -np.sum(y * np.log(y), axis=-1)
    return float(h) if h.ndim == 0 else h


def build_perturbation(d: int, i: int, j: int, c: float, p: float) -> PerturbationVector:
    """Move ``p`` of mass to the reference species, taken from species i and j.

    Species ``i`` loses ``c * p`` and species ``j`` loses ``(1 - c) * p``.
    Indices are 0-based and must both differ from the reference ``d - 1``.
    """
    if i == j:
        raise ValueError("i and j must differ")
    for k in (i, j):
        if not 0 <= k < d - 1:
            raise ValueError(f"species index {k} out of range [0, {d - 2}]")
    if not 0.0 <= c <= 1.0:
        raise ValueError("c must lie in [0, 1]")
    if p <= 0:
        raise ValueError("p must be positive")
    g = np.zeros(d)
    g[i] = -c * p
    g[j] = (c - 1.0) * p
    g[d - 1] = p
    return PerturbationVector(g)
