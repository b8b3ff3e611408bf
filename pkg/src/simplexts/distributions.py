"""Dirichlet and logistic-normal laws on the simplex.

Densities are taken with respect to Lebesgue measure on the first d-1
coordinates.  The array-level helpers (``*_alpha``, ``sample_gamma``) are
vectorized over leading axes and are what the filters and estimators call;
the params-level functions wrap them for single observations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .simplex import Composition, alr, alr_inv, check_compositions
from .special import digamma, lgamma

_LOG_2PI = 1.8378770664093454836


@dataclass(frozen=True)
class DirichletParams:
    """Mean ``lam`` on the simplex and scale ``phi`` (so alpha = lam * phi)."""

    lam: np.ndarray
    phi: float

    def __post_init__(self):
        lam = check_compositions(self.lam)
        if lam.ndim != 1:
            raise ValueError("lam must be a single composition")
        if not (np.isfinite(self.phi) and self.phi > 0):
            raise ValueError("phi must be positive and finite")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "phi", float(self.phi))

    @property
    def alpha(self) -> np.ndarray:
        return self.lam * self.phi

    @classmethod
    def from_alpha(cls, alpha) -> "DirichletParams":
        alpha = np.asarray(alpha, dtype=float)
        if np.any(alpha <= 0):
            raise ValueError("alpha must be strictly positive")
        phi = alpha.sum()
        return cls(alpha / phi, phi)


@dataclass(frozen=True)
class LogisticNormalParams:
    """Gaussian law of alr(Y): mean ``mu`` and lower Cholesky factor ``chol``."""

    mu: np.ndarray
    chol: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        L = np.tril(np.asarray(self.chol, dtype=float))
        if L.shape != (mu.size, mu.size):
            raise ValueError("chol must be (d-1, d-1)")
        if np.any(np.diag(L) <= 0):
            raise ValueError("Cholesky factor needs a strictly positive diagonal")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "chol", L)

    @property
    def sigma(self) -> np.ndarray:
        return self.chol @ self.chol.T

    @classmethod
    def from_cov(cls, mu, sigma) -> "LogisticNormalParams":
        return cls(mu, np.linalg.cholesky(np.asarray(sigma, dtype=float)))


# -- array-level helpers ----------------------------------------------------

def dirichlet_logpdf_alpha(alpha, y) -> np.ndarray:
    """Log density for concentration arrays ``alpha`` and observations ``y``."""
    alpha = np.asarray(alpha, dtype=float)
    logy = np.log(np.asarray(y, dtype=float))
    phi = alpha.sum(axis=-1)
    return lgamma(phi) - lgamma(alpha).sum(axis=-1) + ((alpha - 1.0) * logy).sum(axis=-1)


def dirichlet_grad_alpha(alpha, y) -> np.ndarray:
    """d logpdf / d alpha_i = psi(phi) - psi(alpha_i) + log y_i."""
    alpha = np.asarray(alpha, dtype=float)
    phi = alpha.sum(axis=-1, keepdims=True)
    return digamma(phi) - digamma(alpha) + np.log(np.asarray(y, dtype=float))


def sample_gamma(shape, rng: np.random.Generator, *, log: bool = False) -> np.ndarray:
    """Gamma(shape, 1) variates by Marsaglia-Tsang squeeze/rejection.

    Shapes below one are boosted: G(a) = G(a + 1) * U**(1/a).  With
    ``log=True`` the logarithm is returned, which stays finite for tiny
    shapes where the variate itself underflows.
    """
    a = np.asarray(shape, dtype=float)
    boost = a < 1.0
    a_eff = np.where(boost, a + 1.0, a)
    d = a_eff - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    flat_d, flat_c = d.reshape(-1), c.reshape(-1)
    out = np.empty(flat_d.size)
    pending = np.arange(flat_d.size)
    while pending.size:
        dd, cc = flat_d[pending], flat_c[pending]
        x = rng.standard_normal(pending.size)
        v = 1.0 + cc * x
        u = rng.random(pending.size)
        ok = v > 0
        v3 = np.where(ok, v * v * v, 1.0)
        x2 = x * x
        accept = ok & (
            (u < 1.0 - 0.0331 * x2 * x2)
            | (np.log(u) < 0.5 * x2 + dd * (1.0 - v3 + np.log(v3)))
        )
        out[pending[accept]] = np.log(dd[accept]) + np.log(v3[accept])
        pending = pending[~accept]
    logg = out.reshape(a.shape)
    if boost.any():
        u = rng.random(a.shape)
        logg = np.where(boost, logg + np.log(u) / np.where(boost, a, 1.0), logg)
    return logg if log else np.exp(logg)


def sample_dirichlet_alpha(alpha, rng: np.random.Generator) -> np.ndarray:
    """One Dirichlet draw per row of ``alpha`` (normalized gamma variates)."""
    logg = sample_gamma(alpha, rng, log=True)
    logg = logg - logg.max(axis=-1, keepdims=True)
    g = np.exp(logg)
    y = g / g.sum(axis=-1, keepdims=True)
    tiny = np.finfo(float).tiny
    if np.any(y < tiny):
        y = np.maximum(y, tiny)
        y = y / y.sum(axis=-1, keepdims=True)
    return y


def logistic_normal_logpdf_chol(mu, chol, y) -> np.ndarray:
    """Logistic-normal log density; ``chol`` may carry leading batch axes."""
    y = np.asarray(y, dtype=float)
    z = alr(y) - np.asarray(mu, dtype=float)
    L = np.asarray(chol, dtype=float)
    L_b, z_b = np.broadcast_arrays(L, z[..., :, None])
    w = np.linalg.solve(L_b, z_b)[..., 0]
    k = z.shape[-1]
    logdet = 2.0 * np.log(np.diagonal(L, axis1=-2, axis2=-1)).sum(axis=-1)
    return (
        -0.5 * k * _LOG_2PI - 0.5 * logdet - 0.5 * (w * w).sum(axis=-1)
        - np.log(y).sum(axis=-1)
    )


# -- params-level API -------------------------------------------------------

def dirichlet_logpdf(params: DirichletParams, y) -> float:
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != params.lam.shape[0]:
        raise ValueError("dimension mismatch")
    return float(dirichlet_logpdf_alpha(params.alpha, y))


def dirichlet_logpdf_grad_alpha(params: DirichletParams, y) -> np.ndarray:
    return dirichlet_grad_alpha(params.alpha, y)


def dirichlet_sample(params: DirichletParams, rng: np.random.Generator, size: int | None = None):
    """Draw one :class:`Composition`, or an ``(size, d)`` array if ``size`` is given."""
    if size is None:
        return Composition(sample_dirichlet_alpha(params.alpha, rng))
    alpha = np.broadcast_to(params.alpha, (size, params.alpha.size))
    return sample_dirichlet_alpha(alpha, rng)


def logistic_normal_logpdf(params: LogisticNormalParams, y) -> float:
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != params.mu.size + 1:
        raise ValueError("dimension mismatch")
    return float(logistic_normal_logpdf_chol(params.mu, params.chol, y))


def logistic_normal_sample(params: LogisticNormalParams, rng: np.random.Generator,
                           size: int | None = None):
    k = params.mu.size
    if size is None:
        z = params.mu + params.chol @ rng.standard_normal(k)
        return Composition(alr_inv(z))
    z = params.mu + rng.standard_normal((size, k)) @ params.chol.T
    return alr_inv(z)
