"""Estimators for the simplex autoregressions.

* :func:`fit_convex`        minimum of the multinomial-type contrast (finite Dirichlet mean block)
* :func:`fit_dirichlet_mle` conditional maximum likelihood for both Dirichlet variants
* :func:`fit_ln_ls`         closed-form least squares for the logistic-normal mean block
* :func:`fit_ln_qmle`       two-step Gaussian QMLE for the logistic-normal variants

Objectives are averages over the usable time steps and come with analytic
gradients with respect to the flat parameter vector of the spec (see
:meth:`~simplexts.models.DirichletFiniteSpec.param_names`).  Optimization
runs in an unconstrained parameterization: ``b = tanh(beta)`` for the
dispersion feedback and log-diagonal Cholesky factors.
"""

from __future__ import annotations

import enum
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .models import (
    DirichletFiniteSpec,
    DirichletODSpec,
    LogisticNormalFiniteSpec,
    LogisticNormalODSpec,
    ModelSpec,
    latent_with_jacobian,
    require_stationary,
    simulate,
    spectral_radius,
)
from .optim import OptimResult, fd_jacobian, minimize_bfgs
from .rngs import seed_sequence
from .simplex import alr, alr_inv, check_compositions, h1
from .special import digamma, lgamma

log = logging.getLogger(__name__)

GTOL = 1e-8
MAXITER = 5000
MIN_COORDINATE = float(np.finfo(float).tiny)
BARRIER_WEIGHT = 1e6
BARRIER_RHO = 0.999
DISPERSION_GRID = np.linspace(-2.0, 4.0, 61)


class EstimationError(RuntimeError):
    pass


class DataQualityError(ValueError):
    pass


class Method(str, enum.Enum):
    CONVEX = "convex"
    DIRICHLET_MLE = "dirichlet_mle"
    LN_LS = "ln_ls"
    LN_QMLE = "ln_qmle"


@dataclass(frozen=True)
class MeanParams:
    """Conditional-mean block: intercept (A0 or C), lag matrices, optional B."""

    intercept: np.ndarray
    A: np.ndarray
    B: np.ndarray | None = None

    @classmethod
    def from_vector(cls, theta, d: int, p: int = 1, od: bool = False) -> "MeanParams":
        k = d - 1
        theta = np.asarray(theta, dtype=float)
        if od:
            return cls(theta[:k], theta[k:k + k * k].reshape(k, k), theta[k + k * k:k + 2 * k * k].reshape(k, k))
        return cls(theta[:k], theta[k:k + p * k * k].reshape(p, k, k))


@dataclass
class FitResult:
    method: Method
    spec: ModelSpec | None
    theta: np.ndarray
    names: list[str]
    objective: float
    converged: bool
    iterations: int
    gradient_norm: float
    free: np.ndarray
    se: np.ndarray | None = None
    message: str = ""
    trace: list[float] = field(default_factory=list)
    d: int = 0
    p: int = 1
    kind: str = "finite"

    @property
    def params(self) -> dict[str, float]:
        return dict(zip(self.names, self.theta.tolist()))

    @property
    def mean(self) -> MeanParams:
        return MeanParams.from_vector(self.theta, self.d, self.p, od=self.kind == "od")

    @property
    def n_params(self) -> int:
        return int(self.free.sum())


# -- data handling ----------------------------------------------------------

def _prepare(data) -> np.ndarray:
    data = check_compositions(data)
    if data.ndim != 2:
        raise ValueError("data must be an (n, d) array of compositions")
    if data.min() < MIN_COORDINATE:
        raise DataQualityError(
            "a coordinate is numerically zero; repair zeros at ingestion before fitting"
        )
    return data


def _template(family: str, kind: str, d: int, p: int) -> ModelSpec:
    """A spec with all-zero parameters (identity covariance) for layouts."""
    k = d - 1
    if family == "dirichlet":
        if kind == "finite":
            return DirichletFiniteSpec(np.zeros(k), np.zeros((p, k, k)), 0.0, np.zeros(p))
        return DirichletODSpec(np.zeros(k), np.zeros((k, k)), np.zeros((k, k)), 0.0, 0.0, 0.0)
    if kind == "finite":
        return LogisticNormalFiniteSpec(np.zeros(k), np.zeros((p, k, k)), np.zeros(p), L=np.eye(k))
    return LogisticNormalODSpec(np.zeros(k), np.zeros((k, k)), np.zeros((k, k)), 0.0, 0.0, L=np.eye(k))


def _free_mask(names: list[str], fixed: dict | None, restrict: set[str] | None = None) -> np.ndarray:
    fixed = fixed or {}
    unknown = set(fixed) - set(names)
    if unknown:
        raise ValueError(f"unknown fixed parameters {sorted(unknown)}; known: {names}")
    free = np.array([n not in fixed for n in names])
    if restrict is not None:
        free &= np.array([n in restrict for n in names])
    return free


def _apply_fixed(theta: np.ndarray, names: list[str], fixed: dict | None) -> np.ndarray:
    theta = theta.copy()
    for name, value in (fixed or {}).items():
        theta[names.index(name)] = float(value)
    return theta


# -- parameter transforms ---------------------------------------------------

class _Transform:
    """Elementwise map between natural parameters and the optimizer's space."""

    def __init__(self, names: list[str]):
        self.tanh = np.array([n == "b" for n in names])
        self.logdiag = np.array([n.startswith("L[") and n.split("[")[1].split(",")[0] == n.split(",")[1].rstrip("]")
                                 for n in names])

    def to_free(self, theta):
        u = theta.copy()
        if np.any(np.abs(theta[self.tanh]) >= 1):
            raise ValueError("b must satisfy |b| < 1")
        u[self.tanh] = np.arctanh(theta[self.tanh])
        u[self.logdiag] = np.log(theta[self.logdiag])
        return u

    def from_free(self, u):
        theta = u.copy()
        theta[self.tanh] = np.tanh(u[self.tanh])
        theta[self.logdiag] = np.exp(u[self.logdiag])
        return theta

    def dtheta_du(self, u):
        j = np.ones_like(u)
        j[self.tanh] = 1.0 - np.tanh(u[self.tanh]) ** 2
        j[self.logdiag] = np.exp(u[self.logdiag])
        return j


# -- objectives -------------------------------------------------------------

class _Problem:
    """Latent recursion for one dataset; caches the design of finite specs."""

    def __init__(self, family: str, kind: str, data: np.ndarray, p: int = 1, init=None):
        self.family, self.kind, self.data, self.init = family, kind, data, init
        self.d = data.shape[1]
        self.p = p if kind == "finite" else 1
        self.template = _template(family, kind, self.d, self.p)
        self.names = self.template.param_names()
        self.n_mean = self.template.n_mean
        self.cls = type(self.template)
        self._design = None
        if kind == "finite":
            start, _, _, Jmu, Jeta = latent_with_jacobian(self.template, data)
            self.start = start
            self._design = (Jmu[:-1], Jeta[:-1])
        else:
            self.start = 1
        self.y = data[self.start:]
        self.logy = np.log(self.y)

    def spec(self, theta) -> ModelSpec:
        return self.cls.from_vector(theta, self.d, self.p)

    def latent(self, theta):
        if self._design is not None:
            Jmu, Jeta = self._design
            mu = Jmu[..., : self.n_mean] @ theta[: self.n_mean]
            eta = Jeta @ theta
            return mu, eta, Jmu, Jeta
        spec = self.spec(theta)
        _, mu, eta, Jmu, Jeta = latent_with_jacobian(spec, self.data, self.init)
        return mu[:-1], eta[:-1], Jmu[:-1], Jeta[:-1]


def _log_softmax(mu):
    full = np.concatenate([mu, np.zeros(mu.shape[:-1] + (1,))], axis=-1)
    mx = full.max(axis=-1, keepdims=True)
    return full - mx - np.log(np.exp(full - mx).sum(axis=-1, keepdims=True))


def dirichlet_scores(problem: _Problem, theta):
    """Per-step log-likelihood values and their gradients (rows of ``scores``)."""
    mu, eta, Jmu, Jeta = problem.latent(theta)
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(eta))) or eta.max() > 700:
        return None, None
    lam = alr_inv(mu)
    phi = np.exp(eta)
    alpha = lam * phi[:, None]
    if alpha.min() <= 0:
        return None, None
    ll = lgamma(phi) - lgamma(alpha).sum(axis=1) + ((alpha - 1.0) * problem.logy).sum(axis=1)
    g = digamma(phi)[:, None] - digamma(alpha) + problem.logy
    d_eta = (g * alpha).sum(axis=1)
    gbar = (g * lam).sum(axis=1, keepdims=True)
    d_mu = phi[:, None] * lam[:, :-1] * (g[:, :-1] - gbar)
    scores = np.einsum("tk,tkp->tp", d_mu, Jmu) + d_eta[:, None] * Jeta
    return ll, scores


def dirichlet_negloglik(problem: _Problem, theta):
    ll, scores = dirichlet_scores(problem, theta)
    if ll is None or not np.all(np.isfinite(ll)):
        return np.inf, np.zeros_like(theta)
    return -float(ll.mean()), -scores.mean(axis=0)


def convex_objective(problem: _Problem, theta_mean):
    """Mean of -sum_i Y_i log lambda_i over usable steps, and its gradient."""
    theta = np.zeros(len(problem.names))
    theta[: problem.n_mean] = theta_mean
    mu, _, Jmu, _ = problem.latent(theta)
    logl = _log_softmax(mu)
    value = -float((problem.y * logl).sum(axis=1).mean())
    d_mu = np.exp(logl[:, :-1]) - problem.y[:, :-1]
    grad = np.einsum("tk,tkp->p", d_mu, Jmu[..., : problem.n_mean]) / mu.shape[0]
    return value, grad


def qmle_objective(problem: _Problem, theta):
    """Mean of (r' Sigma_t^-1 r + log det Sigma_t) with r = alr(Y_t) - mu_t."""
    k = problem.d - 1
    mu, eta, Jmu, Jeta = problem.latent(theta)
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(eta))) or np.abs(eta).max() > 700:
        return np.inf, np.zeros_like(theta)
    L = np.zeros((k, k))
    nL = k * (k + 1) // 2
    L[np.tril_indices(k)] = theta[-nL:]
    diag = np.diag(L)
    if np.any(diag <= 0):
        return np.inf, np.zeros_like(theta)
    m = mu.shape[0]
    r = alr(problem.y) - mu
    w = np.linalg.solve(L, r.T)  # (k, m)
    q = (w * w).sum(axis=0)
    ie = np.exp(-eta)
    value = float((ie * q).mean() + k * eta.mean() + 2.0 * np.log(diag).sum())
    vinv_r = np.linalg.solve(L.T, w).T  # (m, k)
    d_mu = -2.0 * ie[:, None] * vinv_r
    d_eta = -ie * q + k
    grad = (np.einsum("tk,tkp->p", d_mu, Jmu) + d_eta @ Jeta) / m
    S = (r * ie[:, None]).T @ r / m
    Linv_S_LinvT = np.linalg.solve(L, np.linalg.solve(L, S).T)
    gL = -2.0 * np.linalg.solve(L.T, Linv_S_LinvT)
    gL = gL + np.diag(2.0 / diag)
    grad[-nL:] = np.tril(gL)[np.tril_indices(k)]
    return value, grad


def _barrier(theta, problem: _Problem):
    """Penalty keeping rho(B) below 1 for OD specs (value, gradient)."""
    grad = np.zeros_like(theta)
    if problem.kind != "od":
        return 0.0, grad
    k = problem.d - 1
    iB = k + k * k
    B = theta[iB:iB + k * k].reshape(k, k)
    rho = spectral_radius(B)
    if rho <= BARRIER_RHO:
        return 0.0, grad
    value = BARRIER_WEIGHT * (rho - BARRIER_RHO) ** 2
    h = 1e-7
    for idx in range(k * k):
        Bp = B.reshape(-1).copy()
        Bm = Bp.copy()
        Bp[idx] += h
        Bm[idx] -= h
        drho = (spectral_radius(Bp.reshape(k, k)) - spectral_radius(Bm.reshape(k, k))) / (2 * h)
        grad[iB + idx] = 2 * BARRIER_WEIGHT * (rho - BARRIER_RHO) * drho
    return value, grad


def _run(objective, problem: _Problem, theta0, free, gtol=GTOL, maxiter=MAXITER, barrier=True):
    """Minimize ``objective`` over the free coordinates of ``theta0``."""
    tf = _Transform(problem.names)
    u_full = tf.to_free(theta0)

    def fun_grad(u_free):
        u = u_full.copy()
        u[free] = u_free
        theta = tf.from_free(u)
        f, g = objective(problem, theta)
        if barrier:
            bf, bg = _barrier(theta, problem)
            f, g = f + bf, g + bg
        g = g * tf.dtheta_du(u)
        return f, g[free]

    res = minimize_bfgs(fun_grad, u_full[free], gtol=gtol, maxiter=maxiter)
    u = u_full.copy()
    u[free] = res.x
    return tf.from_free(u), res


def _identification_warning(theta, problem: _Problem):
    if problem.kind != "od":
        return
    k = problem.d - 1
    A = theta[k:k + k * k].reshape(k, k)
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.max() == 0 or sv.min() < 1e-6 * sv.max():
        msg = "fitted A is numerically rank deficient; B may not be identified"
        warnings.warn(msg, RuntimeWarning, stacklevel=3)
        log.warning(msg)


def _result(method, problem, theta, res: OptimResult, free, fitted_spec=True, trace=None):
    spec = problem.spec(theta) if fitted_spec else None
    names = problem.names if fitted_spec else problem.names[: problem.n_mean]
    return FitResult(
        method=method, spec=spec, theta=theta, names=names, objective=res.fun,
        converged=res.converged, iterations=res.iterations, gradient_norm=res.grad_norm,
        free=free, message=res.message, trace=list(trace or [res.fun]),
        d=problem.d, p=problem.p, kind=problem.kind,
    )


# -- estimators -------------------------------------------------------------

def fit_convex(data, p: int = 1, init=None, fixed: dict | None = None) -> FitResult:
    """Minimize the convex contrast over the mean block of a finite Dirichlet model.

    The search starts at zero (or ``init``, a mean-block vector).  Only the
    mean block is returned; ``spec`` is ``None``.
    """
    data = _prepare(data)
    problem = _Problem("dirichlet", "finite", data, p)
    n, d = data.shape
    names = problem.names[: problem.n_mean]
    if n - p <= problem.n_mean:
        raise EstimationError(f"{n} observations are too few for {problem.n_mean} mean parameters")
    free = _free_mask(names, fixed)
    theta0 = np.zeros(problem.n_mean) if init is None else np.array(init, dtype=float)
    theta0 = _apply_fixed(theta0, names, fixed)

    def fun_grad(x):
        theta = theta0.copy()
        theta[free] = x
        f, g = convex_objective(problem, theta)
        return f, g[free]

    res = minimize_bfgs(fun_grad, theta0[free], gtol=GTOL, maxiter=MAXITER)
    theta = theta0.copy()
    theta[free] = res.x
    if not res.converged:
        log.warning("convex contrast: %s (|g|=%.3g)", res.message, res.grad_norm)
    return _result(Method.CONVEX, problem, theta, res, free, fitted_spec=False)


def _dispersion_grid(problem: _Problem, theta, free):
    """Pick the intercept (a0 or c) on a grid, other dispersion terms at zero."""
    name = "a0" if problem.kind == "finite" else "c"
    idx = problem.names.index(name)
    if not free[idx]:
        return theta
    best, best_val = theta, np.inf
    for v in DISPERSION_GRID:
        cand = theta.copy()
        cand[idx] = v
        val, _ = dirichlet_negloglik(problem, cand)
        if val < best_val:
            best, best_val = cand, val
    return best


def fit_dirichlet_mle(data, kind: str = "finite", p: int = 1, init: ModelSpec | None = None,
                      fixed: dict | None = None, od_init=None) -> FitResult:
    """Conditional maximum likelihood for a Dirichlet model.

    Default start: the convex-contrast fit for the mean block (for ``od``
    the p=1 fit gives C and A, with B = 0), dispersion feedback at zero and
    the intercept chosen on a grid over [-2, 4] by profile likelihood.
    Entries of ``fixed`` (parameter name -> value) are held constant.
    """
    data = _prepare(data)
    problem = _Problem("dirichlet", kind, data, p, od_init)
    names = problem.names
    free = _free_mask(names, fixed)
    if init is not None:
        theta0 = init.to_vector().astype(float)
        if kind == "od" and abs(theta0[-1]) >= 1:
            raise ValueError("initial b must satisfy |b| < 1")
        theta0 = _apply_fixed(theta0, names, fixed)
    else:
        theta0 = _apply_fixed(np.zeros(len(names)), names, fixed)
        mean_fixed = {n: v for n, v in (fixed or {}).items() if n in names[: problem.n_mean]}
        if kind == "finite":
            cvx = fit_convex(data, p, fixed=mean_fixed)
            theta0[: problem.n_mean] = cvx.theta
        else:
            k = problem.d - 1
            sub = {n.replace("C[", "A0[").replace("A[", "A1["): v for n, v in mean_fixed.items()
                   if not n.startswith("B[")}
            cvx = fit_convex(data, 1, fixed=sub)
            theta0[: k + k * k] = cvx.theta
            theta0 = _apply_fixed(theta0, names, fixed)
        theta0 = _dispersion_grid(problem, theta0, free)
    theta, res = _run(dirichlet_negloglik, problem, theta0, free)
    if not res.converged:
        log.warning("Dirichlet MLE: %s (|g|=%.3g)", res.message, res.grad_norm)
    _identification_warning(theta, problem)
    return _result(Method.DIRICHLET_MLE, problem, theta, res, free)


def fit_ln_ls(data, p: int = 1) -> FitResult:
    """Least squares of alr(Y_t) on (1, h1(Y_{t-1}), ..., h1(Y_{t-p})) via QR."""
    data = _prepare(data)
    n, d = data.shape
    k = d - 1
    if n <= p + 1:
        raise EstimationError(f"need more than p+1={p + 1} observations")
    problem = _Problem("logistic_normal", "finite", data, p)
    Z = alr(data[p:])
    X = np.concatenate([np.ones((n - p, 1))] + [h1(data[p - lag: n - lag]) for lag in range(1, p + 1)], axis=1)
    Q, R = np.linalg.qr(X)
    rdiag = np.abs(np.diag(R))
    if rdiag.min() <= 1e-10 * rdiag.max():
        raise EstimationError("design matrix is rank deficient")
    W = np.linalg.solve(R, Q.T @ Z)  # (1 + p k, k)
    A0 = W[0]
    A = np.stack([W[1 + lag * k: 1 + (lag + 1) * k].T for lag in range(p)])
    theta_mean = np.concatenate([A0, A.reshape(-1)])
    resid = Z - X @ W
    value = float((resid ** 2).sum(axis=1).mean())
    res = OptimResult(theta_mean, value, np.zeros(0), True, 0, "closed form")
    free = np.ones(problem.n_mean, dtype=bool)
    out = _result(Method.LN_LS, problem, theta_mean, res, free, fitted_spec=False)
    out.gradient_norm = float(np.max(np.abs(X.T @ resid))) / (n - p)
    return out


def _ls_objective(problem: _Problem, theta):
    mu, _, Jmu, _ = problem.latent(theta)
    if not np.all(np.isfinite(mu)):
        return np.inf, np.zeros_like(theta)
    r = alr(problem.y) - mu
    m = mu.shape[0]
    return float((r ** 2).sum(axis=1).mean()), -2.0 * np.einsum("tk,tkp->p", r, Jmu) / m


def fit_ln_qmle(data, kind: str = "finite", p: int = 1, init: ModelSpec | None = None,
                fixed: dict | None = None, refine: bool = False, od_init=None) -> FitResult:
    """Two-step Gaussian QMLE for logistic-normal models.

    Step 1 estimates the mean block (closed-form least squares for finite
    specs, gradient descent on the squared alr residuals for OD specs).
    Step 2 minimizes the QMLE criterion over the dispersion terms and the
    Cholesky factor of V with the mean block held fixed.  ``refine=True``
    adds a joint pass over all free parameters.  ``trace`` holds the QMLE
    criterion at the start of step 2, after step 2 and (if run) after the
    joint pass.
    """
    data = _prepare(data)
    problem = _Problem("logistic_normal", kind, data, p, od_init)
    names = problem.names
    k = problem.d - 1
    nm = problem.n_mean
    free = _free_mask(names, fixed)
    if init is not None:
        theta = _apply_fixed(init.to_vector().astype(float), names, fixed)
    else:
        theta = _apply_fixed(problem.template.to_vector(), names, fixed)
        if kind == "finite":
            theta[:nm] = fit_ln_ls(data, p).theta
            theta = _apply_fixed(theta, names, fixed)
        else:
            ls1 = fit_ln_ls(data, 1).theta
            theta[: k + k * k] = ls1
            theta = _apply_fixed(theta, names, fixed)
            mean_free = free & (np.arange(len(names)) < nm)
            theta, res1 = _run(_ls_objective, problem, theta, mean_free)
            if not res1.converged:
                log.warning("QMLE step 1: %s (|g|=%.3g)", res1.message, res1.grad_norm)
        mu, _, _, _ = problem.latent(theta)
        resid = alr(problem.y) - mu
        cov = resid.T @ resid / resid.shape[0]
        Lhat = np.linalg.cholesky(cov + 1e-12 * np.eye(k))
        theta[-(k * (k + 1) // 2):] = Lhat[np.tril_indices(k)]
        theta = _apply_fixed(theta, names, fixed)
    trace = [qmle_objective(problem, theta)[0]]
    step2 = free & (np.arange(len(names)) >= nm)
    theta, res = _run(qmle_objective, problem, theta, step2)
    trace.append(res.fun)
    if refine:
        theta, res = _run(qmle_objective, problem, theta, free)
        trace.append(res.fun)
    if not res.converged:
        log.warning("QMLE: %s (|g|=%.3g)", res.message, res.grad_norm)
    _identification_warning(theta, problem)
    out = _result(Method.LN_QMLE, problem, theta, res, free, trace=trace)
    return out


# -- uncertainty ------------------------------------------------------------

def _refit(method: Method, data, kind: str, p: int, fixed: dict | None):
    if method is Method.CONVEX:
        mean_fixed = {n: v for n, v in (fixed or {}).items() if not n.startswith("a")}
        return fit_convex(data, p, fixed=mean_fixed)
    if method is Method.DIRICHLET_MLE:
        return fit_dirichlet_mle(data, kind, p, fixed=fixed)
    if method is Method.LN_LS:
        return fit_ln_ls(data, p)
    return fit_ln_qmle(data, kind, p, fixed=fixed)


@dataclass
class BootstrapResult:
    se: np.ndarray
    names: list[str]
    estimates: np.ndarray
    n_failed: int

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.se.tolist()))


def bootstrap_se(spec_hat: ModelSpec, n: int, reps: int, rng=None, method: Method | str = None,
                 fixed: dict | None = None, burn_in: int = 1000, workers: int = 1) -> BootstrapResult:
    """Parametric bootstrap standard errors.

    Each replicate simulates ``n`` observations from ``spec_hat`` with its
    own stream spawned from ``rng`` and refits with ``method``.  Replicates
    that fail to converge are dropped and counted; more than 20% failures
    raise :class:`EstimationError`.
    """
    if reps < 2:
        raise ValueError("bootstrap needs reps >= 2")
    require_stationary(spec_hat)
    if method is None:
        method = Method.DIRICHLET_MLE if spec_hat.family == "dirichlet" else Method.LN_QMLE
    method = Method(method)
    seeds = seed_sequence(rng).spawn(reps)

    def one(ss):
        data = simulate(spec_hat, n, burn_in, np.random.default_rng(ss))
        try:
            fit = _refit(method, data, spec_hat.kind, spec_hat.p, fixed)
        except (EstimationError, DataQualityError, ValueError) as exc:
            log.info("bootstrap replicate failed: %s", exc)
            return None
        return fit if fit.converged else None

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            fits = list(ex.map(one, seeds))
    else:
        fits = [one(s) for s in seeds]
    ok = [f for f in fits if f is not None]
    n_failed = reps - len(ok)
    if n_failed > 0.2 * reps:
        raise EstimationError(f"{n_failed} of {reps} bootstrap replicates failed")
    if len(ok) < 2:
        raise EstimationError("fewer than two successful bootstrap replicates")
    est = np.stack([f.theta for f in ok])
    return BootstrapResult(est.std(axis=0, ddof=1), ok[0].names, est, n_failed)


def sandwich_variance(spec_hat: ModelSpec, data, fixed: dict | None = None, od_init=None):
    """Plug-in sandwich H^-1 Var(score) H^-1 for a fitted Dirichlet model.

    Returns ``(V, names)`` over the free parameters, normalized per
    observation: the covariance of the estimator is approximately ``V / n``.
    """
    if spec_hat.family != "dirichlet":
        raise ValueError("sandwich variance is implemented for Dirichlet models")
    data = _prepare(data)
    problem = _Problem("dirichlet", spec_hat.kind, data, spec_hat.p, od_init)
    free = _free_mask(problem.names, fixed)
    theta = spec_hat.to_vector()

    def grad(x):
        t = theta.copy()
        t[free] = x
        return dirichlet_negloglik(problem, t)[1][free]

    H = fd_jacobian(grad, theta[free])
    _, scores = dirichlet_scores(problem, theta)
    s = scores[:, free]
    S = s.T @ s / s.shape[0]
    try:
        Hinv = np.linalg.inv(H)
    except np.linalg.LinAlgError as exc:
        raise EstimationError("Hessian is singular") from exc
    if np.linalg.cond(H) > 1e12:
        raise EstimationError("Hessian is numerically singular")
    V = Hinv @ S @ Hinv
    V = 0.5 * (V + V.T)
    return V, [n for n, f in zip(problem.names, free) if f]


def objective_function(method: Method | str, data, kind: str = "finite", p: int = 1):
    """Expose an estimator's criterion as ``f(theta) -> (value, gradient)``.

    The gradient is with respect to the natural parameter vector (the mean
    block only for the convex contrast and least squares).
    """
    method = Method(method)
    data = _prepare(data)
    family = "logistic_normal" if method in (Method.LN_LS, Method.LN_QMLE) else "dirichlet"
    problem = _Problem(family, kind, data, p)
    if method is Method.CONVEX:
        return lambda th: convex_objective(problem, np.asarray(th, dtype=float))
    if method is Method.DIRICHLET_MLE:
        return lambda th: dirichlet_negloglik(problem, np.asarray(th, dtype=float))
    if method is Method.LN_QMLE:
        return lambda th: qmle_objective(problem, np.asarray(th, dtype=float))

    def ls(th):
        theta = np.zeros(len(problem.names))
        theta[: problem.n_mean] = th
        value, grad = _ls_objective(problem, theta)
        return value, grad[: problem.n_mean]

    return ls
