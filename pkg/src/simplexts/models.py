"""Model specifications, latent filters and simulation.

Four variants are supported:

* ``DirichletFiniteSpec``      mu_t = A0 + sum_k A_k h1(Y_{t-k}),  log phi_t = a0 + sum_k a_k H(Y_{t-k})
* ``DirichletODSpec``          mu_t = C + A h1(Y_{t-1}) + B mu_{t-1},  log phi_t = c + a H(Y_{t-1}) + b log phi_{t-1}
* ``LogisticNormalFiniteSpec`` as the finite Dirichlet spec without ``a0``; Sigma_t = phi_t V
* ``LogisticNormalODSpec``     as the OD Dirichlet spec without ``c``; Sigma_t = phi_t V

where ``H`` is the Shannon entropy and ``lambda_t = alr_inv(mu_t)``.  Every
spec maps to a flat parameter vector (see ``param_names``) with matrices
stored row-major; names use 1-based indices, e.g. ``A1[1,2]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .distributions import sample_dirichlet_alpha
from .simplex import alr_inv, check_compositions, h1, shannon_entropy


class StationarityError(ValueError):
    pass


class SpectralRadiusError(RuntimeError):
    pass


def spectral_radius(M) -> float:
    """Largest eigenvalue modulus of a square matrix (Hessenberg QR via LAPACK)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    if M.size == 0:
        return 0.0
    if not np.all(np.isfinite(M)):
        raise SpectralRadiusError("matrix has non-finite entries")
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise SpectralRadiusError(f"eigenvalue iteration did not converge: {exc}") from exc
    return float(np.max(np.abs(ev)))


# -- specs ------------------------------------------------------------------

def _vec(x, k):
    x = np.array(x, dtype=float).reshape(-1)
    if x.size != k:
        raise ValueError(f"expected a vector of length {k}, got {x.size}")
    return x


def _mat(x, k):
    x = np.array(x, dtype=float)
    if x.shape != (k, k):
        raise ValueError(f"expected a {k}x{k} matrix, got shape {x.shape}")
    return x


def _chol(L=None, V=None, k=None):
    if L is None:
        V = _mat(V, k)
        if not np.allclose(V, V.T, atol=1e-12):
            raise ValueError("V must be symmetric")
        try:
            L = np.linalg.cholesky(V)
        except np.linalg.LinAlgError as exc:
            raise ValueError("V must be positive definite") from exc
    L = np.tril(_mat(L, k))
    if np.any(np.diag(L) <= 0):
        raise ValueError("Cholesky factor needs a strictly positive diagonal")
    return L


def _names_vec(prefix, k):
    return [f"{prefix}[{i + 1}]" for i in range(k)]


def _names_mat(prefix, k):
    return [f"{prefix}[{i + 1},{j + 1}]" for i in range(k) for j in range(k)]


def _names_tril(prefix, k):
    return [f"{prefix}[{i + 1},{j + 1}]" for i in range(k) for j in range(i + 1)]


@dataclass(frozen=True, eq=False)
class DirichletFiniteSpec:
    A0: np.ndarray
    A: np.ndarray
    a0: float
    a: np.ndarray

    family = "dirichlet"
    kind = "finite"

    def __post_init__(self):
        A0 = np.array(self.A0, dtype=float).reshape(-1)
        k = A0.size
        A = np.array(self.A, dtype=float)
        if A.ndim == 2:
            A = A[None]
        if A.ndim != 3 or A.shape[1:] != (k, k) or A.shape[0] < 1:
            raise ValueError(f"A must be a list of p >= 1 matrices of shape {k}x{k}")
        a = _vec(self.a, A.shape[0])
        object.__setattr__(self, "A0", A0)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "a0", float(self.a0))
        object.__setattr__(self, "a", a)

    @property
    def d(self) -> int:
        return self.A0.size + 1

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def n_mean(self) -> int:
        k = self.d - 1
        return k + self.p * k * k

    def param_names(self) -> list[str]:
        k = self.d - 1
        names = _names_vec("A0", k)
        for lag in range(1, self.p + 1):
            names += _names_mat(f"A{lag}", k)
        return names + ["a0"] + [f"a{lag}" for lag in range(1, self.p + 1)]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.A0, self.A.reshape(-1), [self.a0], self.a])

    @classmethod
    def from_vector(cls, theta, d: int, p: int = 1) -> "DirichletFiniteSpec":
        k = d - 1
        theta = np.asarray(theta, dtype=float)
        i = k + p * k * k
        return cls(theta[:k], theta[k:i].reshape(p, k, k), theta[i], theta[i + 1:i + 1 + p])

    def mean_params(self) -> np.ndarray:
        return self.to_vector()[: self.n_mean]


@dataclass(frozen=True, eq=False)
class DirichletODSpec:
    C: np.ndarray
    A: np.ndarray
    B: np.ndarray
    c: float
    a: float
    b: float

    family = "dirichlet"
    kind = "od"
    p = 1

    def __post_init__(self):
        C = np.array(self.C, dtype=float).reshape(-1)
        k = C.size
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", _mat(self.A, k))
        object.__setattr__(self, "B", _mat(self.B, k))
        for name in ("c", "a", "b"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def d(self) -> int:
        return self.C.size + 1

    @property
    def n_mean(self) -> int:
        k = self.d - 1
        return k + 2 * k * k

    def param_names(self) -> list[str]:
        k = self.d - 1
        return _names_vec("C", k) + _names_mat("A", k) + _names_mat("B", k) + ["c", "a", "b"]

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.C, self.A.reshape(-1), self.B.reshape(-1), [self.c, self.a, self.b]])

    @classmethod
    def from_vector(cls, theta, d: int, p: int = 1) -> "DirichletODSpec":
        k = d - 1
        theta = np.asarray(theta, dtype=float)
        i = k + k * k
        j = i + k * k
        return cls(theta[:k], theta[k:i].reshape(k, k), theta[i:j].reshape(k, k), *theta[j:j + 3])

    def mean_params(self) -> np.ndarray:
        return self.to_vector()[: self.n_mean]


@dataclass(frozen=True, eq=False)
class LogisticNormalFiniteSpec:
    A0: np.ndarray
    A: np.ndarray
    a: np.ndarray
    L: np.ndarray = field(default=None)
    V: np.ndarray = field(default=None, repr=False)

    family = "logistic_normal"
    kind = "finite"

    def __post_init__(self):
        A0 = np.array(self.A0, dtype=float).reshape(-1)
        k = A0.size
        A = np.array(self.A, dtype=float)
        if A.ndim == 2:
            A = A[None]
        if A.ndim != 3 or A.shape[1:] != (k, k) or A.shape[0] < 1:
            raise ValueError(f"A must be a list of p >= 1 matrices of shape {k}x{k}")
        if self.L is None and self.V is None:
            raise ValueError("give the covariance V or its Cholesky factor L")
        L = _chol(self.L, self.V, k)
        object.__setattr__(self, "A0", A0)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "a", _vec(self.a, A.shape[0]))
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "V", L @ L.T)

    @property
    def d(self) -> int:
        return self.A0.size + 1

    @property
    def p(self) -> int:
        return self.A.shape[0]

    @property
    def n_mean(self) -> int:
        k = self.d - 1
        return k + self.p * k * k

    def param_names(self) -> list[str]:
        k = self.d - 1
        names = _names_vec("A0", k)
        for lag in range(1, self.p + 1):
            names += _names_mat(f"A{lag}", k)
        return names + [f"a{lag}" for lag in range(1, self.p + 1)] + _names_tril("L", self.d - 1)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.A0, self.A.reshape(-1), self.a, self.L[np.tril_indices(self.d - 1)]])

    @classmethod
    def from_vector(cls, theta, d: int, p: int = 1) -> "LogisticNormalFiniteSpec":
        k = d - 1
        theta = np.asarray(theta, dtype=float)
        i = k + p * k * k
        L = np.zeros((k, k))
        L[np.tril_indices(k)] = theta[i + p:]
        return cls(theta[:k], theta[k:i].reshape(p, k, k), theta[i:i + p], L=L)

    def mean_params(self) -> np.ndarray:
        return self.to_vector()[: self.n_mean]


@dataclass(frozen=True, eq=False)
class LogisticNormalODSpec:
    C: np.ndarray
    A: np.ndarray
    B: np.ndarray
    a: float
    b: float
    L: np.ndarray = field(default=None)
    V: np.ndarray = field(default=None, repr=False)

    family = "logistic_normal"
    kind = "od"
    p = 1

    def __post_init__(self):
        C = np.array(self.C, dtype=float).reshape(-1)
        k = C.size
        if self.L is None and self.V is None:
            raise ValueError("give the covariance V or its Cholesky factor L")
        L = _chol(self.L, self.V, k)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "A", _mat(self.A, k))
        object.__setattr__(self, "B", _mat(self.B, k))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "V", L @ L.T)

    @property
    def d(self) -> int:
        return self.C.size + 1

    @property
    def n_mean(self) -> int:
        k = self.d - 1
        return k + 2 * k * k

    def param_names(self) -> list[str]:
        k = self.d - 1
        return (_names_vec("C", k) + _names_mat("A", k) + _names_mat("B", k)
                + ["a", "b"] + _names_tril("L", k))

    def to_vector(self) -> np.ndarray:
        k = self.d - 1
        return np.concatenate([self.C, self.A.reshape(-1), self.B.reshape(-1), [self.a, self.b],
                               self.L[np.tril_indices(k)]])

    @classmethod
    def from_vector(cls, theta, d: int, p: int = 1) -> "LogisticNormalODSpec":
        k = d - 1
        theta = np.asarray(theta, dtype=float)
        i = k + k * k
        j = i + k * k
        L = np.zeros((k, k))
        L[np.tril_indices(k)] = theta[j + 2:]
        return cls(theta[:k], theta[k:i].reshape(k, k), theta[i:j].reshape(k, k),
                   theta[j], theta[j + 1], L=L)

    def mean_params(self) -> np.ndarray:
        return self.to_vector()[: self.n_mean]


ModelSpec = Union[DirichletFiniteSpec, DirichletODSpec, LogisticNormalFiniteSpec, LogisticNormalODSpec]

SPEC_TYPES = {
    ("dirichlet", "finite"): DirichletFiniteSpec,
    ("dirichlet", "od"): DirichletODSpec,
    ("logistic_normal", "finite"): LogisticNormalFiniteSpec,
    ("logistic_normal", "od"): LogisticNormalODSpec,
}


def spec_type(family: str, kind: str):
    try:
        return SPEC_TYPES[(family, kind)]
    except KeyError:
        raise ValueError(f"unknown model {family!r}/{kind!r}") from None


def spec_to_dict(spec: ModelSpec) -> dict:
    out = {"family": spec.family, "kind": spec.kind, "d": spec.d}
    if spec.kind == "finite":
        out.update(p=spec.p, A0=spec.A0.tolist(), A=spec.A.tolist(), a=spec.a.tolist())
        if spec.family == "dirichlet":
            out["a0"] = spec.a0
    else:
        out.update(C=spec.C.tolist(), A=spec.A.tolist(), B=spec.B.tolist(), a=spec.a, b=spec.b)
        if spec.family == "dirichlet":
            out["c"] = spec.c
    if spec.family == "logistic_normal":
        out["V"] = spec.V.tolist()
    return out


def spec_from_dict(doc: dict) -> ModelSpec:
    family = doc.get("family", "dirichlet")
    kind = doc.get("kind", "finite")
    cls = spec_type(family, kind)
    if kind == "finite":
        kw = dict(A0=doc["A0"], A=doc["A"], a=doc["a"])
        if family == "dirichlet":
            kw["a0"] = doc["a0"]
    else:
        kw = dict(C=doc["C"], A=doc["A"], B=doc["B"], a=doc["a"], b=doc["b"])
        if family == "dirichlet":
            kw["c"] = doc["c"]
    if family == "logistic_normal":
        if "L" in doc:
            kw["L"] = doc["L"]
        else:
            kw["V"] = doc["V"]
    spec = cls(**kw)
    if "d" in doc and int(doc["d"]) != spec.d:
        raise ValueError(f"declared d={doc['d']} does not match parameters (d={spec.d})")
    return spec


# -- stationarity -----------------------------------------------------------

@dataclass(frozen=True)
class StationarityReport:
    satisfied: bool
    rho_B: float
    abs_b: float

    @property
    def margin(self) -> float:
        return 1.0 - max(self.rho_B, self.abs_b)


def check_stationarity(spec: ModelSpec) -> StationarityReport:
    """max(|b|, rho(B)) < 1 for observation-driven specs; finite specs always pass."""
    if spec.kind == "finite":
        return StationarityReport(True, 0.0, 0.0)
    rho = spectral_radius(spec.B)
    ab = abs(spec.b)
    return StationarityReport(bool(max(rho, ab) < 1.0), rho, ab)


def require_stationary(spec: ModelSpec) -> None:
    rep = check_stationarity(spec)
    if not rep.satisfied:
        raise StationarityError(
            f"stationarity condition max(|b|, rho(B)) < 1 violated: |b|={rep.abs_b:.6g}, rho(B)={rep.rho_B:.6g}"
        )


# -- filtering --------------------------------------------------------------

@dataclass(frozen=True)
class LatentPath:
    """Conditional-law parameters for data[start:], plus the next-step values.

    ``mu[s]`` and ``logphi[s]`` parameterize the law of ``data[start + s]``;
    ``mu_next``/``logphi_next`` the law of the first unobserved step.
    """

    family: str
    start: int
    mu: np.ndarray
    logphi: np.ndarray
    mu_next: np.ndarray
    logphi_next: float
    chol: np.ndarray | None = None

    @property
    def lam(self) -> np.ndarray:
        return alr_inv(self.mu)

    @property
    def phi(self) -> np.ndarray:
        return np.exp(self.logphi)

    @property
    def sigma(self) -> np.ndarray:
        if self.chol is None:
            raise AttributeError("only logistic-normal paths carry a covariance")
        V = self.chol @ self.chol.T
        return self.phi[:, None, None] * V

    @property
    def lam_next(self) -> np.ndarray:
        return alr_inv(self.mu_next)

    def __len__(self):
        return self.mu.shape[0]


def _od_init(spec, data, init):
    k = spec.d - 1
    if init is None or init == "zero":
        return np.zeros(k), 0.0
    if init == "stationary":
        ybar = data.mean(axis=0)
        mu0 = np.linalg.solve(np.eye(k) - spec.B, spec.C + spec.A @ h1(ybar))
        c = spec.c if spec.family == "dirichlet" else 0.0
        return mu0, (c + spec.a * shannon_entropy(ybar)) / (1.0 - spec.b)
    mu0 = _vec(init["mu0"], k)
    return mu0, float(init.get("logphi0", 0.0))


def _as_data(spec, data) -> np.ndarray:
    data = check_compositions(data)
    if data.ndim != 2:
        raise ValueError("data must be a sequence of compositions")
    if data.shape[1] != spec.d:
        raise ValueError(f"data has d={data.shape[1]}, spec has d={spec.d}")
    return data


def latent_with_jacobian(spec: ModelSpec, data, init=None, jac: bool = True):
    """Latent means/log-scales for every usable step and their parameter Jacobians.

    Returns ``(start, mu, eta, Jmu, Jeta)`` where ``mu`` has shape
    ``(n - start + 1, d - 1)``; the final row is the one-step-ahead value.
    Jacobians are taken with respect to ``spec.to_vector()`` (``None`` when
    ``jac`` is false).
    """
    data = _as_data(spec, data)
    n, d = data.shape
    k = d - 1
    P = len(spec.param_names())
    dirichlet = spec.family == "dirichlet"
    if spec.kind == "finite":
        p = spec.p
        if n <= p:
            raise ValueError(f"need more than p={p} observations, got {n}")
        m = n - p + 1
        lags_h1 = np.stack([h1(data[p - lag: n - lag + 1]) for lag in range(1, p + 1)])  # (p, m, k)
        lags_h2 = np.stack([shannon_entropy(data[p - lag: n - lag + 1]) for lag in range(1, p + 1)])
        mu = spec.A0 + np.einsum("pij,pmj->mi", spec.A, lags_h1)
        eta = lags_h2.T @ spec.a
        if dirichlet:
            eta = eta + spec.a0
        if not jac:
            return p, mu, eta, None, None
        Jmu = np.zeros((m, k, P))
        Jeta = np.zeros((m, P))
        Jmu[:, np.arange(k), np.arange(k)] = 1.0
        for lag in range(p):
            off = k + lag * k * k
            for i in range(k):
                Jmu[:, i, off + i * k: off + (i + 1) * k] = lags_h1[lag]
        off = k + p * k * k
        if dirichlet:
            Jeta[:, off] = 1.0
            off += 1
        Jeta[:, off: off + p] = lags_h2.T
        return p, mu, eta, Jmu, Jeta

    if n < 1:
        raise ValueError("need at least one observation")
    mu_prev, eta_prev = _od_init(spec, data, init)
    H1 = h1(data)
    H2 = shannon_entropy(data)
    mu = np.empty((n, k))
    eta = np.empty(n)
    c = spec.c if dirichlet else 0.0
    iA = k
    iB = k + k * k
    ic = k + 2 * k * k
    ia = ic + 1 if dirichlet else ic
    ib = ia + 1
    Jmu = np.zeros((n, k, P)) if jac else None
    Jeta = np.zeros((n, P)) if jac else None
    Jm_prev = np.zeros((k, P))
    Je_prev = np.zeros(P)
    rows = np.arange(k)
    for s in range(1, n + 1):
        y1 = H1[s - 1]
        mu_s = spec.C + spec.A @ y1 + spec.B @ mu_prev
        eta_s = c + spec.a * H2[s - 1] + spec.b * eta_prev
        if jac:
            Jm = spec.B @ Jm_prev
            Jm[rows, rows] += 1.0
            for i in range(k):
                Jm[i, iA + i * k: iA + (i + 1) * k] += y1
                Jm[i, iB + i * k: iB + (i + 1) * k] += mu_prev
            Je = spec.b * Je_prev
            if dirichlet:
                Je[ic] += 1.0
            Je[ia] += H2[s - 1]
            Je[ib] += eta_prev
            Jmu[s - 1] = Jm
            Jeta[s - 1] = Je
            Jm_prev, Je_prev = Jm, Je
        mu[s - 1] = mu_s
        eta[s - 1] = eta_s
        mu_prev, eta_prev = mu_s, eta_s
    return 1, mu, eta, Jmu, Jeta


def _filter(spec, data, init=None) -> LatentPath:
    start, mu, eta, _, _ = latent_with_jacobian(spec, data, init, jac=False)
    chol = spec.L if spec.family == "logistic_normal" else None
    return LatentPath(spec.family, start, mu[:-1], eta[:-1], mu[-1], float(eta[-1]), chol)


def filter_dirichlet_finite(spec: DirichletFiniteSpec, data) -> LatentPath:
    return _filter(spec, data)


def filter_dirichlet_od(spec: DirichletODSpec, data, init=None) -> LatentPath:
    """Run the OD recursion; ``init`` is ``"zero"`` (default), ``"stationary"``
    or a mapping with ``mu0`` and ``logphi0``."""
    return _filter(spec, data, init)


def filter_ln_finite(spec: LogisticNormalFiniteSpec, data) -> LatentPath:
    return _filter(spec, data)


def filter_ln_od(spec: LogisticNormalODSpec, data, init=None) -> LatentPath:
    return _filter(spec, data, init)


def filter_path(spec: ModelSpec, data, init=None) -> LatentPath:
    if spec.kind == "finite":
        return _filter(spec, data)
    return _filter(spec, data, init)


# -- simulation -------------------------------------------------------------
#
# Batched state: for finite specs an array of the last p observations
# (reps, p, d), most recent first; for OD specs a tuple (mu, eta, y) of the
# latent values paired with the last observation y.

def initial_state(spec: ModelSpec, reps: int, composition=None):
    d = spec.d
    y0 = np.full(d, 1.0 / d) if composition is None else check_compositions(composition)
    if spec.kind == "finite":
        return np.broadcast_to(y0, (reps, spec.p, d)).copy()
    return np.zeros((reps, d - 1)), np.zeros(reps), np.broadcast_to(y0, (reps, d)).copy()


def state_from_history(spec: ModelSpec, history, reps: int = 1, init=None):
    """Batched state after observing ``history`` (the filter's end state)."""
    history = _as_data(spec, history)
    if spec.kind == "finite":
        if history.shape[0] < spec.p:
            raise ValueError(f"history needs at least p={spec.p} observations")
        lags = history[::-1][: spec.p]
        return np.broadcast_to(lags, (reps,) + lags.shape).copy()
    if history.shape[0] < 1:
        raise ValueError("history needs at least one observation")
    if history.shape[0] == 1:
        mu_last, eta_last = _od_init(spec, history, init)
    else:
        _, mu, eta, _, _ = latent_with_jacobian(spec, history[:-1], init, jac=False)
        mu_last, eta_last = mu[-1], eta[-1]
    return (np.broadcast_to(mu_last, (reps, spec.d - 1)).copy(),
            np.full(reps, float(eta_last)),
            np.broadcast_to(history[-1], (reps, spec.d)).copy())


def next_latent(spec: ModelSpec, state):
    """(mu, eta) of the next observation for a batched state."""
    dirichlet = spec.family == "dirichlet"
    if spec.kind == "finite":
        lags = state
        mu = spec.A0 + np.einsum("pij,rpj->ri", spec.A, lags[..., :-1])
        eta = shannon_entropy(lags) @ spec.a
        if dirichlet:
            eta = eta + spec.a0
        return mu, eta
    mu_prev, eta_prev, y = state
    mu = spec.C + h1(y) @ spec.A.T + mu_prev @ spec.B.T
    eta = (spec.c if dirichlet else 0.0) + spec.a * shannon_entropy(y) + spec.b * eta_prev
    return mu, eta


def advance_state(spec: ModelSpec, state, y, mu, eta):
    if spec.kind == "finite":
        new = np.empty_like(state)
        new[:, 1:] = state[:, :-1]
        new[:, 0] = y
        return new
    return mu, eta, y


def replace_last(spec: ModelSpec, state, y):
    """Overwrite the most recent observation (the latent state is untouched)."""
    if spec.kind == "finite":
        new = state.copy()
        new[:, 0] = y
        return new
    mu, eta, _ = state
    return mu, eta, np.broadcast_to(y, state[2].shape).copy()


def sample_next(spec: ModelSpec, mu, eta, rng: np.random.Generator) -> np.ndarray:
    """One draw per row from the conditional law with latent (mu, eta)."""
    if spec.family == "dirichlet":
        alpha = alr_inv(mu) * np.exp(eta)[:, None]
        return sample_dirichlet_alpha(alpha, rng)
    eps = rng.standard_normal(mu.shape) @ spec.L.T
    return alr_inv(mu + np.exp(0.5 * eta)[:, None] * eps)


def simulate_paths(spec: ModelSpec, state, steps: int, rng: np.random.Generator,
                   record_latent: bool = False):
    """Advance a batched state ``steps`` times; returns (paths, state[, mus]).

    ``paths`` has shape (reps, steps, d).
    """
    reps = state.shape[0] if spec.kind == "finite" else state[0].shape[0]
    out = np.empty((reps, steps, spec.d))
    mus = np.empty((reps, steps, spec.d - 1)) if record_latent else None
    for s in range(steps):
        mu, eta = next_latent(spec, state)
        y = sample_next(spec, mu, eta, rng)
        out[:, s] = y
        if record_latent:
            mus[:, s] = mu
        state = advance_state(spec, state, y, mu, eta)
    if record_latent:
        return out, state, mus
    return out, state


def simulate(spec: ModelSpec, n: int, burn_in: int = 1000, rng=None,
             init_composition=None) -> np.ndarray:
    """Simulate ``n`` observations after discarding ``burn_in`` steps.

    The chain starts from ``init_composition`` (uniform by default) with a
    zero latent state.  Returns an ``(n, d)`` array of compositions.
    """
    if n < 1 or burn_in < 0:
        raise ValueError("need n >= 1 and burn_in >= 0")
    require_stationary(spec)
    rng = np.random.default_rng(rng)
    state = initial_state(spec, 1, init_composition)
    if burn_in:
        _, state = simulate_paths(spec, state, burn_in, rng)
    paths, _ = simulate_paths(spec, state, n, rng)
    return paths[0]
