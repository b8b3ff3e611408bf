"""Small dense quasi-Newton minimizer used by all estimators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

FunGrad = Callable[[np.ndarray], "tuple[float, np.ndarray]"]


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    converged: bool
    iterations: int
    message: str

    @property
    def grad_norm(self) -> float:
        return float(np.max(np.abs(self.grad))) if self.grad.size else 0.0


def fd_step(x) -> np.ndarray:
    return 1e-6 * np.maximum(1.0, np.abs(x))


def fd_gradient(f: Callable[[np.ndarray], float], x) -> np.ndarray:
    """Central finite-difference gradient."""
    x = np.asarray(x, dtype=float)
    h = fd_step(x)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        g[i] = (f(x + e) - f(x - e)) / (2 * h[i])
    return g


def fd_jacobian(grad: Callable[[np.ndarray], np.ndarray], x) -> np.ndarray:
    """Central differences of a gradient, symmetrized (a Hessian estimate)."""
    x = np.asarray(x, dtype=float)
    h = fd_step(x)
    H = np.empty((x.size, x.size))
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h[i]
        H[:, i] = (grad(x + e) - grad(x - e)) / (2 * h[i])
    return 0.5 * (H + H.T)


def _newton_polish(fun_grad, x, f, g, gtol, max_steps=20):
    """Newton steps with a finite-difference Hessian, accepted while |g| shrinks."""
    def grad(z):
        return fun_grad(z)[1]

    for _ in range(max_steps):
        if np.max(np.abs(g)) < gtol:
            break
        try:
            H = fd_jacobian(grad, x)
            step = -np.linalg.solve(H + 1e-12 * np.eye(x.size), g)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        improved = False
        for _ in range(30):
            xn = x + t * step
            fn, gn = fun_grad(xn)
            if np.isfinite(fn) and np.max(np.abs(gn)) < np.max(np.abs(g)) and fn <= f + 1e-12 * max(1.0, abs(f)):
                x, f, g = xn, fn, gn
                improved = True
                break
            t *= 0.5
        if not improved:
            break
    return x, f, g


def minimize_bfgs(fun_grad: FunGrad, x0, gtol: float = 1e-8, maxiter: int = 5000,
                  c1: float = 1e-4) -> OptimResult:
    """BFGS with Armijo backtracking on the inverse-Hessian approximation.

    Non-finite objective values are treated as "step too long".  If the line
    search stalls at rounding level before the gradient tolerance is met, a
    few finite-difference Newton steps finish the job.
    """
    x = np.array(x0, dtype=float)
    n = x.size
    f, g = fun_grad(x)
    if not np.isfinite(f):
        raise ValueError("objective is not finite at the starting point")
    if n == 0:
        return OptimResult(x, float(f), g, True, 0, "no free parameters")
    Hinv = np.eye(n)
    first = True
    message = "iteration cap reached"
    it = 0
    for it in range(1, maxiter + 1):
        if np.max(np.abs(g)) < gtol:
            message = "gradient tolerance reached"
            break
        direction = -Hinv @ g
        slope = g @ direction
        if not slope < 0:
            Hinv = np.eye(n)
            direction = -g
            slope = -(g @ g)
        t = 1.0
        accepted = False
        for _ in range(60):
            xn = x + t * direction
            fn, gn = fun_grad(xn)
            if np.isfinite(fn) and fn <= f + c1 * t * slope:
                accepted = True
                break
            # rounding-level plateau: accept if the gradient still improves
            if np.isfinite(fn) and fn <= f + 1e-14 * max(1.0, abs(f)) and np.max(np.abs(gn)) < np.max(np.abs(g)):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            message = "line search failed"
            break
        s = xn - x
        y = gn - g
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if first:
                Hinv = (sy / (y @ y)) * np.eye(n)
                first = False
            rho = 1.0 / sy
            Hy = Hinv @ y
            Hinv = Hinv + (rho * rho * (y @ Hy) + rho) * np.outer(s, s) - rho * (np.outer(Hy, s) + np.outer(s, Hy))
        x, f, g = xn, fn, gn
    if np.max(np.abs(g)) >= gtol:
        x, f, g = _newton_polish(fun_grad, x, f, g, gtol)
        if np.max(np.abs(g)) < gtol:
            message = "gradient tolerance reached after Newton polish"
    converged = bool(np.max(np.abs(g)) < gtol)
    return OptimResult(x, float(f), g, converged, it, message)
