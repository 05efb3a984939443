"""Solvers for the regularized equation ``F(V) + a V = f_delta`` (``a > 0``).

Two production paths:

* :func:`solve_regularized` — damped fixed-point iteration
  ``u <- u - lam (F(u) + a u - f_delta)``, a contraction for
  ``0 < lam < 2a/(a+L)^2`` when ``F`` is monotone with local Lipschitz
  constant ``L``.  We use the contraction-optimal ``lam = a/(a+L)^2``.
* :func:`solve_regularized_linear` — conjugate gradients on
  ``(A + a I) u = f_delta`` for symmetric positive-semidefinite ``A``.

Both stop at the first iterate with residual norm ``<= max(theta*delta,
tol_min)``.  Monotonicity gives ``a ||u - v|| <= ||F(u)-F(v) + a(u-v)||``
for every pair, so a returned iterate lies within ``tol/a`` of the exact
regularized solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .space import Operator, ensure_vector

__all__ = [
    "StepChoice",
    "IterationConfig",
    "SolveTrace",
    "SolverError",
    "MaxIterExceeded",
    "Stagnation",
    "NonFinite",
    "IndefinitenessDetected",
    "optimal_step",
    "estimate_lipschitz",
    "residual_norm",
    "solve_regularized",
    "solve_regularized_linear",
]

_STALL_WINDOW = 50
_MAX_L_RETRIES = 5


class SolverError(RuntimeError):
    """Base class for solver failures."""


class MaxIterExceeded(SolverError):
    pass


class Stagnation(SolverError):
    pass


class NonFinite(SolverError):
    pass


class IndefinitenessDetected(SolverError):
    pass


@dataclass(frozen=True)
class StepChoice:
    """Iteration step ``lam`` and the contraction factor ``q`` it certifies."""

    lam: float
    q: float


@dataclass(frozen=True)
class IterationConfig:
    """Stopping rule and trust-ball parameters for the inner solves.

    The residual threshold is ``max(theta * delta, tol_min)``; ``tol_min``
    keeps the rule meaningful for noise-free data.  ``R`` is the ball
    radius (about the origin) on which the operator's Lipschitz bound is
    taken; it must be large enough that the initial guess and the solution
    lie inside.
    """

    theta: float = 1.0
    delta: float = 0.0
    tol_min: float = 1e-12
    max_iter: int = 100_000
    R: float = 10.0
    lambda_override: Optional[float] = None

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be > 0")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.tol_min <= 0:
            raise ValueError("tol_min must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.R <= 0:
            raise ValueError("R must be > 0")

    @property
    def stop_tol(self) -> float:
        return max(self.theta * self.delta, self.tol_min)


@dataclass(frozen=True)
class SolveTrace:
    """Residual history of one inner solve; ``n_stop = len(residuals) - 1``."""

    n_stop: int
    residuals: np.ndarray
    q_hat: float


def _make_trace(residuals: np.ndarray) -> SolveTrace:
    ratios = residuals[1:] / residuals[:-1]
    # empirical contraction factor, ignoring the transient first step
    q_hat = float(np.max(ratios[1:])) if ratios.size > 1 else math.nan
    return SolveTrace(n_stop=len(residuals) - 1, residuals=residuals, q_hat=q_hat)


def optimal_step(a: float, L: float) -> StepChoice:
    """Step minimizing the contraction bound ``1 - 2 lam a + lam^2 (a+L)^2``.

    Gives ``lam = a/(a+L)^2`` and ``q = sqrt(1 - a^2/(a+L)^2)``.
    """
    if a <= 0:
        raise ValueError("a must be > 0")
    if L < 0:
        raise ValueError("L must be >= 0")
    lam = a / (a + L) ** 2
    q = math.sqrt(max(0.0, 1.0 - a * a / (a + L) ** 2))
    return StepChoice(lam=lam, q=q)


def estimate_lipschitz(F: Operator, center, R: float, n_pairs: int = 50, seed: int = 0) -> float:
    """Max sampled difference quotient of ``F`` over pairs in ``B(center, R)``.

    A statistical stand-in when no analytic bound is available; the caller
    should expect underestimates and rely on the stagnation fallback.
    """
    center = ensure_vector(center, F.dim)
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(n_pairs):
        u = center + _ball_point(rng, F.dim, R)
        v = center + _ball_point(rng, F.dim, R)
        du = float(np.linalg.norm(u - v))
        if du == 0.0:
            continue
        best = max(best, float(np.linalg.norm(F(u) - F(v))) / du)
    return best


def _ball_point(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    return radius * rng.uniform() ** (1.0 / dim) * x


def residual_norm(F: Operator, u, a: float, f_delta) -> float:
    """``||F(u) + a u - f_delta||``."""
    u = ensure_vector(u, F.dim)
    f_delta = ensure_vector(f_delta, F.dim)
    return float(np.linalg.norm(F(u) + a * u - f_delta))


def _fixed_point_callable(F: Operator, f, a, lam, u0, tol, max_iter, stall_window):
    # same semantics as the backend kernels, for operators without a
    # structured form (one Python call to F per iteration)
    u = u0.copy()
    res = np.empty(max_iter + 1)
    it = 0
    while True:
        r = F(u) + a * u - f
        rn = float(np.sqrt(np.dot(r, r)))
        res[it] = rn
        if not np.isfinite(rn):
            return u, res[: it + 1].copy(), _kernels.NON_FINITE
        if rn <= tol:
            return u, res[: it + 1].copy(), _kernels.OK
        if it >= stall_window and res[it] >= res[it - stall_window]:
            return u, res[: it + 1].copy(), _kernels.STALLED
        if it >= max_iter:
            return u, res[: it + 1].copy(), _kernels.MAX_ITER
        u -= lam * r
        it += 1


def _cg_callable(F: Operator, a, f, u0, tol, max_iter):
    u = u0.copy()
    r = f - (F(u) + a * u)
    res = np.empty(max_iter + 1)
    rn = float(np.sqrt(np.dot(r, r)))
    res[0] = rn
    if not np.isfinite(rn):
        return u, res[:1].copy(), _kernels.NON_FINITE
    if rn <= tol:
        return u, res[:1].copy(), _kernels.OK
    p = r.copy()
    rs = rn * rn
    status = _kernels.MAX_ITER
    it = 0
    for it in range(1, max_iter + 1):
        Ap = F(p) + a * p
        pAp = float(np.dot(p, Ap))
        if pAp <= 0.0 or not np.isfinite(pAp):
            status = _kernels.INDEFINITE if np.isfinite(pAp) else _kernels.NON_FINITE
            it -= 1
            break
        alpha = rs / pAp
        u += alpha * p
        r -= alpha * Ap
        rs_new = float(np.dot(r, r))
        rn = float(np.sqrt(rs_new))
        if not np.isfinite(rn):
            res[it] = rn
            status = _kernels.NON_FINITE
            break
        if rn <= tol:
            r = f - (F(u) + a * u)
            rs_new = float(np.dot(r, r))
            rn = float(np.sqrt(rs_new))
            res[it] = rn
            if rn <= tol:
                status = _kernels.OK
                break
            p = r.copy()
            rs = rs_new
            continue
        res[it] = rn
        beta = rs_new / rs
        p = r + beta * p
        rs = rs_new
    return u, res[: it + 1].copy(), status


def solve_regularized(F: Operator, f_delta, a: float, u0=None,
                      cfg: IterationConfig = IterationConfig()) -> tuple[np.ndarray, SolveTrace]:
    """Fixed-point solve of ``F(V) + a V = f_delta`` with the residual stopping rule.

    The step is ``lam = a/(a+L)^2`` with ``L`` from the operator's bound at
    ``cfg.R`` (or a sampled estimate when absent), unless
    ``cfg.lambda_override`` is set.  A residual that fails to decrease over
    a window signals an underestimated ``L``: the solver doubles ``L``,
    recomputes the step and restarts, up to five times.
    """
    if a <= 0:
        raise ValueError("a must be > 0")
    f_delta = ensure_vector(f_delta, F.dim)
    u0 = np.zeros(F.dim) if u0 is None else ensure_vector(u0, F.dim).copy()
    tol = cfg.stop_tol

    if cfg.lambda_override is not None:
        lam = cfg.lambda_override
        if lam <= 0:
            raise ValueError("lambda_override must be > 0")
        schedule = [lam]
    else:
        if F.lipschitz_bound is not None:
            L = float(F.lipschitz_bound(cfg.R))
        else:
            L = estimate_lipschitz(F, u0, cfg.R)
        schedule = []
        for _ in range(_MAX_L_RETRIES + 1):
            schedule.append(optimal_step(a, L).lam)
            L = 2.0 * L if L > 0 else a

    status = _kernels.STALLED
    u = u0
    res = np.empty(0)
    for lam in schedule:
        if F.kernel_form is not None:
            u, res, status = _kernels.fixed_point(
                F.kernel_form.matrix, F.kernel_form.cube, f_delta, a, lam, u0,
                tol, cfg.max_iter, _STALL_WINDOW)
        else:
            u, res, status = _fixed_point_callable(
                F, f_delta, a, lam, u0, tol, cfg.max_iter, _STALL_WINDOW)
        if status not in (_kernels.STALLED, _kernels.NON_FINITE):
            break

    if status == _kernels.OK:
        return u, _make_trace(res)
    if status == _kernels.MAX_ITER:
        raise MaxIterExceeded(
            f"residual {res[-1]:.3e} > tolerance {tol:.3e} after {cfg.max_iter} iterations (a={a:g})")
    if status == _kernels.NON_FINITE:
        raise NonFinite(f"non-finite residual during fixed-point iteration (a={a:g})")
    hint = ("step fixed by lambda_override" if cfg.lambda_override is not None
            else "Lipschitz bound looks too small even after doubling")
    raise Stagnation(
        f"residual stagnated at {res[-1]:.3e} (tolerance {tol:.3e}, a={a:g}); {hint}")


def solve_regularized_linear(A: Operator, f_delta, a: float, cfg: IterationConfig = IterationConfig(),
                             u0=None) -> tuple[np.ndarray, SolveTrace]:
    """Conjugate-gradient solve of ``(A + a I) u = f_delta``.

    Requires ``A`` linear, symmetric, and positive semidefinite (a monotone
    symmetric matrix); negative curvature raises
    :class:`IndefinitenessDetected`.
    """
    if a <= 0:
        raise ValueError("a must be > 0")
    if not A.is_linear:
        raise ValueError("operator is not flagged linear")
    f_delta = ensure_vector(f_delta, A.dim)
    u0 = np.zeros(A.dim) if u0 is None else ensure_vector(u0, A.dim).copy()
    tol = cfg.stop_tol

    if A.kernel_form is not None and not A.kernel_form.cube:
        u, res, status = _kernels.cg(A.kernel_form.matrix, a, f_delta, u0, tol, cfg.max_iter)
    else:
        u, res, status = _cg_callable(A, a, f_delta, u0, tol, cfg.max_iter)

    if status == _kernels.OK:
        return u, _make_trace(res)
    if status == _kernels.INDEFINITE:
        raise IndefinitenessDetected(
            f"negative curvature in CG at a={a:g}: operator is not monotone (or not symmetric)")
    if status == _kernels.NON_FINITE:
        raise NonFinite(f"non-finite residual during CG (a={a:g})")
    raise MaxIterExceeded(
        f"CG residual {res[-1]:.3e} > tolerance {tol:.3e} after {cfg.max_iter} iterations (a={a:g})")
