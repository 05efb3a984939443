"""Residual-band choice of the regularization parameter.

For monotone continuous ``F`` and noisy data with known level ``delta``,
the data discrepancy ``phi(a) = ||F(V_a) - f_delta||`` of the regularized
solution is strictly increasing in ``a`` and the solution norm ``psi(a)``
strictly decreasing, so a target residual ``C * delta**gamma`` is hit at a
unique parameter.  The pipeline here locates it with approximate inner
solves only:

1. every trial solve stops once ``||F(u) + a u - f_delta|| <= theta*delta``;
2. geometric bracketing (doubling / halving with a shared trial cache)
   finds parameters whose discrepancy lies below and above the acceptance
   band ``[C1 * delta**gamma, C2 * delta**gamma]``;
3. bisection returns the first midpoint whose discrepancy falls inside the
   band ("band" mode), or drives the discrepancy to ``C * delta**gamma``
   within ``exact_tol`` ("exact" mode).

Accepted pairs ``(alpha, v_delta)`` satisfy both stopping inequalities, the
property that guarantees convergence to the minimal-norm solution as
``delta -> 0`` for ``gamma < 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np

from .solve import (
    IterationConfig,
    SolverError,
    solve_regularized,
    solve_regularized_linear,
)
from .space import Operator, check_monotonicity, ensure_vector, norm, shift_operator

__all__ = [
    "ConfigError",
    "MaxBracketSteps",
    "NonMonotoneOperator",
    "DiscrepancyConfig",
    "DiscrepancyResult",
    "Status",
    "PreconditionOutcome",
    "Bracket",
    "phi_psi",
    "precondition_check",
    "find_alpha_up",
    "find_alpha_low",
    "bisect_discrepancy",
    "solve_discrepancy",
    "solve_discrepancy_shifted",
    "recheck_acceptance",
]


class ConfigError(ValueError):
    """Constants violate the relations the method requires."""


class MaxBracketSteps(SolverError):
    """Geometric bracketing exhausted its step budget (safety net)."""


class NonMonotoneOperator(SolverError):
    """Sampled monotonicity audit found a violating pair."""


class Status(enum.Enum):
    CONVERGED = "Converged"
    ZERO_WITHIN_DISCREPANCY = "ZeroWithinDiscrepancy"
    NARROW_INTERVAL_WARNING = "NarrowIntervalWarning"


class PreconditionOutcome(enum.Enum):
    PROCEED = "Proceed"
    ZERO_WITHIN_DISCREPANCY = "ZeroWithinDiscrepancy"


@dataclass(frozen=True)
class DiscrepancyConfig:
    """Constants of the parameter-choice rule.

    ``C * delta**gamma`` is the residual target; ``[C1, C2]`` scale the
    acceptance band; ``theta`` scales the inner stopping rule; ``eps`` is
    the bisection interval tolerance.  ``mode`` is "band" (cheap,
    production) or "exact" (drive the discrepancy to the target itself
    within ``exact_tol``, with correspondingly tight inner solves).

    The defaults pass the runtime validation for any ``delta`` below about
    0.3; optimal constants are problem-dependent and left to the caller.
    """

    C: float = 1.5
    gamma: float = 0.9
    C1: float = 1.0
    C2: float = 2.0
    theta: float = 0.4
    eps: float = 1e-6
    a_init: float = 1.0
    max_bracket_steps: int = 200
    mode: str = "band"
    exact_tol: float = 1e-8

    def __post_init__(self):
        if not (0 < self.gamma <= 1):
            raise ConfigError("gamma must lie in (0, 1]")
        if self.theta <= 0:
            raise ConfigError("theta must be > 0")
        if self.eps <= 0:
            raise ConfigError("eps must be > 0")
        if self.a_init <= 0:
            raise ConfigError("a_init must be > 0")
        if self.max_bracket_steps < 1:
            raise ConfigError("max_bracket_steps must be >= 1")
        if self.mode not in ("band", "exact"):
            raise ConfigError(f"mode must be 'band' or 'exact', got {self.mode!r}")
        if self.exact_tol <= 0:
            raise ConfigError("exact_tol must be > 0")

    def validate(self, delta: float) -> None:
        """Check the delta-dependent inequalities; raise naming the first failure."""
        if delta <= 0:
            raise ConfigError("the discrepancy principle needs delta > 0")
        if not (0 < self.C1 < self.C < self.C2):
            raise ConfigError(f"need 0 < C1 < C < C2, got C1={self.C1}, C={self.C}, C2={self.C2}")
        tgt = self.C * delta**self.gamma
        if not tgt > delta:
            raise ConfigError(f"need C*delta**gamma > delta: {tgt} <= {delta}")
        lo = self.C1 * delta**self.gamma
        hi = self.C2 * delta**self.gamma
        if not lo + self.theta * delta < tgt:
            raise ConfigError(
                f"need C1*delta**gamma + theta*delta < C*delta**gamma: {lo + self.theta * delta} >= {tgt}")
        if not tgt < hi - self.theta * delta:
            raise ConfigError(
                f"need C*delta**gamma < C2*delta**gamma - theta*delta: {tgt} >= {hi - self.theta * delta}")

    def band(self, delta: float) -> tuple[float, float]:
        return self.C1 * delta**self.gamma, self.C2 * delta**self.gamma

    def target(self, delta: float) -> float:
        return self.C * delta**self.gamma


@dataclass(frozen=True)
class DiscrepancyResult:
    """Chosen parameter, approximate solution, and run diagnostics.

    ``alpha`` is ``inf`` when the zero vector already meets the target
    (``status`` ZeroWithinDiscrepancy).  ``bracket`` entries are ``nan``
    for sides the run never needed to establish.
    """

    alpha: float
    v_delta: np.ndarray
    phi_value: float
    total_inner_iters: int
    bracket: tuple[float, float]
    status: Status


@dataclass(frozen=True)
class Bracket:
    """One endpoint produced by a bracketing sweep."""

    alpha: float


@dataclass(frozen=True)
class _Trial:
    a: float
    v: np.ndarray
    phi: float
    n_iters: int


def _inner_config(cfg: DiscrepancyConfig, solver_cfg: IterationConfig, delta: float) -> IterationConfig:
    if cfg.mode == "exact":
        # near-exact inner solves so the discrepancy itself is trustworthy
        # at the exact_tol scale
        tol = max(solver_cfg.tol_min, min(cfg.theta * delta, 0.25 * cfg.exact_tol))
        return replace(solver_cfg, theta=1.0, delta=0.0, tol_min=tol)
    return replace(solver_cfg, theta=cfg.theta, delta=delta)


class _Runner:
    """Shared trial cache: solve at a parameter once, warm-start neighbors."""

    def __init__(self, F: Operator, f_delta: np.ndarray, icfg: IterationConfig):
        self.F = F
        self.f_delta = f_delta
        self.icfg = icfg
        self.cache: dict[float, _Trial] = {}
        self.total_iters = 0

    def _warm_start(self, a: float) -> Optional[np.ndarray]:
        if not self.cache:
            return None
        la = math.log(a)
        nearest = min(self.cache, key=lambda b: abs(math.log(b) - la))
        return self.cache[nearest].v

    def solve_at(self, a: float) -> _Trial:
        hit = self.cache.get(a)
        if hit is not None:
            return hit
        u0 = self._warm_start(a)
        if self.F.is_linear:
            v, trace = solve_regularized_linear(self.F, self.f_delta, a, self.icfg, u0=u0)
        else:
            v, trace = solve_regularized(self.F, self.f_delta, a, u0=u0, cfg=self.icfg)
        trial = _Trial(a=a, v=v, phi=float(norm(self.F(v) - self.f_delta)), n_iters=trace.n_stop)
        self.cache[a] = trial
        self.total_iters += trace.n_stop
        return trial

    def best_trial(self, target: float) -> Optional[_Trial]:
        if not self.cache:
            return None
        return min(self.cache.values(), key=lambda t: abs(t.phi - target))


def _accepts(cfg: DiscrepancyConfig, delta: float, phi: float) -> bool:
    if cfg.mode == "exact":
        return abs(phi - cfg.target(delta)) <= cfg.exact_tol
    lo, hi = cfg.band(delta)
    return lo <= phi <= hi


def _above(cfg: DiscrepancyConfig, delta: float, phi: float) -> bool:
    if cfg.mode == "exact":
        return phi > cfg.target(delta)
    return phi > cfg.band(delta)[1]


def _below(cfg: DiscrepancyConfig, delta: float, phi: float) -> bool:
    if cfg.mode == "exact":
        return phi < cfg.target(delta)
    return phi < cfg.band(delta)[0]


def _result(runner: _Runner, trial: _Trial, status: Status,
            bracket: tuple[float, float]) -> DiscrepancyResult:
    return DiscrepancyResult(
        alpha=trial.a,
        v_delta=trial.v,
        phi_value=trial.phi,
        total_inner_iters=runner.total_iters,
        bracket=bracket,
        status=status,
    )


def phi_psi(F: Operator, f_delta, a: float,
            solver_cfg: IterationConfig = IterationConfig()) -> tuple[float, float, np.ndarray]:
    """Data discrepancy and solution norm at ``a``, via an iterative inner solve."""
    f_delta = ensure_vector(f_delta, F.dim)
    if F.is_linear:
        v, _ = solve_regularized_linear(F, f_delta, a, solver_cfg)
    else:
        v, _ = solve_regularized(F, f_delta, a, cfg=solver_cfg)
    return float(norm(F(v) - f_delta)), float(norm(v)), v


def precondition_check(F: Operator, f_delta, delta: float,
                       cfg: DiscrepancyConfig = DiscrepancyConfig()) -> PreconditionOutcome:
    """Proceed only when the zero vector misses the residual target.

    ``||F(0) - f_delta|| <= C * delta**gamma`` means zero is already an
    acceptable regularized answer.
    """
    cfg.validate(delta)
    f_delta = ensure_vector(f_delta, F.dim)
    base = norm(F(np.zeros(F.dim)) - f_delta)
    if base > cfg.target(delta):
        return PreconditionOutcome.PROCEED
    return PreconditionOutcome.ZERO_WITHIN_DISCREPANCY


def _search_up(runner: _Runner, cfg: DiscrepancyConfig, delta: float, start: float,
               known_low: float) -> Union[Bracket, DiscrepancyResult]:
    a = start
    for _ in range(cfg.max_bracket_steps):
        t = runner.solve_at(a)
        if _accepts(cfg, delta, t.phi):
            return _result(runner, t, Status.CONVERGED, (known_low, math.nan))
        if _above(cfg, delta, t.phi):
            return Bracket(a)
        a *= 2.0
    raise MaxBracketSteps(
        f"no upper bracket within {cfg.max_bracket_steps} doublings from {start:g}")


def _search_down(runner: _Runner, cfg: DiscrepancyConfig, delta: float, start: float,
                 known_up: float) -> Union[Bracket, DiscrepancyResult]:
    a = start
    for _ in range(cfg.max_bracket_steps):
        t = runner.solve_at(a)
        if _accepts(cfg, delta, t.phi):
            return _result(runner, t, Status.CONVERGED, (math.nan, known_up))
        if _below(cfg, delta, t.phi):
            return Bracket(a)
        a /= 2.0
    raise MaxBracketSteps(
        f"no lower bracket within {cfg.max_bracket_steps} halvings from {start:g}")


def find_alpha_up(F: Operator, f_delta, delta: float,
                  cfg: DiscrepancyConfig = DiscrepancyConfig(),
                  solver_cfg: IterationConfig = IterationConfig()) -> Union[Bracket, DiscrepancyResult]:
    """Double the parameter from ``cfg.a_init`` until the discrepancy exceeds the band.

    Stops early with a full :class:`DiscrepancyResult` if a trial already
    lands inside the acceptance band.
    """
    f_delta = ensure_vector(f_delta, F.dim)
    runner = _Runner(F, f_delta, _inner_config(cfg, solver_cfg, delta))
    return _search_up(runner, cfg, delta, cfg.a_init, math.nan)


def find_alpha_low(F: Operator, f_delta, delta: float,
                   cfg: DiscrepancyConfig = DiscrepancyConfig(),
                   solver_cfg: IterationConfig = IterationConfig()) -> Union[Bracket, DiscrepancyResult]:
    """Halve the parameter from ``cfg.a_init`` until the discrepancy drops below the band."""
    f_delta = ensure_vector(f_delta, F.dim)
    runner = _Runner(F, f_delta, _inner_config(cfg, solver_cfg, delta))
    return _search_down(runner, cfg, delta, cfg.a_init, math.nan)


def _bisect(runner: _Runner, cfg: DiscrepancyConfig, delta: float,
            alpha_low: float, alpha_up: float) -> DiscrepancyResult:
    if not (0 < alpha_low <= alpha_up):
        raise ValueError(f"invalid bracket [{alpha_low}, {alpha_up}]")
    while True:
        if 0.5 * (alpha_up - alpha_low) < cfg.eps:
            best = runner.best_trial(cfg.target(delta))
            if best is None:
                best = runner.solve_at(0.5 * (alpha_low + alpha_up))
            return _result(runner, best, Status.NARROW_INTERVAL_WARNING, (alpha_low, alpha_up))
        a = 0.5 * (alpha_low + alpha_up)
        t = runner.solve_at(a)
        if _accepts(cfg, delta, t.phi):
            return _result(runner, t, Status.CONVERGED, (alpha_low, alpha_up))
        if _above(cfg, delta, t.phi):
            alpha_up = a
        else:
            alpha_low = a


def bisect_discrepancy(F: Operator, f_delta, delta: float,
                       cfg: DiscrepancyConfig, solver_cfg: IterationConfig,
                       alpha_low: float, alpha_up: float) -> DiscrepancyResult:
    """Bisect a bracket whose discrepancies straddle the acceptance region.

    Returns the first accepted midpoint; if the interval collapses below
    ``cfg.eps`` first, the trial closest to the target is returned flagged
    as NarrowIntervalWarning.
    """
    f_delta = ensure_vector(f_delta, F.dim)
    runner = _Runner(F, f_delta, _inner_config(cfg, solver_cfg, delta))
    return _bisect(runner, cfg, delta, alpha_low, alpha_up)


def solve_discrepancy(F: Operator, f_delta, delta: float,
                      cfg: DiscrepancyConfig = DiscrepancyConfig(),
                      solver_cfg: IterationConfig = IterationConfig(),
                      audit_monotonicity: bool = True) -> DiscrepancyResult:
    """Full pipeline: precondition, interleaved bracketing, bisection.

    Bracketing and bisection share one trial cache and warm-start each
    solve from the nearest previously solved parameter.  Set
    ``audit_monotonicity=False`` to skip the sampled monotonicity audit.
    """
    cfg.validate(delta)
    f_delta = ensure_vector(f_delta, F.dim)

    if audit_monotonicity:
        report = check_monotonicity(F, n_pairs=25, radius=solver_cfg.R, seed=0)
        if not report.passed:
            raise NonMonotoneOperator(
                f"sampled monotonicity ratio {report.min_ratio:.3e} < -1e-10")

    base = norm(F(np.zeros(F.dim)) - f_delta)
    if base <= cfg.target(delta):
        return DiscrepancyResult(
            alpha=math.inf,
            v_delta=np.zeros(F.dim),
            phi_value=base,
            total_inner_iters=0,
            bracket=(math.nan, math.nan),
            status=Status.ZERO_WITHIN_DISCREPANCY,
        )

    runner = _Runner(F, f_delta, _inner_config(cfg, solver_cfg, delta))

    first = runner.solve_at(cfg.a_init)
    if _accepts(cfg, delta, first.phi):
        return _result(runner, first, Status.CONVERGED, (math.nan, math.nan))
    if _above(cfg, delta, first.phi):
        alpha_up = cfg.a_init
        out = _search_down(runner, cfg, delta, cfg.a_init / 2.0, alpha_up)
        if isinstance(out, DiscrepancyResult):
            return out
        alpha_low = out.alpha
    else:
        alpha_low = cfg.a_init
        out = _search_up(runner, cfg, delta, cfg.a_init * 2.0, alpha_low)
        if isinstance(out, DiscrepancyResult):
            return out
        alpha_up = out.alpha

    return _bisect(runner, cfg, delta, alpha_low, alpha_up)


def solve_discrepancy_shifted(F: Operator, f_delta, delta: float, u_bar,
                              cfg: DiscrepancyConfig = DiscrepancyConfig(),
                              solver_cfg: IterationConfig = IterationConfig(),
                              audit_monotonicity: bool = True) -> DiscrepancyResult:
    """Pipeline for the translate ``u -> F(u + u_bar)``; selects the solution closest to ``u_bar``.

    The returned ``v_delta`` lives in the original coordinates.  With
    ``u_bar = 0`` this reduces to :func:`solve_discrepancy`.  For linear
    ``F`` the translate is handled exactly by shifting the data instead
    (``F(U + u_bar) + a U = f``  <=>  ``F(U) + a U = f - F(u_bar)``), which
    keeps the conjugate-gradient path available.
    """
    u_bar = ensure_vector(u_bar, F.dim)
    f_delta = ensure_vector(f_delta, F.dim)
    if norm(u_bar) == 0.0:
        return solve_discrepancy(F, f_delta, delta, cfg, solver_cfg,
                                 audit_monotonicity=audit_monotonicity)
    if F.is_linear:
        res = solve_discrepancy(F, f_delta - F(u_bar), delta, cfg, solver_cfg,
                                audit_monotonicity=audit_monotonicity)
    else:
        res = solve_discrepancy(shift_operator(F, u_bar), f_delta, delta, cfg, solver_cfg,
                                audit_monotonicity=audit_monotonicity)
    return replace(res, v_delta=res.v_delta + u_bar)


def recheck_acceptance(F: Operator, f_delta, delta: float, cfg: DiscrepancyConfig,
                       solver_cfg: IterationConfig, result: DiscrepancyResult,
                       rel_slack: float = 1e-12) -> bool:
    """Independently re-verify the two acceptance inequalities of a result.

    Recomputes ``||F(v) + alpha v - f_delta|| <= max(theta*delta, tol_min)``
    and the band/target membership of ``||F(v) - f_delta||`` from scratch;
    the relative slack absorbs summation-order differences between the
    solver kernels and numpy.
    """
    if result.status != Status.CONVERGED:
        return False
    f_delta = ensure_vector(f_delta, F.dim)
    v = result.v_delta
    icfg = _inner_config(cfg, solver_cfg, delta)
    lhs = norm(F(v) + result.alpha * v - f_delta)
    if lhs > icfg.stop_tol * (1 + rel_slack):
        return False
    phi = norm(F(v) - f_delta)
    if cfg.mode == "exact":
        return abs(phi - cfg.target(delta)) <= cfg.exact_tol * (1 + rel_slack)
    lo, hi = cfg.band(delta)
    return lo * (1 - rel_slack) <= phi <= hi * (1 + rel_slack)
