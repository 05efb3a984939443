"""Finite-dimensional real inner-product space and the operator contract.

Everything downstream works on dense 1-D float64 arrays ("vectors") in the
Euclidean inner product.  Operators are wrapped in :class:`Operator`, which
carries the evaluation map together with the metadata the solvers need:
dimension, linearity, and an optional local Lipschitz bound ``L(R)`` valid
on the ball of radius ``R`` about the origin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Operator",
    "NoisyProblem",
    "MonotonicityReport",
    "ensure_vector",
    "inner",
    "norm",
    "make_noisy",
    "check_monotonicity",
    "shift_operator",
]


def ensure_vector(x, dim: Optional[int] = None) -> np.ndarray:
    """Validate and return ``x`` as a finite 1-D float64 array.

    Raises ``ValueError`` on empty, non-1-D, or non-finite input and on a
    dimension mismatch when ``dim`` is given.
    """
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-D vector with at least one entry, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    if dim is not None and v.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {v.size}")
    return v


def inner(u, v) -> float:
    """Euclidean inner product; raises on dimension mismatch."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return float(np.dot(u, v))


def norm(u) -> float:
    """Euclidean norm, ``sqrt(inner(u, u))``."""
    return float(np.linalg.norm(np.asarray(u, dtype=float)))


@dataclass(frozen=True)
class Operator:
    """A continuous (ideally monotone) map ``F`` on R^dim.

    Parameters
    ----------
    dim : int
        Ambient dimension.
    fn : callable
        Evaluation map; must accept and return 1-D arrays of length ``dim``.
    lipschitz_bound : callable, optional
        ``R -> L`` with ``||F(u)-F(v)|| <= L ||u-v||`` for all ``u, v`` in
        the ball of radius ``R`` about the origin.
    is_linear : bool
        Set when ``fn`` is linear; enables the conjugate-gradient path.
    kernel_form : KernelForm, optional
        Structured description (dense linear part, optional componentwise
        cube) that lets the compiled backend run the hot loops without
        calling back into Python.
    """

    dim: int
    fn: Callable[[np.ndarray], np.ndarray]
    lipschitz_bound: Optional[Callable[[float], float]] = None
    is_linear: bool = False
    kernel_form: Optional["KernelForm"] = None

    def __call__(self, u: np.ndarray) -> np.ndarray:
        out = np.asarray(self.fn(u), dtype=float)
        if out.shape != (self.dim,):
            raise ValueError(f"operator returned shape {out.shape}, expected ({self.dim},)")
        return out


@dataclass(frozen=True)
class KernelForm:
    """Structure exploitable by the compiled backend: ``F(u) = M u (+ u^3)``."""

    matrix: np.ndarray
    cube: bool = False

    def __post_init__(self):
        m = np.ascontiguousarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"kernel form needs a square matrix, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class NoisyProblem:
    """Operator equation data: ``F(u) = f`` observed as ``f_delta`` with ``||f - f_delta|| <= delta``.

    ``f`` (exact data) and ``y`` (a known solution of minimal norm) are
    optional and used by experiment drivers and tests.
    """

    operator: Operator
    f_delta: np.ndarray
    delta: float
    f: Optional[np.ndarray] = None
    y: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "f_delta", ensure_vector(self.f_delta, self.operator.dim))
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.f is not None:
            f = ensure_vector(self.f, self.operator.dim)
            object.__setattr__(self, "f", f)
            gap = norm(f - self.f_delta)
            if gap > self.delta * (1 + 1e-12) + 1e-15:
                raise ValueError(f"||f - f_delta|| = {gap} exceeds delta = {self.delta}")
            if self.y is not None:
                y = ensure_vector(self.y, self.operator.dim)
                object.__setattr__(self, "y", y)
                resid = norm(self.operator(y) - f)
                if resid > 1e-10 * (1 + norm(f)):
                    raise ValueError(f"claimed solution has residual {resid}")
        elif self.y is not None:
            object.__setattr__(self, "y", ensure_vector(self.y, self.operator.dim))


def make_noisy(f, delta: float, seed: int) -> np.ndarray:
    """Return ``f + delta * e`` with ``e`` a seeded pseudo-random unit vector.

    The perturbation norm equals ``delta`` up to rounding; identical inputs
    give bit-identical outputs.  ``delta = 0`` returns ``f`` unchanged.
    """
    f = ensure_vector(f)
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if delta == 0:
        return f.copy()
    rng = np.random.default_rng(seed)
    e = rng.standard_normal(f.size)
    e /= np.linalg.norm(e)
    return f + delta * e


@dataclass(frozen=True)
class MonotonicityReport:
    """Outcome of a sampled monotonicity audit."""

    min_ratio: float
    witness: Optional[tuple] = None

    @property
    def passed(self) -> bool:
        return self.min_ratio >= -1e-10


def _sample_in_ball(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    # uniform in the ball: uniform direction, radius ~ U^(1/dim)
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    return radius * rng.uniform() ** (1.0 / dim) * x


def check_monotonicity(F: Operator, n_pairs: int, radius: float, seed: int = 0) -> MonotonicityReport:
    """Sample ``<F(u)-F(v), u-v> / ||u-v||^2`` over random pairs in a ball.

    A negative ``min_ratio`` is reported, not raised; a witness pair is
    attached when ``min_ratio < -1e-10``.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    if radius <= 0:
        raise ValueError("radius must be > 0")
    rng = np.random.default_rng(seed)
    min_ratio = np.inf
    witness = None
    for _ in range(n_pairs):
        u = _sample_in_ball(rng, F.dim, radius)
        v = _sample_in_ball(rng, F.dim, radius)
        d = u - v
        d2 = float(np.dot(d, d))
        if d2 == 0.0:
            continue
        ratio = float(np.dot(F(u) - F(v), d)) / d2
        if ratio < min_ratio:
            min_ratio = ratio
            if ratio < -1e-10:
                witness = (u.copy(), v.copy())
    return MonotonicityReport(min_ratio=float(min_ratio), witness=witness)


def shift_operator(F: Operator, u_bar) -> Operator:
    """Return the translate ``u -> F(u + u_bar)``.

    Monotonicity is preserved.  The Lipschitz bound on the radius-``R``
    ball about the origin becomes ``L(R + ||u_bar||)`` of the original map.
    """
    u_bar = ensure_vector(u_bar, F.dim)
    offset = norm(u_bar)
    bound = None
    if F.lipschitz_bound is not None:
        orig = F.lipschitz_bound
        bound = lambda R: orig(R + offset)
    return Operator(
        dim=F.dim,
        fn=lambda u: F(u + u_bar),
        lipschitz_bound=bound,
        is_linear=False,
    )
