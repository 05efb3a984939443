"""Canonical monotone test problems with known solutions and oracles.

Four families:

* diagonal — ``F(u) = diag(lambda) u`` with nonnegative, decaying spectrum;
* fredholm — midpoint discretization of the first-kind integral operator
  with kernel ``min(s, t)`` on [0, 1] (symmetric PSD, genuinely ill-posed);
* cubic — ``F(u) = A u + u^3`` (componentwise cube), monotone and locally
  Lipschitz with ``L(R) = ||A|| + 3 R^2``;
* rank-one — ``F(u) = <u, p> p`` with structured noise ``delta * q`` along
  an orthogonal null direction; everything about it has a closed form,
  which makes it the reference case for parameter-choice behavior at
  ``gamma = 1``.

Each problem exposes ``operator``, exact data ``f``, the minimal-norm
solution, and ``noisy(delta, seed)``.  ``oracle_solution`` computes the
regularized solution by an independent route (componentwise / dense direct
solve / damped Newton) for validating the iterative solvers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .space import KernelForm, NoisyProblem, Operator, ensure_vector, make_noisy

__all__ = [
    "DiagonalProblem",
    "FredholmProblem",
    "CubicProblem",
    "RankOneProblem",
    "build_diagonal",
    "build_fredholm",
    "build_cubic",
    "build_rank_one",
    "oracle_solution",
    "oracle_phi_psi",
    "oracle_alpha",
    "oracle_alpha_root",
]


def _resolve_profile(spec, n: int) -> np.ndarray:
    """Vector presets: 'ones', 'harmonic' (1/i), 'inverse_square' (1/i^2), or explicit."""
    if spec is None or isinstance(spec, str):
        presets = {
            None: lambda: np.ones(n),
            "ones": lambda: np.ones(n),
            "harmonic": lambda: 1.0 / np.arange(1, n + 1),
            "inverse_square": lambda: 1.0 / np.arange(1, n + 1) ** 2,
        }
        if spec not in presets:
            raise ValueError(f"unknown vector preset {spec!r}")
        return presets[spec]()
    return ensure_vector(spec, n)


@dataclass(frozen=True)
class DiagonalProblem:
    """``F(u) = diag(eigenvalues) u`` with ``f_i = eigenvalues_i * y_i``."""

    eigenvalues: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        lam = ensure_vector(self.eigenvalues)
        if np.any(lam < 0):
            raise ValueError("eigenvalues must be >= 0 for monotonicity")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "y", ensure_vector(self.y, lam.size))

    @property
    def f(self) -> np.ndarray:
        return self.eigenvalues * self.y

    @property
    def operator(self) -> Operator:
        lam = self.eigenvalues
        return Operator(
            dim=lam.size,
            fn=lambda u: lam * u,
            lipschitz_bound=lambda R: float(lam.max()),
            is_linear=True,
            kernel_form=KernelForm(np.diag(lam)),
        )

    def minimal_norm_solution(self) -> np.ndarray:
        return np.where(self.eigenvalues > 0, self.y, 0.0)

    def noisy(self, delta: float, seed: int = 0) -> NoisyProblem:
        return NoisyProblem(
            operator=self.operator,
            f_delta=make_noisy(self.f, delta, seed),
            delta=delta,
            f=self.f,
            y=self.minimal_norm_solution(),
        )


@dataclass(frozen=True)
class FredholmProblem:
    """Midpoint-rule discretization of ``(Ku)(s) = int_0^1 min(s,t) u(t) dt``."""

    matrix: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        K = np.ascontiguousarray(self.matrix, dtype=float)
        if not np.allclose(K, K.T, atol=1e-14):
            raise ValueError("quadrature matrix must be symmetric")
        object.__setattr__(self, "matrix", K)
        object.__setattr__(self, "y", ensure_vector(self.y, K.shape[0]))

    @property
    def f(self) -> np.ndarray:
        return self.matrix @ self.y

    @property
    def operator(self) -> Operator:
        K = self.matrix
        top = float(np.linalg.eigvalsh(K)[-1])
        return Operator(
            dim=K.shape[0],
            fn=lambda u: K @ u,
            lipschitz_bound=lambda R: top,
            is_linear=True,
            kernel_form=KernelForm(K),
        )

    def minimal_norm_solution(self) -> np.ndarray:
        return self.y

    def noisy(self, delta: float, seed: int = 0) -> NoisyProblem:
        return NoisyProblem(
            operator=self.operator,
            f_delta=make_noisy(self.f, delta, seed),
            delta=delta,
            f=self.f,
            y=self.y,
        )


@dataclass(frozen=True)
class CubicProblem:
    """``F(u) = A u + u^3`` with symmetric PSD ``A``; ``f = F(y)``."""

    A: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        A = np.ascontiguousarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", ensure_vector(self.y, A.shape[0]))

    @property
    def f(self) -> np.ndarray:
        return self.A @ self.y + self.y**3

    @property
    def operator(self) -> Operator:
        A = self.A
        nrm = float(np.linalg.norm(A, 2))
        return Operator(
            dim=A.shape[0],
            fn=lambda u: A @ u + u**3,
            lipschitz_bound=lambda R: nrm + 3.0 * R * R,
            is_linear=False,
            kernel_form=KernelForm(A, cube=True),
        )

    def minimal_norm_solution(self) -> np.ndarray:
        return self.y

    def noisy(self, delta: float, seed: int = 0) -> NoisyProblem:
        return NoisyProblem(
            operator=self.operator,
            f_delta=make_noisy(self.f, delta, seed),
            delta=delta,
            f=self.f,
            y=self.y,
        )


@dataclass(frozen=True)
class RankOneProblem:
    """``F(u) = <u, p> p`` with exact data ``f = p`` and noise along ``q``.

    ``p`` and ``q`` are orthonormal, ``q`` spans a null direction, and for
    data ``f_delta = p + delta q`` the regularized solution is
    ``(delta/a) q + p/(1+a)``.
    """

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        p = ensure_vector(self.p)
        q = ensure_vector(self.q, p.size)
        if abs(np.dot(p, q)) > 1e-14 or abs(np.dot(p, p) - 1) > 1e-14 or abs(np.dot(q, q) - 1) > 1e-14:
            raise ValueError("p, q must be orthonormal")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def f(self) -> np.ndarray:
        return self.p.copy()

    @property
    def y(self) -> np.ndarray:
        return self.p.copy()

    @property
    def operator(self) -> Operator:
        p = self.p
        return Operator(
            dim=p.size,
            fn=lambda u: np.dot(u, p) * p,
            lipschitz_bound=lambda R: 1.0,
            is_linear=True,
            kernel_form=KernelForm(np.outer(p, p)),
        )

    def minimal_norm_solution(self) -> np.ndarray:
        return self.p.copy()

    def noisy(self, delta: float, seed: int = 0) -> NoisyProblem:
        # structured noise along the null direction, not random
        return NoisyProblem(
            operator=self.operator,
            f_delta=self.p + delta * self.q,
            delta=delta,
            f=self.f,
            y=self.p,
        )

    def regularized_solution(self, delta: float, a: float) -> np.ndarray:
        return (delta / a) * self.q + self.p / (1.0 + a)

    def limit_point(self, C: float) -> np.ndarray:
        c = np.sqrt(C * C - 1.0)
        return self.p + self.q / c


def build_diagonal(n: int, decay=("poly", 2.0), y_spec=None) -> DiagonalProblem:
    """Diagonal problem with spectrum ``i**-p`` ('poly') or ``exp(-r(i-1))`` ('exp')."""
    if n < 1:
        raise ValueError("n must be >= 1")
    kind, rate = decay
    i = np.arange(1, n + 1, dtype=float)
    if kind == "poly":
        lam = i ** (-float(rate))
    elif kind == "exp":
        lam = np.exp(-float(rate) * (i - 1))
    else:
        raise ValueError(f"unknown decay kind {kind!r}")
    return DiagonalProblem(eigenvalues=lam, y=_resolve_profile(y_spec, n))


def build_fredholm(n: int) -> FredholmProblem:
    """min(s,t) kernel at n midpoints; smooth source ``y(t) = sin(pi t)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    s = (np.arange(n) + 0.5) / n
    K = np.minimum.outer(s, s) / n
    return FredholmProblem(matrix=K, y=np.sin(np.pi * s))


def build_cubic(n: int, A_spec=None, y_spec=None) -> CubicProblem:
    """Cubic problem; ``A`` defaults to ``diag(1/i)`` mixing stiff and near-null modes."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if A_spec is None:
        A = np.diag(1.0 / np.arange(1, n + 1))
    else:
        A = np.asarray(A_spec, dtype=float)
        if A.ndim == 1:
            A = np.diag(ensure_vector(A, n))
    return CubicProblem(A=A, y=_resolve_profile(y_spec, n))


def build_rank_one(dim: int) -> RankOneProblem:
    """Canonical basis realization: ``p = e_1``, ``q = e_2``."""
    if dim < 2:
        raise ValueError("dim must be >= 2")
    p = np.zeros(dim)
    q = np.zeros(dim)
    p[0] = 1.0
    q[1] = 1.0
    return RankOneProblem(p=p, q=q)


Problem = Union[DiagonalProblem, FredholmProblem, CubicProblem, RankOneProblem]


def oracle_solution(problem: Problem, a: float, f_delta) -> np.ndarray:
    """Reference solution of ``F(V) + a V = f_delta``, residual below 1e-12 scale.

    Linear families are solved componentwise or by a dense direct solve;
    the cubic family by damped Newton, which shares nothing with the
    production fixed-point path.
    """
    if a <= 0:
        raise ValueError("a must be > 0")
    f_delta = ensure_vector(f_delta)
    if isinstance(problem, DiagonalProblem):
        return f_delta / (problem.eigenvalues + a)
    if isinstance(problem, FredholmProblem):
        K = problem.matrix
        return np.linalg.solve(K + a * np.eye(K.shape[0]), f_delta)
    if isinstance(problem, RankOneProblem):
        beta = float(np.dot(f_delta, problem.p))
        w = f_delta - beta * problem.p
        return (beta / (1.0 + a)) * problem.p + w / a
    if isinstance(problem, CubicProblem):
        return _newton_cubic(problem.A, a, f_delta)
    raise TypeError(f"no oracle for {type(problem).__name__}")


def _newton_cubic(A: np.ndarray, a: float, f: np.ndarray, tol_scale: float = 1e-13) -> np.ndarray:
    n = A.shape[0]
    eye = np.eye(n)
    u = np.zeros(n)
    tol = tol_scale * (1.0 + float(np.linalg.norm(f)))
    g = A @ u + u**3 + a * u - f
    gn = float(np.linalg.norm(g))
    for _ in range(200):
        if gn <= tol:
            return u
        J = A + np.diag(3.0 * u * u) + a * eye
        step = np.linalg.solve(J, g)
        t = 1.0
        while t > 1e-12:
            u_new = u - t * step
            g_new = A @ u_new + u_new**3 + a * u_new - f
            gn_new = float(np.linalg.norm(g_new))
            if gn_new < gn:
                break
            t *= 0.5
        u, g, gn = u_new, g_new, gn_new
    raise RuntimeError(f"cubic oracle did not reach residual {tol:g} (at {gn:g})")


def oracle_phi_psi(problem: Problem, a: float, f_delta) -> tuple[float, float, np.ndarray]:
    """Exact data discrepancy ``||F(V)-f_delta||`` and solution norm ``||V||`` at ``a``."""
    V = oracle_solution(problem, a, f_delta)
    Fv = problem.operator(V)
    return float(np.linalg.norm(Fv - np.asarray(f_delta, dtype=float))), float(np.linalg.norm(V)), V


def oracle_alpha(problem: RankOneProblem, delta: float, C: float) -> float:
    """Closed-form parameter ``c*delta / (1 - c*delta)``, ``c = sqrt(C^2 - 1)``.

    This is the exact residual-matching parameter for the rank-one problem
    with target ``C * delta`` (noise exponent 1).
    """
    if not isinstance(problem, RankOneProblem):
        raise TypeError("closed-form alpha exists only for the rank-one problem")
    if C <= 1:
        raise ValueError("C must be > 1")
    c = float(np.sqrt(C * C - 1.0))
    if c * delta >= 1:
        raise ValueError("need c * delta < 1")
    return c * delta / (1.0 - c * delta)


def oracle_alpha_root(problem: Problem, f_delta, delta: float, C: float, gamma: float,
                      rtol: float = 1e-12) -> float:
    """High-precision root of ``||F(V_a) - f_delta|| = C * delta**gamma``.

    Fine bisection on oracle solves; used as the reference when validating
    brackets produced by the production pipeline.
    """
    target = C * delta**gamma
    f_delta = ensure_vector(f_delta)

    def excess(a):
        return oracle_phi_psi(problem, a, f_delta)[0] - target

    lo = hi = 1.0
    for _ in range(200):
        if excess(lo) < 0:
            break
        lo /= 2.0
    else:
        raise RuntimeError("no lower bracket for the reference root")
    for _ in range(200):
        if excess(hi) > 0:
            break
        hi *= 2.0
    else:
        raise RuntimeError("no upper bracket for the reference root")
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
