"""Compare the compiled solver kernels against the pure-numpy fallback.

Runs the same workloads through both backends and reports wall time and
speedup.  The fixed-point case with a small regularization parameter is
the regime the compiled core exists for: tiny vectors, huge iteration
counts, Python overhead dominant.

    python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from monoreg import build_cubic, build_diagonal, build_fredholm, optimal_step
from monoreg._kernels import py_backend

try:
    from monoreg._kernels import _core as compiled
except ImportError:
    compiled = None


def time_call(fn, *args, repeats=3):
    best = np.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_fixed_point(quick):
    prob = build_cubic(20, None, 0.5 / np.arange(1, 21))
    fd = prob.noisy(1e-2, seed=0).f_delta
    a = 0.05 if quick else 0.02
    L = prob.operator.lipschitz_bound(2.0)
    lam = optimal_step(a, L).lam
    A = prob.operator.kernel_form.matrix
    args = (A, True, fd, a, lam, np.zeros(20), 0.4 * 1e-2, 5_000_000, 50)
    return "fixed point, cubic n=20, a=%g" % a, "fixed_point", args


def bench_fixed_point_linear(quick):
    prob = build_diagonal(50, ("poly", 2.0), "ones")
    fd = prob.noisy(1e-3, seed=0).f_delta
    a = 0.01 if quick else 0.002
    lam = optimal_step(a, 1.0).lam
    A = prob.operator.kernel_form.matrix
    args = (A, False, fd, a, lam, np.zeros(50), 0.4 * 1e-3, 5_000_000, 50)
    return "fixed point, diagonal n=50, a=%g" % a, "fixed_point", args


def bench_cg(quick):
    prob = build_fredholm(100 if quick else 200)
    fd = prob.noisy(1e-4, seed=0).f_delta
    A = prob.matrix
    args = (A, 1e-5, fd, np.zeros(A.shape[0]), 1e-10, 50_000)
    return "conjugate gradients, fredholm n=%d" % A.shape[0], "cg", args


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller workloads")
    opts = parser.parse_args()

    cases = [bench_fixed_point(opts.quick), bench_fixed_point_linear(opts.quick),
             bench_cg(opts.quick)]

    print(f"{'case':45s} {'iters':>9s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}")
    for label, kind, args in cases:
        t_py, (_, res_py, status_py) = time_call(getattr(py_backend, kind), *args)
        iters = len(res_py) - 1
        if compiled is None:
            print(f"{label:45s} {iters:9d} {t_py:9.3f}s {'n/a':>10s} {'n/a':>8s}")
            continue
        t_c, (_, res_c, status_c) = time_call(getattr(compiled, kind), *args)
        assert status_py == status_c == 0, "benchmark run did not converge"
        print(f"{label:45s} {iters:9d} {t_py:9.3f}s {t_c:9.3f}s {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
