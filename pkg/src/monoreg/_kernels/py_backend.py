"""Pure-numpy implementations of the hot solver loops.

Mirrors the compiled backend in ``_core.pyx``: same signatures, same status
codes, same stopping logic.  Selected at import time by the package
``__init__`` when the extension is unavailable or explicitly disabled.
"""

import numpy as np

NAME = "python"

OK = 0
MAX_ITER = 1
STALLED = 2
NON_FINITE = 3
INDEFINITE = 4


def fixed_point(A, cube, f, a, lam, u0, tol, max_iter, stall_window):
    """Damped fixed-point iteration ``u <- u - lam * (A u [+ u^3] + a u - f)``.

    Returns ``(u, residual_norms, status)``; ``residual_norms[k]`` is the
    residual at iterate ``k``, so its length is ``n_stop + 1``.
    """
    u = np.array(u0, dtype=float)
    res = np.empty(max_iter + 1)
    status = MAX_ITER
    it = 0
    while True:
        r = A @ u
        if cube:
            r += u * u * u
        r += a * u
        r -= f
        rn = float(np.sqrt(np.dot(r, r)))
        res[it] = rn
        if not np.isfinite(rn):
            status = NON_FINITE
            break
        if rn <= tol:
            status = OK
            break
        if it >= stall_window and res[it] >= res[it - stall_window]:
            status = STALLED
            break
        if it >= max_iter:
            status = MAX_ITER
            break
        u -= lam * r
        it += 1
    return u, res[: it + 1].copy(), status


def cg(A, a, f, u0, tol, max_iter):
    """Conjugate gradients on ``(A + a I) u = f`` for symmetric PSD ``A``.

    Stops at the first iterate whose true residual norm is <= ``tol``;
    reports negative curvature through the INDEFINITE status.
    """
    u = np.array(u0, dtype=float)
    r = f - (A @ u + a * u)
    res = np.empty(max_iter + 1)
    rn = float(np.sqrt(np.dot(r, r)))
    res[0] = rn
    if not np.isfinite(rn):
        return u, res[:1].copy(), NON_FINITE
    if rn <= tol:
        return u, res[:1].copy(), OK
    p = r.copy()
    rs = rn * rn
    status = MAX_ITER
    it = 0
    for it in range(1, max_iter + 1):
        Ap = A @ p + a * p
        pAp = float(np.dot(p, Ap))
        if pAp <= 0.0 or not np.isfinite(pAp):
            status = INDEFINITE if np.isfinite(pAp) else NON_FINITE
            it -= 1
            break
        alpha = rs / pAp
        u += alpha * p
        r -= alpha * Ap
        rs_new = float(np.dot(r, r))
        rn = float(np.sqrt(rs_new))
        if not np.isfinite(rn):
            res[it] = rn
            status = NON_FINITE
            break
        if rn <= tol:
            # confirm against the true residual; the recurrence can drift
            r = f - (A @ u + a * u)
            rs_new = float(np.dot(r, r))
            rn = float(np.sqrt(rs_new))
            res[it] = rn
            if rn <= tol:
                status = OK
                break
            p = r.copy()
            rs = rs_new
            continue
        res[it] = rn
        beta = rs_new / rs
        p = r + beta * p
        rs = rs_new
    return u, res[: it + 1].copy(), status
