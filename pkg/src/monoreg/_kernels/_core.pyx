# Compiled versions of the hot solver loops; see py_backend.py for the
# reference semantics. Status codes must stay in sync with py_backend.

import numpy as np

cimport numpy as cnp
from libc.math cimport isfinite, sqrt

cnp.import_array()

NAME = "compiled"

OK = 0
MAX_ITER = 1
STALLED = 2
NON_FINITE = 3
INDEFINITE = 4

cdef int _OK = 0
cdef int _MAX_ITER = 1
cdef int _STALLED = 2
cdef int _NON_FINITE = 3
cdef int _INDEFINITE = 4


def fixed_point(double[:, ::1] A, bint cube, double[::1] f, double a, double lam,
                double[::1] u0, double tol, long max_iter, long stall_window):
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[double, ndim=1] u_arr = np.array(u0, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] res_arr = np.empty(max_iter + 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] r_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] u = u_arr
    cdef double[::1] res = res_arr
    cdef double[::1] r = r_arr
    cdef Py_ssize_t i, j
    cdef long it = 0
    cdef int status = _MAX_ITER
    cdef double s, rn, ui

    while True:
        rn = 0.0
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += A[i, j] * u[j]
            ui = u[i]
            if cube:
                s += ui * ui * ui
            s += a * ui - f[i]
            r[i] = s
            rn += s * s
        rn = sqrt(rn)
        res[it] = rn
        if not isfinite(rn):
            status = _NON_FINITE
            break
        if rn <= tol:
            status = _OK
            break
        if it >= stall_window and res[it] >= res[it - stall_window]:
            status = _STALLED
            break
        if it >= max_iter:
            status = _MAX_ITER
            break
        for i in range(n):
            u[i] -= lam * r[i]
        it += 1
    return u_arr, res_arr[: it + 1].copy(), status


def cg(double[:, ::1] A, double a, double[::1] f, double[::1] u0, double tol,
       long max_iter):
    cdef Py_ssize_t n = A.shape[0]
    cdef cnp.ndarray[double, ndim=1] u_arr = np.array(u0, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] res_arr = np.empty(max_iter + 1, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] r_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] p_arr = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] ap_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] u = u_arr
    cdef double[::1] res = res_arr
    cdef double[::1] r = r_arr
    cdef double[::1] p = p_arr
    cdef double[::1] ap = ap_arr
    cdef Py_ssize_t i, j
    cdef long it = 0
    cdef int status = _MAX_ITER
    cdef double s, rn, rs, rs_new, pap, alpha, beta

    rs = 0.0
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += A[i, j] * u[j]
        s = f[i] - s - a * u[i]
        r[i] = s
        rs += s * s
    rn = sqrt(rs)
    res[0] = rn
    if not isfinite(rn):
        return u_arr, res_arr[:1].copy(), _NON_FINITE
    if rn <= tol:
        return u_arr, res_arr[:1].copy(), _OK
    for i in range(n):
        p[i] = r[i]

    for it in range(1, max_iter + 1):
        pap = 0.0
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += A[i, j] * p[j]
            s += a * p[i]
            ap[i] = s
            pap += p[i] * s
        if pap <= 0.0 or not isfinite(pap):
            status = _INDEFINITE if isfinite(pap) else _NON_FINITE
            it -= 1
            break
        alpha = rs / pap
        rs_new = 0.0
        for i in range(n):
            u[i] += alpha * p[i]
            r[i] -= alpha * ap[i]
            rs_new += r[i] * r[i]
        rn = sqrt(rs_new)
        if not isfinite(rn):
            res[it] = rn
            status = _NON_FINITE
            break
        if rn <= tol:
            # confirm against the true residual; the recurrence can drift
            rs_new = 0.0
            for i in range(n):
                s = 0.0
                for j in range(n):
                    s += A[i, j] * u[j]
                s = f[i] - s - a * u[i]
                r[i] = s
                rs_new += s * s
            rn = sqrt(rs_new)
            res[it] = rn
            if rn <= tol:
                status = _OK
                break
            for i in range(n):
                p[i] = r[i]
            rs = rs_new
            continue
        res[it] = rn
        beta = rs_new / rs
        for i in range(n):
            p[i] = r[i] + beta * p[i]
        rs = rs_new
    return u_arr, res_arr[: it + 1].copy(), status
