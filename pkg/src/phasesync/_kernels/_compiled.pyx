# cython: boundscheck=False, wraparound=False, cdivision=True
"""BLAS-backed kernels: shifted power iteration and the fixed-point loop.

Semantics mirror the numpy reference backend; see reference.py for the
algorithm notes. Matrices are row-major, so the BLAS 'T' product on the
column-major view of the same memory is exactly M x.
"""

from libc.math cimport INFINITY, NAN, fabs, hypot, sqrt

import numpy as np

from scipy.linalg.cython_blas cimport dznrm2, zaxpy, zcopy, zdotc, zdscal, zgemv

BACKEND = "compiled"

ctypedef double complex zc


def power_iterate(object m, object v0, double tol, long max_iter, int warmup, double fro):
    cdef zc[:, ::1] a = np.ascontiguousarray(m, dtype=np.complex128)
    cdef int n = a.shape[0]
    v_arr = np.array(v0, dtype=np.complex128).ravel()
    if v_arr.shape[0] != n:
        raise ValueError("start vector length mismatch")
    w_arr = np.empty(n, dtype=np.complex128)
    s_arr = np.empty(n, dtype=np.complex128)
    start_arr = np.empty(n, dtype=np.complex128)
    cdef zc[::1] v = v_arr
    cdef zc[::1] w = w_arr
    cdef zc[::1] s = s_arr
    cdef zc[::1] start = start_arr

    cdef char trans_t = b'T'
    cdef int inc = 1
    cdef int i, it
    cdef zc alpha_one = 1.0
    cdef zc zero = 0.0
    cdef zc shift, neg
    cdef double nrm, inv, nw, fill
    cdef double rho = 0.0
    cdef long iterations = 0
    cdef long k = 0
    cdef double beta, value = 0.0, residual = INFINITY, lam_a
    cdef bint converged = False

    nrm = dznrm2(&n, &v[0], &inc)
    if nrm == 0.0:
        fill = 1.0 / sqrt(<double> n)
        for i in range(n):
            v[i] = fill
    else:
        inv = 1.0 / nrm
        zdscal(&n, &inv, &v[0], &inc)
    zcopy(&n, &v[0], &inc, &start[0], &inc)

    for it in range(warmup):
        zgemv(&trans_t, &n, &n, &alpha_one, &a[0, 0], &n, &v[0], &inc, &zero, &w[0], &inc)
        iterations += 1
        nw = dznrm2(&n, &w[0], &inc)
        if nw > rho:
            rho = nw
        if nw <= 1e-300:
            break
        inv = 1.0 / nw
        zdscal(&n, &inv, &w[0], &inc)
        zcopy(&n, &w[0], &inc, &v[0], &inc)

    beta = 1.0 + min(1.1 * rho, fro)
    # restart from the saved start: warmup converges toward the largest
    # magnitude, which is the wrong end when that eigenvalue is negative
    zcopy(&n, &start[0], &inc, &v[0], &inc)
    while k < max_iter:
        shift = beta
        zcopy(&n, &v[0], &inc, &w[0], &inc)
        zgemv(&trans_t, &n, &n, &alpha_one, &a[0, 0], &n, &v[0], &inc, &shift, &w[0], &inc)
        iterations += 1
        k += 1
        lam_a = zdotc(&n, &v[0], &inc, &w[0], &inc).real
        while lam_a < -1e-10 * (1.0 + beta):
            beta = 2.2 * beta + 1.0
            shift = beta
            zcopy(&n, &start[0], &inc, &v[0], &inc)
            zcopy(&n, &v[0], &inc, &w[0], &inc)
            zgemv(&trans_t, &n, &n, &alpha_one, &a[0, 0], &n, &v[0], &inc, &shift, &w[0], &inc)
            iterations += 1
            lam_a = zdotc(&n, &v[0], &inc, &w[0], &inc).real
        value = lam_a - beta
        zcopy(&n, &w[0], &inc, &s[0], &inc)
        neg = -lam_a
        zaxpy(&n, &neg, &v[0], &inc, &s[0], &inc)
        residual = dznrm2(&n, &s[0], &inc)
        if residual <= tol * (1.0 + fabs(value)):
            converged = True
            break
        nw = dznrm2(&n, &w[0], &inc)
        if nw <= 1e-300:
            fill = 1.0 / sqrt(<double> n)
            for i in range(n):
                v[i] = v[i] + fill
            nw = dznrm2(&n, &v[0], &inc)
            inv = 1.0 / nw
            zdscal(&n, &inv, &v[0], &inc)
            beta = 2.2 * beta + 1.0
            continue
        inv = 1.0 / nw
        zdscal(&n, &inv, &w[0], &inc)
        zcopy(&n, &w[0], &inc, &v[0], &inc)
    return value, v_arr, iterations, residual, converged


def gpm_iterate(object ct, object x0, double stop_gap, long max_iter, bint record_trace):
    cdef zc[:, ::1] a = np.ascontiguousarray(ct, dtype=np.complex128)
    cdef int n = a.shape[0]
    x_arr = np.array(x0, dtype=np.complex128).ravel()
    if x_arr.shape[0] != n:
        raise ValueError("start vector length mismatch")
    w_arr = np.empty(n, dtype=np.complex128)
    cdef zc[::1] x = x_arr
    cdef zc[::1] w = w_arr

    cdef long cap = max_iter + 2 if record_trace else 0
    costs_arr = np.empty(cap, dtype=float)
    l1s_arr = np.empty(cap, dtype=float)
    cdef double[::1] costs = costs_arr
    cdef double[::1] l1s = l1s_arr

    cdef char trans_t = b'T'
    cdef int inc = 1
    cdef int i
    cdef zc alpha_one = 1.0
    cdef zc zero = 0.0
    cdef long k = 0
    cdef long count = 0
    cdef double f, l1, mod
    cdef double final_ratio = NAN
    cdef bint converged = False
    cdef bint zero_stop = False

    while True:
        zgemv(&trans_t, &n, &n, &alpha_one, &a[0, 0], &n, &x[0], &inc, &zero, &w[0], &inc)
        f = zdotc(&n, &x[0], &inc, &w[0], &inc).real
        l1 = 0.0
        for i in range(n):
            l1 += hypot(w[i].real, w[i].imag)
        if record_trace:
            costs[count] = f
            l1s[count] = l1
        count += 1
        if l1 <= 0.0:
            zero_stop = True
            break
        final_ratio = f / l1
        if final_ratio >= 1.0 - stop_gap:
            converged = True
            break
        if k >= max_iter:
            break
        for i in range(n):
            mod = hypot(w[i].real, w[i].imag)
            if mod > 0.0:
                x[i] = w[i] / mod
        k += 1

    if record_trace:
        cost_trace = costs_arr[:count].copy()
        l1_trace = l1s_arr[:count].copy()
    else:
        cost_trace = np.empty(0, dtype=float)
        l1_trace = np.empty(0, dtype=float)
    return x_arr, k, cost_trace, l1_trace, final_ratio, converged, zero_stop
