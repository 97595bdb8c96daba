# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: cyclic Jacobi eigensolver and the Gauss-Seidel
sweep used by noisy linear imputation.

kpcacam._core_py provides the same two entry points in pure Python; the
dispatcher in kpcacam._native picks whichever is importable.
"""

from libc.math cimport fabs, sqrt

import numpy as np


def jacobi_rotate_inplace(double[:, ::1] A, double[:, ::1] V,
                          double tol_off, int max_sweeps):
    """Cyclic Jacobi sweeps on symmetric A, accumulating rotations in V.

    Mutates A toward diagonal form. Returns the number of sweeps used,
    or -1 if the off-diagonal norm is still above tol_off at the cap.
    """
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double apq, theta, t, c, s, akp, akq, off

    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += 2.0 * A[p, q] * A[p, q]
        off = sqrt(off)
        if off <= tol_off:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    akp = A[p, k]
                    akq = A[q, k]
                    A[p, k] = c * akp - s * akq
                    A[q, k] = s * akp + c * akq
                for k in range(n):
                    akp = V[k, p]
                    akq = V[k, q]
                    V[k, p] = c * akp - s * akq
                    V[k, q] = s * akp + c * akq
    off = 0.0
    for p in range(n - 1):
        for q in range(p + 1, n):
            off += 2.0 * A[p, q] * A[p, q]
    if sqrt(off) <= tol_off:
        return max_sweeps
    return -1


def gauss_seidel_solve(double[::1] x, const double[::1] b,
                       const long[:, ::1] nbr, const double[:, ::1] w,
                       double tol_abs, int max_iter):
    """Row-major Gauss-Seidel for x[i] = b[i] + sum_k w[i,k] * x[nbr[i,k]].

    nbr entries of -1 mark absent neighbors. Returns (iterations,
    final max-abs residual); the caller decides whether that converged.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t m = nbr.shape[1]
    cdef Py_ssize_t i, k
    cdef long j
    cdef int it
    cdef double acc, resid, r

    resid = 0.0
    for it in range(max_iter):
        for i in range(n):
            acc = b[i]
            for k in range(m):
                j = nbr[i, k]
                if j >= 0:
                    acc += w[i, k] * x[j]
            x[i] = acc
        resid = 0.0
        for i in range(n):
            acc = b[i]
            for k in range(m):
                j = nbr[i, k]
                if j >= 0:
                    acc += w[i, k] * x[j]
            r = fabs(acc - x[i])
            if r > resid:
                resid = r
        if resid <= tol_abs:
            return it + 1, resid
    return max_iter, resid
