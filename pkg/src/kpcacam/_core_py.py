"""Pure-Python fallback for the compiled hot loops in ``_core.pyx``.

Same entry points, same iteration order, so results match the compiled
path to floating-point identity on the rotation/sweep schedule.
"""

import math

import numpy as np


def jacobi_rotate_inplace(A, V, tol_off, max_sweeps):
    """Cyclic Jacobi sweeps; see the compiled twin for the contract."""
    A = np.asarray(A)
    V = np.asarray(V)
    n = A.shape[0]
    for sweep in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.triu(A, 1) ** 2)))
        if off <= tol_off:
            return sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                vcol_p = V[:, p].copy()
                vcol_q = V[:, q].copy()
                V[:, p] = c * vcol_p - s * vcol_q
                V[:, q] = s * vcol_p + c * vcol_q
    off = math.sqrt(2.0 * float(np.sum(np.triu(A, 1) ** 2)))
    if off <= tol_off:
        return max_sweeps
    return -1


def gauss_seidel_solve(x, b, nbr, w, tol_abs, max_iter):
    """Row-major Gauss-Seidel; see the compiled twin for the contract."""
    n = len(x)
    m = nbr.shape[1]
    xs = list(map(float, x))
    bs = list(map(float, b))
    nbrs = [[int(nbr[i, k]) for k in range(m)] for i in range(n)]
    ws = [[float(w[i, k]) for k in range(m)] for i in range(n)]

    resid = 0.0
    iters = max_iter
    for it in range(max_iter):
        for i in range(n):
            acc = bs[i]
            row_n = nbrs[i]
            row_w = ws[i]
            for k in range(m):
                j = row_n[k]
                if j >= 0:
                    acc += row_w[k] * xs[j]
            xs[i] = acc
        resid = 0.0
        for i in range(n):
            acc = bs[i]
            row_n = nbrs[i]
            row_w = ws[i]
            for k in range(m):
                j = row_n[k]
                if j >= 0:
                    acc += row_w[k] * xs[j]
            r = abs(acc - xs[i])
            if r > resid:
                resid = r
        if resid <= tol_abs:
            iters = it + 1
            break
    x[:] = xs
    return iters, resid
