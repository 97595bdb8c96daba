"""Symmetric eigensolvers.

Production path: deterministic power iteration for the dominant pair
(all that the CAM construction needs). Oracle path: cyclic Jacobi, used
by the test suite to cross-check the production path and to certify
positive semidefiniteness of kernel matrices.
"""

from typing import NamedTuple

import numpy as np

from ._native import jacobi_rotate_inplace
from .errors import ConvergenceError, InputError


class EigenPair(NamedTuple):
    value: float
    vector: np.ndarray


class EigenBasis(NamedTuple):
    values: np.ndarray   # descending
    vectors: np.ndarray  # orthonormal columns


def sign_correct(v):
    """Flip v so its largest-magnitude entry is positive (ties: lowest index)."""
    v = np.asarray(v, dtype=np.float64)
    if v.size == 0:
        return v
    idx = int(np.argmax(np.abs(v)))
    if v[idx] < 0:
        return -v
    return v.copy()


def _check_symmetric(K):
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise InputError(f"expected a square matrix, got {K.shape}")
    scale = max(1.0, float(np.max(np.abs(K))) if K.size else 0.0)
    if float(np.max(np.abs(K - K.T))) > 1e-10 * scale:
        raise InputError("matrix is not symmetric within 1e-10")
    return K


def _power(K, x, tol_abs, max_iter):
    """Power iteration from a fixed start; returns (lam, v, converged)."""
    n = K.shape[0]
    lam = 0.0
    for _ in range(max_iter):
        y = K @ x
        lam = float(x @ y)
        r = y - lam * x
        resid = float(np.linalg.norm(r))
        if resid <= tol_abs:
            return lam, x, True, resid
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            # x landed in the nullspace; restart from e1
            x = np.zeros(n)
            x[0] = 1.0
        else:
            x = y / ny
    return lam, x, False, resid


def top_eigenpair(K, tol=1e-10, max_iter=5000):
    """Dominant (largest-|lambda|) eigenpair of a symmetric matrix.

    Deterministic: starts from the normalized all-ones vector; if that
    start is orthogonal to the dominant eigenvector, restarts from e1.
    The returned vector is unit-norm and sign-corrected.
    """
    K = _check_symmetric(K)
    n = K.shape[0]
    if n == 1:
        return EigenPair(float(K[0, 0]), np.ones(1))
    fro = float(np.linalg.norm(K))
    if fro == 0.0:
        e1 = np.zeros(n)
        e1[0] = 1.0
        return EigenPair(0.0, e1)
    tol_abs = tol * max(1.0, fro)

    x0 = np.ones(n) / np.sqrt(n)
    lam, v, ok, resid = _power(K, x0, tol_abs, max_iter)
    if ok and _missed_dominant(K, lam, v, tol_abs):
        e1 = np.zeros(n)
        e1[0] = 1.0
        lam2, v2, ok2, resid2 = _power(K, e1, tol_abs, max_iter)
        if ok2 and abs(lam2) > abs(lam):
            lam, v, resid = lam2, v2, resid2
    if not ok:
        raise ConvergenceError(
            f"power iteration did not converge in {max_iter} iterations "
            f"(residual {resid:.3e})",
            residual=resid,
        )
    return EigenPair(lam, sign_correct(v))


def _missed_dominant(K, lam, v, tol_abs):
    """Cheap check that |lam| really is the spectral radius.

    Runs a short power iteration on the deflated operator K - lam v v^T;
    a strictly larger magnitude there means the fixed start vector was
    (numerically) orthogonal to the true dominant eigenvector.
    """
    n = K.shape[0]
    z = np.zeros(n)
    z[int(np.argmin(np.abs(v)))] = 1.0
    z -= (v @ z) * v
    nz = float(np.linalg.norm(z))
    if nz == 0.0:
        return False
    z /= nz
    mu = 0.0
    for _ in range(80):
        y = K @ z - lam * (v @ z) * v
        mu = float(z @ y)
        ny = float(np.linalg.norm(y))
        if ny == 0.0:
            return False
        z = y / ny
    return abs(mu) > abs(lam) * (1.0 + 1e-10) + tol_abs


def full_symmetric_eig(K, max_sweeps=60):
    """Complete eigendecomposition by cyclic Jacobi (oracle scale, n <= 1024)."""
    K = _check_symmetric(K)
    n = K.shape[0]
    if n > 1024:
        raise InputError(f"oracle eigensolver capped at n=1024, got {n}")
    A = 0.5 * (K + K.T)  # exact symmetry keeps rotations clean
    V = np.eye(n)
    fro = float(np.linalg.norm(A))
    tol_off = 1e-13 * max(fro, 1e-300)
    sweeps = jacobi_rotate_inplace(A, V, tol_off, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    values = np.diag(A).copy()
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = V[:, order]
    for j in range(n):
        vectors[:, j] = sign_correct(vectors[:, j])
    return EigenBasis(values, vectors)


def dominant_of_basis(basis):
    """Largest-|lambda| pair from a full decomposition (values are signed-sorted)."""
    idx = int(np.argmax(np.abs(basis.values)))
    return EigenPair(float(basis.values[idx]), sign_correct(basis.vectors[:, idx]))
