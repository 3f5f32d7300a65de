"""Hot inner loops, each in a numba and a pure-numpy implementation.

All kernels take and return float64 arrays and sum in a fixed order, so a
given backend is bit-reproducible for identical input.  The two backends
agree to rounding but are not required to agree bitwise.

The public names (``jacobi_eigh``, ``mgs_orthonormalize``, ...) are bound to
the backend chosen in :mod:`relayframe._accel`; ``NUMBA`` and ``NUMPY``
expose both sets explicitly for tests and benchmarks.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# cyclic Jacobi eigendecomposition


def _rotation(app, aqq, apq):
    # (c, s) annihilating apq in J^T A J, J = [[c, s], [-s, c]] on (p, q)
    tau = (aqq - app) / (2.0 * apq)
    if abs(tau) > 1e150:
        t = 0.5 / tau
    elif tau >= 0.0:
        t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    return c, t * c


_rotation_nb = njit(_rotation)


def _off_and_fro(a):
    n = a.shape[0]
    off = 0.0
    fro = 0.0
    for i in range(n):
        for j in range(n):
            x = a[i, j] * a[i, j]
            fro += x
            if i != j:
                off += x
    return math.sqrt(off), math.sqrt(fro)


_off_and_fro_nb = njit(_off_and_fro)


@njit
def _jacobi_nb(A, tol, max_sweeps):
    n = A.shape[0]
    a = A.copy()
    v = np.eye(n)
    off, fro = _off_and_fro_nb(a)
    sweeps = 0
    while sweeps < max_sweeps and off > tol * fro:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                c, s = _rotation_nb(a[p, p], a[q, q], apq)
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
        sweeps += 1
        off, fro = _off_and_fro_nb(a)
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return w, v, sweeps


def _jacobi_np(A, tol, max_sweeps):
    n = A.shape[0]
    a = np.array(A, dtype=np.float64, copy=True)
    v = np.eye(n)
    off, fro = _off_and_fro(a)
    sweeps = 0
    while sweeps < max_sweeps and off > tol * fro:
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                c, s = _rotation(a[p, p], a[q, q], apq)
                idx = [p, q]
                rot = np.array([[c, s], [-s, c]])
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ rot
        sweeps += 1
        offdiag = a.copy()
        np.fill_diagonal(offdiag, 0.0)
        off = math.sqrt(float(np.sum(offdiag * offdiag)))
        fro = math.sqrt(float(np.sum(a * a)))
    return np.diag(a).copy(), v, sweeps


# ---------------------------------------------------------------------------
# modified Gram-Schmidt with one re-orthogonalization pass


@njit
def _mgs_nb(X, tol):
    m, k = X.shape
    U = np.zeros((m, k))
    r = 0
    for j in range(k):
        col = X[:, j].copy()
        orig = 0.0
        for i in range(m):
            orig += col[i] * col[i]
        orig = math.sqrt(orig)
        for _ in range(2):
            for t in range(r):
                dot = 0.0
                for i in range(m):
                    dot += U[i, t] * col[i]
                for i in range(m):
                    col[i] -= dot * U[i, t]
        nrm = 0.0
        for i in range(m):
            nrm += col[i] * col[i]
        nrm = math.sqrt(nrm)
        thresh = tol * orig if orig > 0.0 else tol
        if nrm <= thresh:
            continue
        for i in range(m):
            U[i, r] = col[i] / nrm
        r += 1
    return U[:, :r].copy()


def _mgs_np(X, tol):
    m, k = X.shape
    kept = []
    for j in range(k):
        col = np.array(X[:, j], dtype=np.float64, copy=True)
        orig = math.sqrt(float(col @ col))
        for _ in range(2):
            for q in kept:
                col -= (q @ col) * q
        nrm = math.sqrt(float(col @ col))
        thresh = tol * orig if orig > 0.0 else tol
        if nrm <= thresh:
            continue
        kept.append(col / nrm)
    if not kept:
        return np.zeros((m, 0))
    return np.column_stack(kept)


# ---------------------------------------------------------------------------
# Cholesky factorization and triangular solves


@njit
def _cholesky_nb(A):
    # returns (L, min_pivot); min_pivot <= 0 means factorization broke down
    n = A.shape[0]
    L = np.zeros((n, n))
    min_pivot = np.inf
    for j in range(n):
        d = A[j, j]
        for k in range(j):
            d -= L[j, k] * L[j, k]
        if d < min_pivot:
            min_pivot = d
        if d <= 0.0:
            return L, d
        ljj = math.sqrt(d)
        L[j, j] = ljj
        for i in range(j + 1, n):
            s = A[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / ljj
    return L, min_pivot


def _cholesky_np(A):
    n = A.shape[0]
    L = np.zeros((n, n))
    min_pivot = np.inf
    for j in range(n):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        min_pivot = min(min_pivot, d)
        if d <= 0.0:
            return L, d
        L[j, j] = math.sqrt(d)
        L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L, min_pivot


@njit
def _cho_solve_nb(L, B):
    # B is (n, m): solves L L^T X = B column by column
    n, m = B.shape
    X = B.copy()
    for c in range(m):
        for i in range(n):
            s = X[i, c]
            for k in range(i):
                s -= L[i, k] * X[k, c]
            X[i, c] = s / L[i, i]
        for i in range(n - 1, -1, -1):
            s = X[i, c]
            for k in range(i + 1, n):
                s -= L[k, i] * X[k, c]
            X[i, c] = s / L[i, i]
    return X


def _cho_solve_np(L, B):
    n = L.shape[0]
    X = np.array(B, dtype=np.float64, copy=True)
    for i in range(n):
        X[i] = (X[i] - L[i, :i] @ X[:i]) / L[i, i]
    for i in range(n - 1, -1, -1):
        X[i] = (X[i] - L[i + 1:, i] @ X[i + 1:]) / L[i, i]
    return X


# ---------------------------------------------------------------------------
# weighted Gram accumulation  S = sum_a w_a X_a^T X_a


@njit
def _gram_nb(stack, weights):
    na, kmax, n = stack.shape
    S = np.zeros((n, n))
    for a in range(na):
        w = weights[a]
        for i in range(n):
            for j in range(i, n):
                s = 0.0
                for r in range(kmax):
                    s += stack[a, r, i] * stack[a, r, j]
                S[i, j] += w * s
    for i in range(n):
        for j in range(i + 1, n):
            S[j, i] = S[i, j]
    return S


def _gram_np(stack, weights):
    n = stack.shape[2]
    S = np.zeros((n, n))
    for a in range(stack.shape[0]):
        X = stack[a]
        S += weights[a] * (X.T @ X)
    return 0.5 * (S + S.T)


NUMBA = {
    "jacobi": _jacobi_nb,
    "mgs": _mgs_nb,
    "cholesky": _cholesky_nb,
    "cho_solve": _cho_solve_nb,
    "gram": _gram_nb,
}
NUMPY = {
    "jacobi": _jacobi_np,
    "mgs": _mgs_np,
    "cholesky": _cholesky_np,
    "cho_solve": _cho_solve_np,
    "gram": _gram_np,
}
ACTIVE = NUMBA if USE_NUMBA else NUMPY

jacobi_eigh = ACTIVE["jacobi"]
mgs_orthonormalize = ACTIVE["mgs"]
cholesky = ACTIVE["cholesky"]
cho_solve = ACTIVE["cho_solve"]
gram_accumulate = ACTIVE["gram"]
