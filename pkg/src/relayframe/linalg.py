"""Dense real linear algebra: orthonormalization, projection, symmetric
eigendecomposition, SPD solves, spectral norm and inverse square roots.

Matrices are plain ``float64`` numpy arrays.  The inner loops live in
:mod:`relayframe._kernels`; this module validates input and assembles
results.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from .errors import (
    AllColumnsDegenerate,
    ConvergenceError,
    DimensionMismatch,
    NotPositiveDefinite,
    NotSymmetric,
    RelayFrameError,
)

ORTH_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
CHOLESKY_MAX_DIM = 512
SYMMETRY_TOL = 1e-10


def as_matrix(A, name="matrix"):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise RelayFrameError(f"{name} has non-finite entries")
    return A


def as_vector(f, name="vector"):
    f = np.asarray(f, dtype=np.float64)
    if f.ndim != 1 or f.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 1-D array, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise RelayFrameError(f"{name} has non-finite entries")
    return f


def orthonormalize(columns, tol=ORTH_TOL):
    """Orthonormal basis for the column space of `columns`.

    Modified Gram-Schmidt with a second full orthogonalization pass.  A
    column whose residual norm is at most ``tol`` times its original norm
    (or at most ``tol`` outright, for a zero column) is dropped.

    Raises
    ------
    AllColumnsDegenerate
        If no column survives; a zero subspace is never returned.
    """
    X = as_matrix(columns, "columns")
    if not tol > 0:
        raise ValueError("tol must be positive")
    U = _kernels.mgs_orthonormalize(np.ascontiguousarray(X), float(tol))
    if U.shape[1] == 0:
        raise AllColumnsDegenerate("every column is numerically zero after orthogonalization")
    return U


def project(U, f):
    """Orthogonal projection ``U (U^T f)`` onto the span of orthonormal `U`."""
    U = np.asarray(U, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if U.ndim != 2 or f.shape[0] != U.shape[0]:
        raise DimensionMismatch(f"cannot project a length-{f.shape[0]} vector onto a basis with {U.shape[0]} rows")
    return U @ (U.T @ f)


def projector(U):
    U = np.asarray(U, dtype=np.float64)
    return U @ U.T


@dataclass(frozen=True)
class SymEigResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    @property
    def min(self):
        return float(self.eigenvalues[0])

    @property
    def max(self):
        return float(self.eigenvalues[-1])


def _check_square(A, name):
    if A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")


def sym_eig(A, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Eigenvalues are returned ascending with matching orthonormal
    eigenvector columns.  Iteration stops once the off-diagonal Frobenius
    norm is at most ``tol * ||A||_F`` or after `max_sweeps` sweeps.
    """
    A = as_matrix(A, "A")
    _check_square(A, "A")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > SYMMETRY_TOL * scale:
        raise NotSymmetric(f"asymmetry {np.max(np.abs(A - A.T)):.3e} exceeds tolerance")
    sym = np.ascontiguousarray(0.5 * (A + A.T))
    w, V, sweeps = _kernels.jacobi_eigh(sym, float(tol), int(max_sweeps))
    order = np.argsort(w, kind="stable")
    return SymEigResult(w[order].copy(), np.ascontiguousarray(V[:, order]), int(sweeps))


def eigvals(A):
    return sym_eig(A).eigenvalues


def cholesky(A, tol=0.0):
    """Lower Cholesky factor of SPD `A`.

    Raises NotPositiveDefinite when a pivot is at most `tol`; since every
    pivot bounds the smallest eigenvalue from above this also certifies
    ``lambda_min <= tol``.
    """
    A = as_matrix(A, "A")
    _check_square(A, "A")
    L, min_pivot = _kernels.cholesky(np.ascontiguousarray(A))
    if not min_pivot > tol:
        raise NotPositiveDefinite(f"Cholesky pivot {min_pivot:.3e} <= {tol:.3e}")
    return L


def conjugate_gradient(apply, b, tol=1e-10, maxiter=None, x0=None):
    """Solve ``A x = b`` for SPD `A` given only ``apply(x) = A x``.

    Stops when ``||b - A x|| <= tol * ||b||``.
    """
    b = as_vector(b, "b")
    n = b.shape[0]
    maxiter = 10 * n if maxiter is None else maxiter
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    r = b - apply(x)
    p = r.copy()
    rr = float(r @ r)
    target = (tol * float(np.linalg.norm(b))) ** 2
    for _ in range(maxiter):
        if rr <= target:
            return x
        Ap = apply(p)
        pAp = float(p @ Ap)
        if not pAp > 0.0:
            raise NotPositiveDefinite(f"non-positive curvature {pAp:.3e} in conjugate gradient")
        step = rr / pAp
        x += step * p
        r -= step * Ap
        rr_new = float(r @ r)
        p = r + (rr_new / rr) * p
        rr = rr_new
    if rr <= target:
        return x
    raise ConvergenceError(f"conjugate gradient did not reach tol={tol:g} in {maxiter} iterations")


def solve_spd(A, b, tol=1e-10, refine=3):
    """Solve ``A x = b`` for symmetric positive definite `A`.

    Dimensions up to 512 use Cholesky followed by up to `refine` steps of
    iterative refinement; larger systems use conjugate gradient.  `b` may be
    a vector or an ``(n, m)`` block of right-hand sides.
    """
    A = as_matrix(A, "A")
    _check_square(A, "A")
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"A is {A.shape}, b has length {b.shape[0]}")
    n = A.shape[0]
    if n > CHOLESKY_MAX_DIM:
        if b.ndim == 1:
            return conjugate_gradient(lambda x: A @ x, b, tol=tol)
        return np.column_stack([conjugate_gradient(lambda x: A @ x, b[:, j], tol=tol) for j in range(b.shape[1])])
    L = cholesky(A, tol)
    B = b.reshape(n, -1)
    X = _kernels.cho_solve(L, np.ascontiguousarray(B))
    bnorm = np.linalg.norm(B, axis=0)
    for _ in range(refine):
        R = B - A @ X
        if np.all(np.linalg.norm(R, axis=0) <= tol * bnorm):
            break
        X = X + _kernels.cho_solve(L, np.ascontiguousarray(R))
    return X.reshape(b.shape)


def _spd_eig(A):
    eig = sym_eig(A)
    if not eig.min > 0.0:
        raise NotPositiveDefinite(f"smallest eigenvalue {eig.min:.3e} is not positive")
    return eig


def inv_spd(A):
    eig = _spd_eig(A)
    V = eig.eigenvectors
    R = (V / eig.eigenvalues) @ V.T
    return 0.5 * (R + R.T)


def inv_sqrt_spd(A):
    """Symmetric ``A^{-1/2}`` through the spectral decomposition."""
    eig = _spd_eig(A)
    V = eig.eigenvectors
    R = (V / np.sqrt(eig.eigenvalues)) @ V.T
    return 0.5 * (R + R.T)


def operator_norm(A):
    """Spectral norm, as the square root of the top eigenvalue of the Gram matrix."""
    A = as_matrix(A, "A")
    G = A.T @ A if A.shape[1] <= A.shape[0] else A @ A.T
    top = sym_eig(G).max
    return math.sqrt(max(top, 0.0))


def inverse(A):
    """General inverse (used only for small transform matrices)."""
    A = as_matrix(A, "A")
    _check_square(A, "A")
    return np.linalg.inv(A)


def smallest_singular_value(A):
    """Smallest singular value of square `A`.

    Read off the augmented matrix ``[[0, A], [A^T, 0]]`` (eigenvalues
    ``+-sigma_i``) so that no precision is lost to squaring.
    """
    A = as_matrix(A, "A")
    _check_square(A, "A")
    n = A.shape[0]
    aug = np.zeros((2 * n, 2 * n))
    aug[:n, n:] = A
    aug[n:, :n] = A.T
    w = sym_eig(aug).eigenvalues
    return float(max(w[n], 0.0))


def projection_lemma_residual(A, U):
    """``max |P_V A^T - P_V A^T P_{AV}|`` for ``V = span(U)``.

    The identity holds exactly for every square `A`; the return value is the
    numerical defect.
    """
    A = as_matrix(A, "A")
    PV = projector(U)
    PAV = projector(orthonormalize(A @ U))
    lhs = PV @ A.T
    return float(np.max(np.abs(lhs - lhs @ PAV)))
