"""Dense complex linear algebra kernel.

Matrices are plain numpy complex128 arrays in row-major (C) order. This
module provides the validation helpers, Kronecker products, a cyclic Jacobi
eigensolver for Hermitian matrices and Haar-random unitaries that the rest
of the package is built on.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    DimensionOverflowError,
    NoConvergenceError,
    NotHermitianError,
)

DEFAULT_MAX_DIM = 4096
HERMITICITY_TOL = 1e-12
JACOBI_SWEEP_LIMIT = 100
JACOBI_DEFAULT_TOL = 1e-12


def max_dimension() -> int:
    """Configured cap on total matrix dimension (env EQLAB_MAX_DIM)."""
    return int(os.environ.get("EQLAB_MAX_DIM", DEFAULT_MAX_DIM))


def check_dimension(dim: int) -> None:
    if dim > max_dimension():
        raise DimensionOverflowError(
            f"dimension {dim} exceeds configured maximum {max_dimension()}"
        )


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-d complex128 array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-dimensional, got ndim={a.ndim}")
    if a.size == 0:
        raise DimensionMismatchError(f"{name} must be nonempty")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def hermitize(a: np.ndarray) -> np.ndarray:
    """Exact Hermitian part (a + a†)/2."""
    return (a + a.conj().T) / 2


def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    return bool(np.max(np.abs(a - a.conj().T)) <= tol)


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (real, ascending) and matching orthonormal eigenvectors.

    Column k of ``eigenvectors`` belongs to ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _jacobi_rotation(a: np.ndarray, u: np.ndarray, p: int, q: int) -> None:
    """Zero out a[p, q] with an exact unitary 2x2 similarity, in place."""
    b = a[p, q]
    app = a[p, p].real
    aqq = a[q, q].real
    h = (aqq - app) / 2
    r = np.hypot(h, abs(b))
    sgn = 1.0 if h >= 0 else -1.0
    # Use the block eigenvalue closer to app so the rotation angle stays
    # <= pi/4 (required for sweep convergence); y = lam_near - app is
    # computed cancellation-free as -sgn*|b|^2/(r+|h|).
    y = -sgn * abs(b) ** 2 / (r + abs(h))
    norm = np.hypot(abs(b), y)
    if norm == 0.0:
        return
    x = b / norm
    y = y / norm
    rot = np.array([[x, -y], [y, np.conj(x)]], dtype=np.complex128)
    cols = [p, q]
    a[:, cols] = a[:, cols] @ rot
    a[cols, :] = rot.conj().T @ a[cols, :]
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    u[:, cols] = u[:, cols] @ rot


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diagonal(a))
    return float(np.linalg.norm(off))


def hermitian_eigendecomposition(
    m, tol: float = JACOBI_DEFAULT_TOL
) -> EigenDecomposition:
    """Diagonalize a Hermitian matrix by cyclic Jacobi sweeps.

    ``tol`` is relative: the iteration stops once the Frobenius norm of the
    off-diagonal part drops below ``tol * ||m||_F``. Raises NotHermitianError
    if the input is not symmetric to 1e-12 entrywise, NoConvergenceError
    after 100 sweeps.
    """
    a = as_matrix(m)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"matrix must be square, got {a.shape}")
    if not is_hermitian(a):
        raise NotHermitianError(
            f"max |m - m†| = {np.max(np.abs(a - a.conj().T)):.3e} exceeds {HERMITICITY_TOL}"
        )
    a = hermitize(a)
    threshold = tol * float(np.linalg.norm(a))
    u = np.eye(n, dtype=np.complex128)

    converged = n == 1 or _off_norm(a) <= threshold
    for _ in range(JACOBI_SWEEP_LIMIT):
        if converged:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] != 0.0:
                    _jacobi_rotation(a, u, p, q)
        converged = _off_norm(a) <= threshold
    if not converged:
        raise NoConvergenceError(
            f"Jacobi sweeps exhausted ({JACOBI_SWEEP_LIMIT}) at off-norm "
            f"{_off_norm(a):.3e}, threshold {threshold:.3e}"
        )

    values = np.diagonal(a).real.copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(
        eigenvalues=values[order], eigenvectors=u[:, order].copy()
    )


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: complex Ginibre matrix, QR-orthonormalized.

    The phases of the triangular factor's diagonal are absorbed into Q so
    that the factorization has real positive diagonal, which makes the
    distribution exactly Haar.
    """
    if dim < 1:
        raise DimensionMismatchError(f"dim must be >= 1, got {dim}")
    check_dimension(dim)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def kronecker_product(a, b) -> np.ndarray:
    """Kronecker product with the fixed (A ⊗ B)[(i·rB+k),(j·cB+l)] layout."""
    am = as_matrix(a, "a")
    bm = as_matrix(b, "b")
    check_dimension(am.shape[0] * bm.shape[0])
    check_dimension(am.shape[1] * bm.shape[1])
    return np.kron(am, bm)
