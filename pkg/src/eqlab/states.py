"""Pure states, density matrices and their scalar functionals."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bipartite import BipartiteSpace
from .errors import DimensionMismatchError
from .linalg import (
    as_matrix,
    hermitian_eigendecomposition,
    is_hermitian,
)

STATE_NORM_TOL = 1e-12
DENSITY_HERMITICITY_TOL = 1e-10
DENSITY_TRACE_TOL = 1e-10
DENSITY_EIGENVALUE_FLOOR = -1e-9
RANK_THRESHOLD = 1e-10


def as_state(psi, dim: int | None = None) -> np.ndarray:
    """Coerce to a normalized complex state vector."""
    v = np.asarray(psi, dtype=np.complex128)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError("state must be a nonempty vector")
    if dim is not None and v.size != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {v.size}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > STATE_NORM_TOL:
        raise ValueError(f"state norm {norm!r} deviates from 1 beyond {STATE_NORM_TOL}")
    return v


def density_matrix(psi) -> np.ndarray:
    """ρ = |ψ⟩⟨ψ| for a normalized state vector."""
    v = as_state(psi)
    return np.outer(v, v.conj())


def check_density_matrix(rho, check_positivity: bool = False) -> np.ndarray:
    """Validate Hermiticity and unit trace; optionally the eigenvalue floor."""
    a = as_matrix(rho, "rho")
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"density matrix must be square, got {a.shape}")
    if not is_hermitian(a, DENSITY_HERMITICITY_TOL):
        raise ValueError("density matrix is not Hermitian within 1e-10")
    tr = np.trace(a)
    if abs(tr - 1.0) > DENSITY_TRACE_TOL:
        raise ValueError(f"density matrix trace {tr!r} deviates from 1")
    if check_positivity:
        lo = float(hermitian_eigendecomposition(a).eigenvalues[0])
        if lo < DENSITY_EIGENVALUE_FLOOR:
            raise ValueError(f"density matrix has eigenvalue {lo} below {DENSITY_EIGENVALUE_FLOOR}")
    return a


@dataclass(frozen=True)
class Subspace:
    """A d_R-dimensional subspace given by orthonormal basis columns."""

    basis: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        b = as_matrix(self.basis, "basis")
        gram = b.conj().T @ b
        if np.max(np.abs(gram - np.eye(b.shape[1]))) > 1e-10:
            raise ValueError("subspace basis columns are not orthonormal within 1e-10")
        object.__setattr__(self, "basis", b)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def d_R(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    @classmethod
    def full(cls, dim: int) -> "Subspace":
        return cls(np.eye(dim, dtype=np.complex128))

    @classmethod
    def fixed_system(cls, psi_s, space: BipartiteSpace) -> "Subspace":
        """|ψ⟩_S ⊗ H_B: the bath is free, the subsystem state is pinned."""
        v = as_state(psi_s, space.d_S)
        return cls(np.kron(v.reshape(-1, 1), np.eye(space.d_B, dtype=np.complex128)))

    @classmethod
    def fixed_bath(cls, phi_b, space: BipartiteSpace) -> "Subspace":
        """H_S ⊗ |φ⟩_B: the subsystem is free, the bath state is pinned."""
        v = as_state(phi_b, space.d_B)
        return cls(np.kron(np.eye(space.d_S, dtype=np.complex128), v.reshape(-1, 1)))


def haar_random_state(subspace: Subspace, rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform pure state within the given subspace."""
    z = rng.standard_normal(subspace.d_R) + 1j * rng.standard_normal(subspace.d_R)
    z /= np.linalg.norm(z)
    return subspace.basis @ z


def product_state(psi_s, phi_b, space: BipartiteSpace) -> np.ndarray:
    """Global state with amplitudes[(s,b)] = ψ_S[s]·φ_B[b]."""
    vs = as_state(psi_s, space.d_S)
    vb = as_state(phi_b, space.d_B)
    return np.kron(vs, vb)


def purity(rho) -> float:
    """tr(ρ²); for Hermitian ρ this equals the squared Frobenius norm."""
    a = as_matrix(rho, "rho")
    return float(np.vdot(a, a).real)


def effective_dimension(rho) -> float:
    """1 / tr(ρ²): how many pure states contribute appreciably."""
    return 1.0 / purity(rho)


def numerical_rank(rho, threshold: float = RANK_THRESHOLD) -> int:
    """Number of eigenvalues above the threshold."""
    eig = hermitian_eigendecomposition(as_matrix(rho, "rho"))
    return int(np.sum(eig.eigenvalues > threshold))


def trace_distance(rho1, rho2) -> float:
    """½ Σ|λ_i| over the eigenvalues of the Hermitian difference."""
    a = as_matrix(rho1, "rho1")
    b = as_matrix(rho2, "rho2")
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shape mismatch {a.shape} vs {b.shape}")
    eig = hermitian_eigendecomposition(a - b)
    return 0.5 * float(np.sum(np.abs(eig.eigenvalues)))
