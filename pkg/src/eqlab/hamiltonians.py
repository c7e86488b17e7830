"""Hamiltonians in spectral form and the non-degenerate-gap condition.

Includes the model families used throughout: generic random spectral
Hamiltonians, noninteracting sums H_S + H_B, the diagonal product model
with conserved subsystem populations, and the strong-field spin-bath model
whose eigenstates are near-product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .bipartite import BipartiteSpace
from .errors import DimensionMismatchError, EqlabError
from .linalg import (
    as_matrix,
    haar_random_unitary,
    hermitian_eigendecomposition,
    hermitize,
    kronecker_product,
)

GAP_TOL_FACTOR = 1e-9
RESAMPLE_LIMIT = 100

SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)


@dataclass(frozen=True)
class SpectralHamiltonian:
    """H = Σ_k E_k |E_k⟩⟨E_k| stored as (energies, eigenbasis)."""

    energies: np.ndarray
    eigenbasis: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.energies, dtype=np.float64)
        u = as_matrix(self.eigenbasis, "eigenbasis")
        if e.ndim != 1 or u.shape != (e.size, e.size):
            raise DimensionMismatchError(
                f"energies ({e.shape}) and eigenbasis ({u.shape}) are inconsistent"
            )
        if not np.all(np.isfinite(e)):
            raise ValueError("energies contain non-finite values")
        if np.any(np.diff(e) < 0):
            raise ValueError("energies must be sorted ascending")
        if np.max(np.abs(u.conj().T @ u - np.eye(e.size))) > 1e-10:
            raise ValueError("eigenbasis is not unitary within 1e-10")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "eigenbasis", u)

    @property
    def dim(self) -> int:
        return self.energies.size

    def dense(self) -> np.ndarray:
        u = self.eigenbasis
        return hermitize((u * self.energies) @ u.conj().T)

    def min_level_gap(self) -> float:
        return float(np.min(np.diff(self.energies)))


@dataclass(frozen=True)
class GapReport:
    """Outcome of the non-degenerate-energy-gaps check."""

    passes: bool
    min_gap_separation: float
    degenerate_pairs: tuple[tuple[int, int, int, int], ...]
    tolerance: float


def default_gap_tolerance(energies: np.ndarray) -> float:
    width = float(np.max(energies) - np.min(energies))
    return GAP_TOL_FACTOR * width if width > 0 else GAP_TOL_FACTOR


def gap_analysis(h: SpectralHamiltonian, tol: float | None = None) -> GapReport:
    """Check that every nonzero gap E_k - E_l determines the pair (k, l).

    Degenerate levels (zero gaps within tol) are reported as violations with
    quadruples of the form (k, l, k, l); a pair of equal gaps from distinct
    index pairs is reported as (k, l, m, n).
    """
    e = h.energies
    d = e.size
    if d < 2:
        raise DimensionMismatchError("gap analysis requires d >= 2")
    if tol is None:
        tol = default_gap_tolerance(e)

    violations: list[tuple[int, int, int, int]] = []

    gaps = []
    for k in range(d):
        for l in range(k):
            g = e[k] - e[l]
            if g <= tol:
                violations.append((k, l, k, l))
            else:
                gaps.append((g, k, l))
    gaps.sort(key=lambda t: t[0])

    min_sep = np.inf
    for (g1, k1, l1), (g2, k2, l2) in zip(gaps, gaps[1:]):
        sep = g2 - g1
        if sep <= tol:
            violations.append((k1, l1, k2, l2))
        else:
            min_sep = min(min_sep, sep)

    return GapReport(
        passes=not violations,
        min_gap_separation=float(min_sep),
        degenerate_pairs=tuple(violations),
        tolerance=float(tol),
    )


def _resample(build, rng: np.random.Generator, what: str) -> SpectralHamiltonian:
    """Draw Hamiltonians until gap_analysis passes (measure-zero failures)."""
    for _ in range(RESAMPLE_LIMIT):
        h = build(rng)
        if gap_analysis(h).passes:
            return h
    raise EqlabError(
        f"{what}: no gap-nondegenerate sample in {RESAMPLE_LIMIT} attempts; "
        "this indicates a bug or a pathological energy window"
    )


def random_spectral_hamiltonian(
    space: BipartiteSpace,
    energy_window: tuple[float, float] = (0.0, 1.0),
    rng: np.random.Generator | None = None,
) -> SpectralHamiltonian:
    """Uniform i.i.d. energies on the window, Haar-random eigenbasis."""
    lo, hi = energy_window
    if not hi > lo:
        raise ValueError(f"energy window {energy_window} is empty")
    if rng is None:
        raise ValueError("rng is required")
    basis = haar_random_unitary(space.d, rng)

    def build(r: np.random.Generator) -> SpectralHamiltonian:
        e = np.sort(r.uniform(lo, hi, size=space.d))
        return SpectralHamiltonian(e, basis)

    return _resample(build, rng, "random_spectral_hamiltonian")


def noninteracting_hamiltonian(
    h_s: SpectralHamiltonian, h_b: SpectralHamiltonian, space: BipartiteSpace
) -> SpectralHamiltonian:
    """H = H_S + H_B: sum energies with product eigenvectors, re-sorted."""
    if h_s.dim != space.d_S or h_b.dim != space.d_B:
        raise DimensionMismatchError(
            f"factor dims ({h_s.dim}, {h_b.dim}) do not match space ({space.d_S}, {space.d_B})"
        )
    energies = (h_s.energies[:, None] + h_b.energies[None, :]).reshape(-1)
    basis = kronecker_product(h_s.eigenbasis, h_b.eigenbasis)
    order = np.argsort(energies, kind="stable")
    return SpectralHamiltonian(energies[order], basis[:, order])


def diagonal_product_hamiltonian(
    space: BipartiteSpace,
    energy_window: tuple[float, float] = (0.0, 1.0),
    rng: np.random.Generator | None = None,
) -> SpectralHamiltonian:
    """Interacting but population-conserving model, diagonal in the product basis."""
    lo, hi = energy_window
    if not hi > lo:
        raise ValueError(f"energy window {energy_window} is empty")
    if rng is None:
        raise ValueError("rng is required")
    identity = np.eye(space.d, dtype=np.complex128)

    def build(r: np.random.Generator) -> SpectralHamiltonian:
        e = np.sort(r.uniform(lo, hi, size=space.d))
        return SpectralHamiltonian(e, identity)

    return _resample(build, rng, "diagonal_product_hamiltonian")


def _random_hermitian_unit_radius(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Gaussian Hermitian matrix rescaled to spectral radius 1."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    a = hermitize(g) / np.sqrt(2)
    radius = float(np.max(np.abs(hermitian_eigendecomposition(a).eigenvalues)))
    return a / radius


def spin_bath_hamiltonian(
    field: float, d_B: int, rng: np.random.Generator
) -> tuple[SpectralHamiltonian, BipartiteSpace]:
    """Qubit in a strong field: H = E σ_S^z ⊗ 1 + H_int + 1 ⊗ H_B.

    H_int acts on the full 2·d_B space and H_B on the bath, both rescaled to
    spectral radius 1, so their joint contribution to any expectation value
    lies in [-2, 2].
    """
    if field <= 0:
        raise ValueError(f"field strength must be positive, got {field}")
    if d_B < 2:
        raise DimensionMismatchError(f"d_B must be >= 2, got {d_B}")
    space = BipartiteSpace(2, d_B)

    def build(r: np.random.Generator) -> SpectralHamiltonian:
        h_int = _random_hermitian_unit_radius(space.d, r)
        h_bath = _random_hermitian_unit_radius(d_B, r)
        dense = (
            field * kronecker_product(SIGMA_Z, np.eye(d_B))
            + h_int
            + kronecker_product(np.eye(2), h_bath)
        )
        eig = hermitian_eigendecomposition(dense)
        return SpectralHamiltonian(eig.eigenvalues, eig.eigenvectors)

    return _resample(build, rng, "spin_bath_hamiltonian"), space


def hamiltonian_to_json(
    h: SpectralHamiltonian, space: BipartiteSpace
) -> str:
    """Serialize to the documented JSON schema (interleaved re/im eigenbasis)."""
    flat = h.eigenbasis.reshape(-1)
    interleaved: list[float] = []
    for z in flat:
        interleaved.append(float(z.real))
        interleaved.append(float(z.imag))
    doc = {
        "d_S": space.d_S,
        "d_B": space.d_B,
        "energies": [float(x) for x in h.energies],
        "eigenbasis": interleaved,
    }
    return json.dumps(doc)


def hamiltonian_from_json(text: str) -> tuple[SpectralHamiltonian, BipartiteSpace]:
    doc = json.loads(text)
    space = BipartiteSpace(int(doc["d_S"]), int(doc["d_B"]))
    energies = np.asarray(doc["energies"], dtype=np.float64)
    raw = np.asarray(doc["eigenbasis"], dtype=np.float64)
    if raw.size != 2 * space.d * space.d:
        raise DimensionMismatchError("eigenbasis length does not match d*d complex entries")
    basis = (raw[0::2] + 1j * raw[1::2]).reshape(space.d, space.d)
    return SpectralHamiltonian(energies, basis), space
