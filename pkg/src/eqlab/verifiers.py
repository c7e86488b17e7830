"""One check per theorem or identity: empirical quantity vs stated bound.

Checks that bound a true expectation are tested on sample means with a
one-sided 3-standard-error allowance. Tail bounds that exceed 1 at desk
scale are flagged vacuous in the check metadata rather than claimed
meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as scipy_stats

from .bipartite import (
    BipartiteSpace,
    partial_trace_bath,
    partial_trace_system,
    swap_operator,
)
from .dynamics import (
    DEFAULT_N_SAMPLES,
    DEFAULT_T_MAX_FACTOR,
    DEFAULT_THRESHOLDS,
    TrajectoryStats,
    default_t_max,
    dephased_time_average,
    energy_coefficients,
    reduced_states_at_times,
    require_nondegenerate,
    sample_times,
    torus_state,
    trajectory_statistics,
)
from .errors import DimensionMismatchError
from .hamiltonians import SpectralHamiltonian
from .linalg import as_matrix, check_dimension, hermitize, kronecker_product
from .states import (
    Subspace,
    effective_dimension,
    haar_random_state,
    numerical_rank,
    purity,
    trace_distance,
)


@dataclass(frozen=True)
class ConstantsTable:
    """Closed-form concentration constants."""

    c: float = math.log(2) ** 2 / (72 * math.pi**3)
    c_prime: float = 2 / (9 * math.pi**3)
    c_double_prime: float = 1 / (128 * math.pi**2)


CONSTANTS = ConstantsTable()


@dataclass(frozen=True)
class BoundCheck:
    """Uniform result carrier: satisfied iff empirical <= bound."""

    empirical: float
    bound: float
    satisfied: bool
    margin: float
    metadata: dict = field(default_factory=dict)

    @classmethod
    def upper(cls, empirical: float, bound: float, **metadata) -> "BoundCheck":
        margin = bound - empirical
        return cls(
            empirical=float(empirical),
            bound=float(bound),
            satisfied=margin >= 0,
            margin=float(margin),
            metadata=metadata,
        )

    @classmethod
    def lower(cls, quantity: float, lower_bound: float, **metadata) -> "BoundCheck":
        """Check quantity >= lower_bound, stored with roles swapped so the
        satisfied/margin invariant still reads empirical <= bound."""
        metadata = {"orientation": "lower", **metadata}
        return cls.upper(lower_bound, quantity, **metadata)


def _standard_error(samples: np.ndarray) -> float:
    if samples.size < 2:
        return 0.0
    return float(np.std(samples, ddof=1) / np.sqrt(samples.size))


# ---------------------------------------------------------------------------
# Theorem 1: time-averaged subsystem distance


@dataclass(frozen=True)
class Theorem1Result:
    stats: TrajectoryStats
    bath_check: BoundCheck
    total_check: BoundCheck
    exceed_checks: dict[float, BoundCheck]
    d_eff_omega: float
    d_eff_omega_b: float


def theorem1_check(
    psi0,
    h: SpectralHamiltonian,
    space: BipartiteSpace,
    t_max: float | None = None,
    n_samples: int = DEFAULT_N_SAMPLES,
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS,
    exceed_slack: float = 0.02,
    rng: np.random.Generator | None = None,
) -> Theorem1Result:
    """Empirical ⟨D(ρ_S(t), ω_S)⟩_t against both equilibration bounds."""
    require_nondegenerate(h)
    if t_max is None:
        t_max = default_t_max(h)
    omega = dephased_time_average(psi0, h, check_gaps=False)
    omega_b = partial_trace_system(omega, space)
    d_eff_omega = effective_dimension(omega)
    d_eff_omega_b = effective_dimension(omega_b)
    stats = trajectory_statistics(psi0, h, space, t_max, n_samples, thresholds, rng)
    bath_bound = 0.5 * math.sqrt(space.d_S / d_eff_omega_b)
    total_bound = 0.5 * math.sqrt(space.d_S**2 / d_eff_omega)
    exceed_checks = {
        k: BoundCheck.upper(frac, 1.0 / k + exceed_slack, threshold=k)
        for k, frac in stats.exceed_fractions.items()
    }
    return Theorem1Result(
        stats=stats,
        bath_check=BoundCheck.upper(stats.mean_distance, bath_bound, kind="bath"),
        total_check=BoundCheck.upper(stats.mean_distance, total_bound, kind="total"),
        exceed_checks=exceed_checks,
        d_eff_omega=d_eff_omega,
        d_eff_omega_b=d_eff_omega_b,
    )


# ---------------------------------------------------------------------------
# Theorem 2: concentration of the effective dimension


@dataclass(frozen=True)
class Theorem2Summary:
    d_eff_samples: np.ndarray
    mean: float
    std_error: float
    tail_frequency: float
    mean_check: BoundCheck
    tail_check: BoundCheck


def d_eff_of_time_average(psi, h: SpectralHamiltonian) -> float:
    """d_eff(ω) = 1 / Σ_k |c_k|⁴ for a pure initial state."""
    c = energy_coefficients(psi, h)
    return float(1.0 / np.sum(np.abs(c) ** 4))


def theorem2_statistics(
    subspace: Subspace,
    h: SpectralHamiltonian,
    trials: int,
    rng: np.random.Generator,
) -> Theorem2Summary:
    """Sample d_eff(ω) over Haar states of the subspace; check mean and tail."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    d_r = subspace.d_R
    samples = np.array(
        [d_eff_of_time_average(haar_random_state(subspace, rng), h) for _ in range(trials)]
    )
    mean = float(np.mean(samples))
    se = _standard_error(samples)
    tail_freq = float(np.mean(samples < d_r / 4))
    tail_bound = 2 * math.exp(-CONSTANTS.c * math.sqrt(d_r))
    return Theorem2Summary(
        d_eff_samples=samples,
        mean=mean,
        std_error=se,
        tail_frequency=tail_freq,
        mean_check=BoundCheck.lower(
            mean + 3 * se, d_r / 2, allowance="3 standard errors", trials=trials
        ),
        tail_check=BoundCheck.upper(
            tail_freq, tail_bound, vacuous=tail_bound > 1, trials=trials
        ),
    )


# ---------------------------------------------------------------------------
# Theorem 3: initial-state independence of the equilibrium state


def reduced_eigenstates(
    h: SpectralHamiltonian, space: BipartiteSpace
) -> np.ndarray:
    """tr_B |E_k⟩⟨E_k| for every eigenstate, shape (d, d_S, d_S)."""
    amps = h.eigenbasis.T.reshape(h.dim, space.d_S, space.d_B)
    return np.einsum("ksb,ktb->kst", amps, amps.conj())


def delta_quantity(
    h: SpectralHamiltonian, subspace: Subspace, space: BipartiteSpace
) -> float:
    """Π_R-weighted average subsystem purity of the energy eigenstates."""
    if subspace.ambient_dim != h.dim or h.dim != space.d:
        raise DimensionMismatchError("Hamiltonian, subspace and space dimensions disagree")
    weights = np.sum(np.abs(subspace.basis.conj().T @ h.eigenbasis) ** 2, axis=0)
    reduced = reduced_eigenstates(h, space)
    purities = np.einsum("kst,kts->k", reduced, reduced).real
    return float(np.sum(weights * purities) / subspace.d_R)


@dataclass(frozen=True)
class Theorem3Summary:
    distances: np.ndarray
    mean: float
    std_error: float
    delta: float
    weak_check: BoundCheck
    delta_check: BoundCheck
    tail_frequency: float
    tail_check: BoundCheck
    mean_bias_note: str


def theorem3_statistics(
    subspace: Subspace,
    h: SpectralHamiltonian,
    space: BipartiteSpace,
    trials: int,
    rng: np.random.Generator,
    epsilon: float | None = None,
) -> Theorem3Summary:
    """Distances of per-state equilibrium states ω_S^Ψ to their Haar mean Ω_S.

    Ω_S is estimated by the empirical mean over the same trials; the induced
    O(1/√trials) bias is noted in the summary.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    d_r = subspace.d_R
    d_s = space.d_S
    reduced = reduced_eigenstates(h, space)
    omegas = []
    for _ in range(trials):
        psi = haar_random_state(subspace, rng)
        w = np.abs(energy_coefficients(psi, h)) ** 2
        omegas.append(hermitize(np.einsum("k,kst->st", w, reduced)))
    mean_omega = hermitize(np.mean(omegas, axis=0))
    distances = np.array([trace_distance(o, mean_omega) for o in omegas])
    mean = float(np.mean(distances))
    se = _standard_error(distances)

    delta = delta_quantity(h, subspace, space)
    weak_bound = math.sqrt(d_s / (4 * d_r))
    delta_bound = math.sqrt(d_s * delta / (4 * d_r))
    if epsilon is None:
        epsilon = d_r ** (-1 / 3)
    tail_threshold = 0.5 * math.sqrt(d_s * delta / d_r) + epsilon
    tail_freq = float(np.mean(distances > tail_threshold))
    tail_bound = 2 * math.exp(-CONSTANTS.c_prime * epsilon**2 * d_r)
    return Theorem3Summary(
        distances=distances,
        mean=mean,
        std_error=se,
        delta=delta,
        weak_check=BoundCheck.upper(
            mean, weak_bound + 3 * se, allowance="3 standard errors", trials=trials
        ),
        delta_check=BoundCheck.upper(
            mean, delta_bound + 3 * se, allowance="3 standard errors", trials=trials
        ),
        tail_frequency=tail_freq,
        tail_check=BoundCheck.upper(
            tail_freq, tail_bound, vacuous=tail_bound > 1, epsilon=epsilon
        ),
        mean_bias_note=(
            "reference state is the sample mean over the same trials; "
            f"bias is O(1/sqrt(trials)) with trials={trials}"
        ),
    )


# ---------------------------------------------------------------------------
# Theorem 4: ergodic torus tail bound


def torus_distances(
    c,
    h: SpectralHamiltonian,
    space: BipartiteSpace,
    omega_s: np.ndarray,
    samples: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """D(ρ_S(α), ω_S) for uniform independent phase vectors α."""
    out = np.empty(samples)
    cv = np.asarray(c, dtype=np.complex128)
    for i in range(samples):
        alpha = rng.uniform(0.0, 2 * np.pi, size=h.dim)
        psi = torus_state(cv, h, alpha)
        amp = psi.reshape(space.d_S, space.d_B)
        out[i] = trace_distance(hermitize(amp @ amp.conj().T), omega_s)
    return out


def theorem4_tail(
    c,
    h: SpectralHamiltonian,
    space: BipartiteSpace,
    epsilon: float,
    samples: int,
    rng: np.random.Generator,
) -> BoundCheck:
    """Tail frequency of D above √(d_S/d_eff(ω_B)) + ε under phase sampling.

    The i.i.d. uniform spectra produced by the generators are treated as
    rationally independent (ergodic), which cannot be verified in floating
    point; the assumption is recorded in the metadata.
    """
    if samples < 2:
        raise ValueError(f"samples must be >= 2, got {samples}")
    cv = np.asarray(c, dtype=np.complex128)
    u = h.eigenbasis
    omega = hermitize((u * np.abs(cv) ** 2) @ u.conj().T)
    omega_s = partial_trace_bath(omega, space)
    omega_b = partial_trace_system(omega, space)
    threshold = math.sqrt(space.d_S / effective_dimension(omega_b)) + epsilon
    distances = torus_distances(cv, h, space, omega_s, samples, rng)
    freq = float(np.mean(distances > threshold))
    bound = math.exp(-CONSTANTS.c_double_prime * epsilon**4 * effective_dimension(omega))
    return BoundCheck.upper(
        freq,
        bound,
        vacuous=bound >= 1,
        threshold=threshold,
        epsilon=epsilon,
        samples=samples,
        assumption="i.i.d. uniform spectrum treated as rationally independent",
    )


def ergodicity_ks_statistic(
    psi0,
    h: SpectralHamiltonian,
    space: BipartiteSpace,
    t_max: float | None = None,
    n_samples: int = DEFAULT_N_SAMPLES,
    rng: np.random.Generator | None = None,
) -> float:
    """Two-sample KS statistic between time- and torus-sampled distances."""
    if rng is None:
        raise ValueError("rng is required")
    require_nondegenerate(h)
    if t_max is None:
        t_max = default_t_max(h)
    omega_s = partial_trace_bath(dephased_time_average(psi0, h, check_gaps=False), space)
    times = sample_times(t_max, n_samples, rng)
    rhos = reduced_states_at_times(psi0, h, space, times)
    time_d = np.array([trace_distance(hermitize(r), omega_s) for r in rhos])
    c = energy_coefficients(psi0, h)
    torus_d = torus_distances(c, h, space, omega_s, n_samples, rng)
    return float(scipy_stats.ks_2samp(time_d, torus_d).statistic)


# ---------------------------------------------------------------------------
# Subadditivity chain and bath non-equilibration


@dataclass(frozen=True)
class SubadditivityReport:
    renyi_check: BoundCheck
    bath_deff_check: BoundCheck
    omega_chain_check: BoundCheck
    rank_check: BoundCheck
    product_chain_check: BoundCheck | None


def subadditivity_and_bath_checks(
    psi0,
    h: SpectralHamiltonian,
    space: BipartiteSpace,
    t_max: float | None = None,
    n_samples: int = 200,
    rank_samples: int = 8,
    restricted_bath_dim: int | None = None,
    rng: np.random.Generator | None = None,
) -> SubadditivityReport:
    """Rényi weak-subadditivity chain, bath rank/d_eff bounds at sampled times."""
    if rng is None:
        raise ValueError("rng is required")
    require_nondegenerate(h)
    if t_max is None:
        t_max = default_t_max(h)
    omega = dephased_time_average(psi0, h, check_gaps=False)
    omega_b = partial_trace_system(omega, space)
    renyi_check = BoundCheck.lower(purity(omega), purity(omega_b) / space.d_S)
    omega_chain_check = BoundCheck.lower(
        effective_dimension(omega_b), effective_dimension(omega) / space.d_S
    )

    times = sample_times(t_max, n_samples, rng)
    rhos_s = reduced_states_at_times(psi0, h, space, times)
    c = energy_coefficients(psi0, h)
    phases = np.exp(-1j * np.outer(times, h.energies))
    states = (phases * c) @ h.eigenbasis.T
    amps = states.reshape(n_samples, space.d_S, space.d_B)
    rhos_b = np.einsum("nsb,nsc->nbc", amps, amps.conj())
    bath_deff = 1.0 / np.einsum("nbc,ncb->n", rhos_b, rhos_b).real
    bath_deff_check = BoundCheck.upper(float(np.max(bath_deff)), space.d_S + 1e-6)

    stride = max(1, n_samples // rank_samples)
    rank_diff = 0
    for idx in range(0, n_samples, stride):
        rank_diff = max(
            rank_diff,
            abs(
                numerical_rank(hermitize(rhos_b[idx]))
                - numerical_rank(hermitize(rhos_s[idx]))
            ),
        )
    rank_check = BoundCheck.upper(float(rank_diff), 0.0)

    product_chain_check = None
    if restricted_bath_dim is not None:
        d_rb = restricted_bath_dim
        if effective_dimension(omega) >= d_rb / 4:
            product_chain_check = BoundCheck.lower(
                effective_dimension(omega_b), d_rb / (4 * space.d_S)
            )
    return SubadditivityReport(
        renyi_check=renyi_check,
        bath_deff_check=bath_deff_check,
        omega_chain_check=omega_chain_check,
        rank_check=rank_check,
        product_chain_check=product_chain_check,
    )


# ---------------------------------------------------------------------------
# Operator identities


def swap_trace_identity_check(a, b) -> float:
    """|tr(AB) - tr((A⊗B)S)|; exactly zero up to rounding."""
    am = as_matrix(a, "a")
    bm = as_matrix(b, "b")
    if am.shape != bm.shape or am.shape[0] != am.shape[1]:
        raise DimensionMismatchError(f"need equal square shapes, got {am.shape}, {bm.shape}")
    s = swap_operator(am.shape[0])
    lhs = np.trace(am @ bm)
    rhs = np.trace(kronecker_product(am, bm) @ s)
    return float(abs(lhs - rhs))


def haar_pair_moment_check(
    subspace: Subspace, trials: int, rng: np.random.Generator
) -> float:
    """Max entrywise deviation of the Monte Carlo pair moment from
    Π_RR(1 + S)/(d_R(d_R+1))."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    dim = subspace.ambient_dim
    check_dimension(dim * dim)
    z = rng.standard_normal((trials, subspace.d_R)) + 1j * rng.standard_normal(
        (trials, subspace.d_R)
    )
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    psis = z @ subspace.basis.T
    v = (psis[:, :, None] * psis[:, None, :]).reshape(trials, dim * dim)
    estimate = (v.T @ v.conj()) / trials
    proj = subspace.projector()
    closed = (
        kronecker_product(proj, proj)
        @ (np.eye(dim * dim) + swap_operator(dim))
        / (subspace.d_R * (subspace.d_R + 1))
    )
    return float(np.max(np.abs(estimate - closed)))


# ---------------------------------------------------------------------------
# Counterexample Hamiltonians


@dataclass(frozen=True)
class DiagonalCounterexampleReport:
    max_population_drift: float
    basis_omega_distance: float
    imbalance_check: BoundCheck


@dataclass(frozen=True)
class SpinBathCounterexampleReport:
    field: float
    energy_diff_min: float
    energy_diff_max: float
    omega_distance: float
    min_eigenstate_purity: float


def diagonal_counterexample(
    space: BipartiteSpace,
    rng: np.random.Generator,
    energy_window: tuple[float, float] = (0.0, 1.0),
    n_times: int = 500,
) -> DiagonalCounterexampleReport:
    """Population conservation and initial-state dependence of the diagonal model."""
    from .hamiltonians import diagonal_product_hamiltonian
    from .states import product_state

    h = diagonal_product_hamiltonian(space, energy_window, rng)
    phi_b = haar_random_state(Subspace.full(space.d_B), rng)
    t_max = default_t_max(h, 100.0)
    times = sample_times(t_max, n_times, rng)

    def omega_s_and_drift(psi_s):
        psi = product_state(psi_s, phi_b, space)
        rhos = reduced_states_at_times(psi, h, space, times)
        pops = np.real(np.einsum("nss->ns", rhos))
        drift = float(np.max(np.abs(pops - np.abs(np.asarray(psi_s)) ** 2)))
        omega_s = partial_trace_bath(dephased_time_average(psi, h, check_gaps=False), space)
        return omega_s, drift

    basis0 = np.zeros(space.d_S, dtype=np.complex128)
    basis0[0] = 1.0
    basis1 = np.zeros(space.d_S, dtype=np.complex128)
    basis1[1] = 1.0
    omega0, drift0 = omega_s_and_drift(basis0)
    omega1, drift1 = omega_s_and_drift(basis1)

    psi_a = haar_random_state(Subspace.full(space.d_S), rng)
    psi_b = haar_random_state(Subspace.full(space.d_S), rng)
    omega_a, drift_a = omega_s_and_drift(psi_a)
    omega_b, drift_b = omega_s_and_drift(psi_b)
    imbalance = 0.5 * float(np.sum(np.abs(np.abs(psi_a) ** 2 - np.abs(psi_b) ** 2)))

    return DiagonalCounterexampleReport(
        max_population_drift=max(drift0, drift1, drift_a, drift_b),
        basis_omega_distance=trace_distance(omega0, omega1),
        imbalance_check=BoundCheck.lower(trace_distance(omega_a, omega_b), imbalance),
    )


def spin_bath_counterexample(
    field: float,
    d_B: int,
    rng: np.random.Generator,
    n_times: int = 200,
) -> SpinBathCounterexampleReport:
    """Conserved energy separation between σ_z-eigenstate initializations."""
    from .dynamics import evolve
    from .hamiltonians import spin_bath_hamiltonian
    from .states import product_state

    h, space = spin_bath_hamiltonian(field, d_B, rng)
    dense = h.dense()
    phi_b = haar_random_state(Subspace.full(d_B), rng)
    psi_plus = product_state(np.array([1.0, 0.0]), phi_b, space)
    psi_minus = product_state(np.array([0.0, 1.0]), phi_b, space)

    t_max = default_t_max(h, 100.0)
    times = sample_times(t_max, n_times, rng)
    diffs = np.empty(n_times)
    for i, t in enumerate(times):
        up = evolve(psi_plus, h, t)
        down = evolve(psi_minus, h, t)
        e_up = np.vdot(up, dense @ up).real
        e_down = np.vdot(down, dense @ down).real
        diffs[i] = e_up - e_down

    omega_plus = partial_trace_bath(dephased_time_average(psi_plus, h, check_gaps=False), space)
    omega_minus = partial_trace_bath(dephased_time_average(psi_minus, h, check_gaps=False), space)

    amps = h.eigenbasis.T.reshape(h.dim, 2, d_B)
    reduced = np.einsum("ksb,ktb->kst", amps, amps.conj())
    purities = np.einsum("kst,kts->k", reduced, reduced).real
    return SpinBathCounterexampleReport(
        field=field,
        energy_diff_min=float(np.min(diffs)),
        energy_diff_max=float(np.max(diffs)),
        omega_distance=trace_distance(omega_plus, omega_minus),
        min_eigenstate_purity=float(np.min(purities)),
    )


@dataclass(frozen=True)
class CounterexampleReport:
    diagonal: DiagonalCounterexampleReport
    spin_bath: SpinBathCounterexampleReport


def counterexample_demonstrations(
    space: BipartiteSpace,
    rng: np.random.Generator,
    energy_window: tuple[float, float] = (0.0, 1.0),
    field: float = 50.0,
    n_times: int = 500,
) -> CounterexampleReport:
    """Run both counterexample models with parameters derived from the space."""
    diagonal = diagonal_counterexample(space, rng, energy_window, n_times)
    spin = spin_bath_counterexample(field, space.d_B, rng, max(2, n_times // 2))
    return CounterexampleReport(diagonal=diagonal, spin_bath=spin)
