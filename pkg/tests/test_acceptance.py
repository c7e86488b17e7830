"""Acceptance suite: one test per advertised guarantee, at stated tolerances.

Each criterion prints a single PASS/FAIL line (visible with `pytest -s` or on
failure) in addition to its assertions.
"""

from __future__ import annotations

import math
import time

import numpy as np
import pytest

from eqlab.bipartite import BipartiteSpace
from eqlab.dynamics import energy_coefficients
from eqlab.hamiltonians import (
    diagonal_product_hamiltonian,
    random_spectral_hamiltonian,
)
from eqlab.linalg import hermitian_eigendecomposition, hermitize
from eqlab.runner import ExperimentConfig, derive_seed, emit, run_experiment
from eqlab.states import Subspace, density_matrix, haar_random_state
from eqlab.verifiers import (
    CONSTANTS,
    delta_quantity,
    diagonal_counterexample,
    ergodicity_ks_statistic,
    haar_pair_moment_check,
    spin_bath_counterexample,
    subadditivity_and_bath_checks,
    swap_trace_identity_check,
    theorem1_check,
    theorem2_statistics,
    theorem3_statistics,
    theorem4_tail,
)

MASTER_SEED = 20240901


def report(criterion: str, passed: bool, detail: str) -> None:
    print(f"[{criterion}] {'PASS' if passed else 'FAIL'}: {detail}")


@pytest.fixture(scope="module")
def equilibration_runs():
    """50 seeded instances, d_S=2, d_B cycling over {8, 16, 32}."""
    runs = []
    t0 = time.perf_counter()
    for i in range(50):
        d_b = (8, 16, 32)[i % 3]
        space = BipartiteSpace(2, d_b)
        rng = np.random.default_rng(derive_seed(MASTER_SEED, 0, i))
        h = random_spectral_hamiltonian(space, (0.0, 1.0), rng)
        psi = haar_random_state(Subspace.full(space.d), rng)
        res = theorem1_check(psi, h, space, n_samples=2000, rng=rng)
        sub = subadditivity_and_bath_checks(
            psi, h, space, n_samples=200, rank_samples=2, rng=rng
        )
        runs.append((space, res, sub))
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0, f"equilibration sweep took {elapsed:.1f}s (budget 120s)"
    return runs


def test_criterion_01_time_average_distance_bound(equilibration_runs):
    failures = [r for _, r, _ in equilibration_runs if not r.bath_check.satisfied]
    worst = min(r.bath_check.margin for _, r, _ in equilibration_runs)
    report(
        "criterion 01",
        not failures,
        f"bath bound held in {50 - len(failures)}/50 instances, worst margin {worst:.4f}",
    )
    assert not failures


def test_criterion_02_fluctuation_fractions(equilibration_runs):
    bad = [
        (k, chk.empirical)
        for _, r, _ in equilibration_runs
        for k, chk in r.exceed_checks.items()
        if not chk.satisfied
    ]
    report(
        "criterion 02",
        not bad,
        "exceed_fraction(K) <= 1/K + 0.02 for K in {2, 5, 10} in all 50 instances",
    )
    assert not bad


def test_criterion_03_effective_dimension_concentration():
    rng = np.random.default_rng(derive_seed(MASTER_SEED, 1, 0))
    space = BipartiteSpace(2, 32)
    h = random_spectral_hamiltonian(space, (0.0, 1.0), rng)
    summary = theorem2_statistics(Subspace.full(64), h, 200, rng)
    ok = summary.mean_check.satisfied and summary.tail_frequency == 0.0
    report(
        "criterion 03",
        ok,
        f"mean d_eff = {summary.mean:.2f} (>= 32 - 3SE), tail frequency "
        f"{summary.tail_frequency}, exponential tail bound {summary.tail_check.bound:.3f}"
        f"{' (vacuous)' if summary.tail_check.metadata['vacuous'] else ''}",
    )
    assert summary.mean + 3 * summary.std_error >= 32
    assert summary.tail_frequency == 0.0
    assert summary.tail_check.metadata["vacuous"] == (summary.tail_check.bound > 1)


def test_criterion_04_bath_state_independence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(derive_seed(MASTER_SEED, 2, 0))
    space = BipartiteSpace(2, 64)
    h = random_spectral_hamiltonian(space, (0.0, 1.0), rng)
    psi_s = haar_random_state(Subspace.full(2), rng)
    sub = Subspace.fixed_system(psi_s, space)
    summary = theorem3_statistics(sub, h, space, 100, rng)
    elapsed = time.perf_counter() - t0
    bound = math.sqrt(2 / (4 * 64))
    ok = summary.mean <= bound + 3 * summary.std_error
    report(
        "criterion 04",
        ok,
        f"mean distance {summary.mean:.4f} <= {bound:.4f} + 3SE in {elapsed:.1f}s",
    )
    assert abs(bound - 0.0884) <= 5e-4
    assert ok
    assert elapsed < 180.0


def test_criterion_05a_delta_product_eigenbasis():
    rng = np.random.default_rng(derive_seed(MASTER_SEED, 3, 0))
    space = BipartiteSpace(2, 8)
    h = diagonal_product_hamiltonian(space, (0.0, 1.0), rng)
    delta = delta_quantity(h, Subspace.full(space.d), space)
    ok = abs(delta - 1.0) <= 1e-10
    report("criterion 05a", ok, f"delta = {delta!r} for a product eigenbasis")
    assert ok


def _haar_basis_delta() -> float:
    rng = np.random.default_rng(derive_seed(MASTER_SEED, 3, 1))
    space = BipartiteSpace(2, 32)
    h = random_spectral_hamiltonian(space, (0.0, 1.0), rng)
    return delta_quantity(h, Subspace.full(space.d), space)


def test_criterion_05b_delta_haar_eigenbasis_range():
    delta = _haar_basis_delta()
    # Regression target: measured value for this seed, frozen after the
    # first computation.
    target = 0.5210831589767393
    ok = 0.5 <= delta <= 1.0 and abs(delta - target) <= 1e-12
    report(
        "criterion 05b",
        ok,
        f"delta = {delta!r} in [1/d_S, 1] = [0.5, 1], regression target {target!r}",
    )
    assert 0.5 <= delta <= 1.0
    assert abs(delta - target) <= 1e-12


@pytest.mark.xfail(
    strict=True,
    reason=(
        "delta is a weighted average of subsystem eigenstate purities, each of "
        "which is at least 1/d_S; with d_S = 2 the value can never drop below "
        "0.5, so the advertised 0.2 threshold is unattainable. For a Haar "
        "eigenbasis at d_S=2, d_B=32 the typical value is "
        "(d_S + d_B)/(d_S d_B + 1) ~ 0.52."
    ),
)
def test_criterion_05b_delta_haar_eigenbasis_below_0p2():
    delta = _haar_basis_delta()
    report("criterion 05b (threshold)", delta < 0.2, f"delta = {delta!r} < 0.2")
    assert delta < 0.2


def test_criterion_06_population_conserving_counterexample():
    rng = np.random.default_rng(derive_seed(MASTER_SEED, 4, 0))
    rep = diagonal_counterexample(BipartiteSpace(2, 16), rng, n_times=500)
    ok = rep.max_population_drift <= 1e-10 and abs(rep.basis_omega_distance - 1.0) <= 1e-9
    report(
        "criterion 06",
        ok,
        f"max population drift {rep.max_population_drift:.2e}, "
        f"D(omega_0, omega_1) = {rep.basis_omega_distance!r}",
    )
    assert rep.max_population_drift <= 1e-10
    assert abs(rep.basis_omega_distance - 1.0) <= 1e-9


def test_criterion_07_energy_separation_counterexample():
    rng = np.random.default_rng(derive_seed(MASTER_SEED, 5, 0))
    rep = spin_bath_counterexample(50.0, 8, rng, n_times=200)
    ok = 96.0 <= rep.energy_diff_min and rep.energy_diff_max <= 104.0
    report(
        "criterion 07",
        ok,
        f"energy difference in [{rep.energy_diff_min:.2f}, {rep.energy_diff_max:.2f}] "
        f"subset of [96, 104] over 200 sampled times",
    )
    assert 96.0 <= rep.energy_diff_min
    assert rep.energy_diff_max <= 104.0


def test_criterion_08_operator_identities():
    rng = np.random.default_rng(derive_seed(MASTER_SEED, 6, 0))
    swap_dev = 0.0
    for _ in range(100):
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        swap_dev = max(swap_dev, swap_trace_identity_check(a, b))
    dev_small = haar_pair_moment_check(Subspace.full(4), 10_000, rng)
    dev_large = haar_pair_moment_check(Subspace.full(4), 40_000, rng)
    ratio = dev_large / dev_small
    ok = swap_dev <= 1e-10 and dev_small <= 5 / math.sqrt(10_000) and 0.25 <= ratio <= 1.0
    report(
        "criterion 08",
        ok,
        f"swap deviation {swap_dev:.2e}; pair-moment deviation {dev_small:.4f} at 1e4 "
        f"trials, x{ratio:.2f} at 4e4 (expected ~0.5, factor-2 window)",
    )
    assert swap_dev <= 1e-10
    assert dev_small <= 5 / math.sqrt(10_000)
    assert 0.25 <= ratio <= 1.0


def test_criterion_09_subadditivity_and_bath_bounds(equilibration_runs):
    bad = [
        s
        for _, _, s in equilibration_runs
        if not (s.renyi_check.satisfied and s.bath_deff_check.satisfied)
    ]
    report(
        "criterion 09",
        not bad,
        "purity subadditivity and bath d_eff <= d_S held in all 50 instances",
    )
    assert not bad


def test_criterion_10_phase_sampling_ergodicity():
    rng = np.random.default_rng(derive_seed(MASTER_SEED, 7, 0))
    space = BipartiteSpace(2, 32)
    h = random_spectral_hamiltonian(space, (0.0, 1.0), rng)
    psi = haar_random_state(Subspace.full(space.d), rng)
    ks = ergodicity_ks_statistic(psi, h, space, n_samples=2000, rng=rng)
    tail = theorem4_tail(energy_coefficients(psi, h), h, space, 0.2, 2000, rng)
    tail_ok = tail.satisfied or tail.metadata["vacuous"]
    ok = ks <= 0.05 and tail_ok
    report(
        "criterion 10",
        ok,
        f"KS statistic {ks:.4f} <= 0.05; tail frequency {tail.empirical} vs bound "
        f"{tail.bound:.3f}{' (vacuous)' if tail.metadata['vacuous'] else ''}",
    )
    assert ks <= 0.05
    if tail.bound < 1:
        assert tail.satisfied
    else:
        assert tail.metadata["vacuous"]


def test_criterion_11_kernel_correctness():
    rng = np.random.default_rng(derive_seed(MASTER_SEED, 8, 0))
    worst = 0.0
    for _ in range(100):
        g = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        m = hermitize(g)
        eig = hermitian_eigendecomposition(m)
        rebuilt = (eig.eigenvectors * eig.eigenvalues) @ eig.eigenvectors.conj().T
        worst = max(worst, np.linalg.norm(rebuilt - m) / np.linalg.norm(m))

    from eqlab.bipartite import partial_trace_bath, partial_trace_system

    space = BipartiteSpace(3, 5)
    rho = density_matrix(haar_random_state(Subspace.full(space.d), rng))
    oracle_s = np.zeros((3, 3), dtype=np.complex128)
    oracle_b = np.zeros((5, 5), dtype=np.complex128)
    for s in range(3):
        for sp in range(3):
            for b in range(5):
                oracle_s[s, sp] += rho[s * 5 + b, sp * 5 + b]
    for b in range(5):
        for bp in range(5):
            for s in range(3):
                oracle_b[b, bp] += rho[s * 5 + b, s * 5 + bp]
    dev_b = np.max(np.abs(partial_trace_bath(rho, space) - oracle_s))
    dev_s = np.max(np.abs(partial_trace_system(rho, space) - oracle_b))
    ok = worst <= 1e-9 and dev_b <= 1e-12 and dev_s <= 1e-12
    report(
        "criterion 11",
        ok,
        f"worst eigensolver reconstruction {worst:.2e} (<= 1e-9); partial-trace "
        f"oracle deviations {dev_b:.2e}, {dev_s:.2e} (<= 1e-12)",
    )
    assert worst <= 1e-9
    assert dev_b <= 1e-12 and dev_s <= 1e-12


def test_criterion_12_reproducible_output(tmp_path):
    cfg = ExperimentConfig.from_dict(
        {
            "experiment": "thm1",
            "d_S": 2,
            "d_B": [8],
            "trials": 3,
            "time_sampling": {"t_max_factor": 1e3, "n_samples": 400},
            "master_seed": MASTER_SEED,
        }
    )
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    emit(run_experiment(cfg), "csv", str(pa))
    emit(run_experiment(cfg), "csv", str(pb))
    identical = pa.read_bytes() == pb.read_bytes()
    report("criterion 12", identical, "re-run with the same config is byte-identical")
    assert identical


def test_constants_sanity():
    assert abs(CONSTANTS.c - math.log(2) ** 2 / (72 * math.pi**3)) <= 1e-18
