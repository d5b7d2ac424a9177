import math

import numpy as np
import pytest

from qpc.concurrence import (
    SeparableDominant,
    WeightNormError,
    brute_force_convex_roof,
    build_concurrence_tensor,
    build_tau,
    convex_roof_objective,
    decompose_tensor,
    ensemble_from_left_unitary,
    haar_unitary,
    near_identity_unitary,
    pure_concurrence,
    pure_concurrence_reduced,
    qp_concurrence,
    random_left_unitary,
    singular_value_bound,
    spectral_ensemble,
    verify_tau_membership,
    weighted_lower_bound,
)
from qpc.linops import DimensionError, NotLeftUnitaryError
from qpc.states import (
    DensityMatrix,
    bell_state,
    product_state,
    random_mixed_state,
    random_pure_state,
    werner_state,
    wootters_concurrence_2qubit,
)


# Pure-state concurrence


@pytest.mark.parametrize("d", [2, 3, 4])
def test_pure_concurrence_of_maximally_entangled(d):
    expected = math.sqrt(2 * (1 - 1 / d))
    assert pure_concurrence(bell_state(d).amplitudes, d, d) == pytest.approx(expected)


def test_pure_concurrence_product_and_schmidt():
    assert pure_concurrence(product_state(1, 0, 2, 3).amplitudes, 2, 3) == pytest.approx(0.0, abs=1e-12)
    psi = np.array([math.sqrt(0.9), 0.0, 0.0, math.sqrt(0.1)])
    assert pure_concurrence(psi, 2, 2) == pytest.approx(0.6)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 5)])
def test_four_term_and_reduced_forms_agree(dims, rng):
    d1, d2 = dims
    for _ in range(10):
        psi = random_pure_state(d1 * d2, rng)
        c = pure_concurrence(psi, d1, d2)
        assert pure_concurrence_reduced(psi, d1, d2, reduced=1) == pytest.approx(c, abs=1e-10)
        assert pure_concurrence_reduced(psi, d1, d2, reduced=2) == pytest.approx(c, abs=1e-10)


def test_pure_concurrence_homogeneous(rng):
    psi = random_pure_state(9, rng)
    p = 0.37
    assert pure_concurrence(math.sqrt(p) * psi, 3, 3) == pytest.approx(p * pure_concurrence(psi, 3, 3))


def test_pure_concurrence_dimension_mismatch():
    with pytest.raises(DimensionError):
        pure_concurrence(np.ones(5) / math.sqrt(5), 2, 2)
    with pytest.raises(DimensionError):
        pure_concurrence_reduced(np.ones(4) / 2, 2, 2, reduced=3)


# Spectral ensemble and tensor


def test_spectral_ensemble_reconstructs_state(rng):
    rho = random_mixed_state(2, 3, 4, rng)
    ensemble = spectral_ensemble(rho)

    assert ensemble.n == 4
    assert np.all(np.diff(ensemble.mu) <= 0)
    psi = ensemble.weighted_vectors()
    assert np.allclose(psi.T @ psi.conj(), rho.matrix, atol=1e-10)
    assert ensemble.truncated_weight < 1e-10


def test_tensor_symmetries_and_positivity(rng):
    rho = random_mixed_state(3, 3, 5, rng)
    tensor = build_concurrence_tensor(spectral_ensemble(rho))

    assert tensor.n == 5
    assert tensor.symmetry_violation() <= 1e-10
    flat = tensor.flattened()
    assert np.max(np.abs(flat - flat.conj().T)) <= 1e-10
    assert np.min(np.linalg.eigvalsh(flat)) >= -1e-9


def test_tensor_diagonal_is_squared_concurrence(rng):
    rho = random_mixed_state(2, 3, 3, rng)
    ensemble = spectral_ensemble(rho)
    tensor = build_concurrence_tensor(ensemble)
    for j, psi in enumerate(ensemble.weighted_vectors()):
        assert tensor.a[j, j, j, j].real == pytest.approx(pure_concurrence(psi, 2, 3) ** 2, abs=1e-12)


def test_two_qubit_tensor_has_rank_one(rng):
    for rank in (2, 3, 4):
        rho = random_mixed_state(2, 2, rank, rng)
        eigenvalues = np.sort(np.linalg.eigvalsh(build_concurrence_tensor(spectral_ensemble(rho)).flattened()))
        assert eigenvalues[-1] > 1e-6
        assert abs(eigenvalues[-2]) <= 1e-10


def test_build_tau_is_symmetric(rng):
    rho = random_mixed_state(3, 3, 4, rng)
    tau = build_tau(build_concurrence_tensor(spectral_ensemble(rho))).tau
    assert tau.shape == (4, 4)
    assert np.max(np.abs(tau - tau.T)) <= 1e-12


def test_build_tau_raises_for_separable_dominant():
    rho = product_state(0, 0, 2, 2).density_matrix()
    with pytest.raises(SeparableDominant):
        build_tau(build_concurrence_tensor(spectral_ensemble(rho)))


# qpa


def test_singular_value_bound():
    assert singular_value_bound(np.array([0.9, 0.2, 0.1])) == pytest.approx(0.6)
    assert singular_value_bound(np.array([0.4, 0.3, 0.3])) == 0.0
    assert singular_value_bound(np.zeros(0)) == 0.0


def test_qpa_of_bell_state(bell_rho):
    result = qp_concurrence(bell_rho)
    assert result.value == pytest.approx(1.0, abs=1e-12)
    assert result.rank == 1
    assert result.purity == pytest.approx(1.0)
    assert not result.separable_dominant


def test_qpa_exact_on_pure_states(rng):
    for dims in [(2, 2), (3, 3), (3, 5)]:
        d1, d2 = dims
        psi = random_pure_state(d1 * d2, rng)
        rho = DensityMatrix.from_pure(psi, d1, d2)
        assert qp_concurrence(rho).value == pytest.approx(pure_concurrence(psi, d1, d2), abs=1e-10)


def test_qpa_of_werner_states(werner_08):
    assert qp_concurrence(werner_08).value == pytest.approx(0.7, abs=1e-9)
    assert qp_concurrence(werner_state(0.2)).value == 0.0


def test_qpa_equals_wootters_on_two_qubits(rng):
    for rank in (1, 2, 3, 4):
        for _ in range(5):
            rho = random_mixed_state(2, 2, rank, rng)
            assert qp_concurrence(rho).value == pytest.approx(wootters_concurrence_2qubit(rho), abs=1e-9)


def test_qpa_invariant_under_local_unitaries(rng):
    for dims in [(2, 2), (2, 3), (3, 3)]:
        d1, d2 = dims
        rho = random_mixed_state(d1, d2, 3, rng)
        local = np.kron(haar_unitary(d1, rng), haar_unitary(d2, rng))
        rotated = DensityMatrix(d1, d2, local @ rho.matrix @ local.conj().T)
        assert qp_concurrence(rotated).value == pytest.approx(qp_concurrence(rho).value, abs=1e-9)


def test_qpa_maximally_mixed_is_flagged():
    result = qp_concurrence(DensityMatrix(2, 2, np.eye(4) / 4))
    assert result.value == 0.0
    assert result.dominant_degenerate
    assert result.separable_dominant
    assert result.lambdas.size == 0


def test_qpa_horodecki_positive(horodecki_half):
    result = qp_concurrence(horodecki_half)
    assert result.value > 0.0
    assert result.dominant_weight == pytest.approx(np.max(np.linalg.eigvalsh(horodecki_half.matrix)))


# Tensor decomposition


def test_decompose_tensor_reconstructs(rng):
    rho = random_mixed_state(3, 3, 4, rng)
    tensor = build_concurrence_tensor(spectral_ensemble(rho))
    components = decompose_tensor(tensor)

    for t in components:
        assert np.max(np.abs(t - t.T)) <= 1e-10
    rebuilt = np.einsum("ajk,alm->jklm", np.array(components), np.array(components).conj())
    assert np.max(np.abs(rebuilt - tensor.a)) <= 1e-8


def test_tau_membership_and_weighted_bound(rng):
    rho = random_mixed_state(3, 3, 5, rng)
    tensor = build_concurrence_tensor(spectral_ensemble(rho))
    tau = build_tau(tensor)

    membership = verify_tau_membership(tensor, tau)
    assert membership.is_member
    assert membership.weight_norm == pytest.approx(1.0, abs=1e-10)

    components = decompose_tensor(tensor)
    assert weighted_lower_bound(components, membership.weights) == pytest.approx(qp_concurrence(rho).value, abs=1e-9)


def test_weighted_bound_requires_unit_weights(rng):
    rho = random_mixed_state(2, 3, 3, rng)
    components = decompose_tensor(build_concurrence_tensor(spectral_ensemble(rho)))
    with pytest.raises(WeightNormError):
        weighted_lower_bound(components, 2 * np.ones(len(components)))
    with pytest.raises(DimensionError):
        weighted_lower_bound(components, [1.0] + [0.0] * len(components))


def test_any_unit_weight_bounds_the_convex_roof(rng):
    rho = random_mixed_state(2, 3, 3, rng)
    tensor = build_concurrence_tensor(spectral_ensemble(rho))
    components = decompose_tensor(tensor)
    z = rng.standard_normal(len(components)) + 1j * rng.standard_normal(len(components))
    bound = weighted_lower_bound(components, z / np.linalg.norm(z))
    assert bound <= brute_force_convex_roof(rho, restarts=3, iterations=200, rng=5) + 1e-9


# Left-unitary ensembles and the convex-roof search


def test_ensemble_from_left_unitary_preserves_state(rng):
    rho = random_mixed_state(2, 2, 3, rng)
    ensemble = spectral_ensemble(rho)
    decomposition = ensemble_from_left_unitary(ensemble, random_left_unitary(5, 3, rng))

    assert decomposition.vectors.shape == (5, 4)
    assert np.allclose(decomposition.density_matrix(), rho.matrix, atol=1e-10)
    assert decomposition.weights.sum() == pytest.approx(1.0)


def test_ensemble_from_left_unitary_on_horodecki_state(rng, horodecki_half):
    ensemble = spectral_ensemble(horodecki_half)
    rows = ensemble.n + 2
    decomposition = ensemble_from_left_unitary(ensemble, random_left_unitary(rows, ensemble.n, rng))

    assert decomposition.vectors.shape == (rows, 9)
    assert np.allclose(decomposition.density_matrix(), horodecki_half.matrix, atol=1e-10)
    assert decomposition.weights.sum() == pytest.approx(1.0)


def test_ensemble_from_left_unitary_rejects_bad_v(rng):
    ensemble = spectral_ensemble(random_mixed_state(2, 2, 3, rng))
    with pytest.raises(NotLeftUnitaryError):
        ensemble_from_left_unitary(ensemble, 2 * np.eye(3))
    with pytest.raises(DimensionError):
        ensemble_from_left_unitary(ensemble, np.eye(4, 2))


def test_objective_matches_average_concurrence(rng):
    rho = random_mixed_state(3, 3, 3, rng)
    ensemble = spectral_ensemble(rho)
    tensor = build_concurrence_tensor(ensemble)
    v = random_left_unitary(4, 3, rng)

    expected = ensemble_from_left_unitary(ensemble, v).average_concurrence()
    assert convex_roof_objective(tensor, v) == pytest.approx(expected, abs=1e-10)


def test_unitaries_are_unitary(rng):
    for u in (haar_unitary(4, rng), near_identity_unitary(4, 0.1, rng)):
        assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
    assert np.max(np.abs(near_identity_unitary(4, 1e-4, rng) - np.eye(4))) < 1e-3


def test_brute_force_upper_bounds_qpa(werner_08, horodecki_half):
    for rho in (werner_08, horodecki_half):
        estimate = brute_force_convex_roof(rho, restarts=4, iterations=300, rng=1)
        assert qp_concurrence(rho).value <= estimate + 1e-6


def test_brute_force_exact_on_pure_state(rng):
    psi = random_pure_state(6, rng)
    rho = DensityMatrix.from_pure(psi, 2, 3)
    assert brute_force_convex_roof(rho, restarts=2, iterations=20, rng=0) == pytest.approx(
        pure_concurrence(psi, 2, 3), abs=1e-9
    )


def test_brute_force_deterministic_across_jobs(werner_08):
    serial = brute_force_convex_roof(werner_08, restarts=4, iterations=100, rng=42)
    assert brute_force_convex_roof(werner_08, restarts=4, iterations=100, rng=42) == serial
    assert brute_force_convex_roof(werner_08, restarts=4, iterations=100, rng=42, jobs=2) == pytest.approx(serial, abs=1e-12)


def test_brute_force_never_worse_with_larger_budget(horodecki_half):
    short = brute_force_convex_roof(horodecki_half, restarts=2, iterations=40, rng=3)
    long = brute_force_convex_roof(horodecki_half, restarts=2, iterations=80, rng=3)
    more_restarts = brute_force_convex_roof(horodecki_half, restarts=4, iterations=80, rng=3)

    assert long <= short
    assert more_restarts <= long


def test_brute_force_rejects_budget(werner_08):
    with pytest.raises(ValueError):
        brute_force_convex_roof(werner_08, restarts=0)
    with pytest.raises(ValueError):
        brute_force_convex_roof(werner_08, step_decay=1.5)
