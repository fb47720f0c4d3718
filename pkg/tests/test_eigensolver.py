import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hydrolaser import (
    ConvergenceError,
    DomainError,
    LaserParams,
    build_basis,
    build_pseudo_hamiltonian,
    diagonalize,
    ground_state_index,
    jacobi_eigh,
)
from hydrolaser.eigensolver import diagonalize_matrix


def _random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n))
    return (M + M.T) / 2


def test_identity():
    w, V, res, ortho = diagonalize_matrix(np.eye(6))
    np.testing.assert_array_equal(w, np.ones(6))
    np.testing.assert_array_equal(V, np.eye(6))


@pytest.mark.parametrize("a, b", [(0.3, 0.1), (-1.0, 2.5), (0.0, -0.7)])
def test_two_level(a, b):
    w, V, _, _ = diagonalize_matrix(np.array([[a, b], [b, a]]))
    np.testing.assert_allclose(w, sorted([a - abs(b), a + abs(b)]), atol=1e-15)
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(np.abs(V), [[s, s], [s, s]], atol=1e-15)
    # largest component positive, first index wins the tie
    assert np.all(V[0] > 0)


@pytest.mark.parametrize("method", ["lapack", "jacobi"])
def test_random_reconstruction(method):
    H = _random_symmetric(50, 7)
    w, V, res, ortho = diagonalize_matrix(H, method)
    recon = V @ np.diag(w) @ V.T
    assert np.linalg.norm(recon - H) / np.linalg.norm(H) < 1e-10
    assert res <= 1e-10 and ortho <= 1e-10


@pytest.mark.parametrize("n0", [2, 3, 4, 5, 6])
def test_jacobi_cross_check_on_physics_matrices(n0):
    h = build_pseudo_hamiltonian(build_basis(n0), LaserParams(5e-6, 0.296))
    w_lapack = diagonalize(h).energies
    w_jacobi = diagonalize(h, method="jacobi").energies
    np.testing.assert_allclose(w_lapack, w_jacobi, rtol=0, atol=1e-10)


def test_certificate_and_invariants():
    h = build_pseudo_hamiltonian(build_basis(8), LaserParams(5e-6, 0.296))
    sol = diagonalize(h)
    H = h.matrix
    assert len(sol) == len(h.basis)
    assert np.all(np.diff(sol.energies) >= 0)
    assert np.max(np.abs(sol.vectors.T @ sol.vectors - np.eye(len(sol)))) <= 1e-10
    resid = np.linalg.norm(H @ sol.vectors - sol.vectors * sol.energies, axis=0)
    assert np.max(resid) <= 1e-10 * np.linalg.norm(H)
    assert np.sum(sol.energies) == pytest.approx(np.trace(H), rel=1e-9)
    # Gershgorin containment
    radii = np.sum(np.abs(H), axis=1) - np.abs(np.diag(H))
    for E in sol.energies:
        assert np.any(np.abs(E - np.diag(H)) <= radii + 1e-12)


def test_deterministic_bit_identical():
    h = build_pseudo_hamiltonian(build_basis(6), LaserParams(3e-6, 0.5))
    a, b = diagonalize(h), diagonalize(h)
    assert np.array_equal(a.energies, b.energies)
    assert np.array_equal(a.vectors, b.vectors)


def test_degenerate_subspace_canonical():
    """A rotated degenerate eigenspace is brought back to the same canonical basis."""
    H = np.diag([1.0, 1.0, 1.0, 2.0])
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    rotated = Q @ H @ Q.T
    rotated = (rotated + rotated.T) / 2
    w1, V1, _, _ = diagonalize_matrix(rotated)
    w2, V2, _, _ = diagonalize_matrix(rotated.copy())
    np.testing.assert_array_equal(V1, V2)
    # first vector of the cluster has maximal overlap with basis state 0
    proj = V1[:, :3] @ V1[0, :3]
    proj /= np.linalg.norm(proj)
    np.testing.assert_allclose(np.abs(V1[:, 0]), np.abs(proj), atol=1e-12)


def test_degenerate_zero_field_identity():
    sol = diagonalize(build_pseudo_hamiltonian(build_basis(4), LaserParams(0.0, 0.2)))
    # zero field: every eigenvector is a single basis state
    assert np.all(np.isclose(np.abs(sol.vectors).max(axis=0), 1.0))


def test_near_resonance_certificate_holds():
    # photon energy tuned to E_2 - E_1 where the coupled pair is quasi-degenerate
    las = LaserParams.from_au(1e-4, 0.375)
    sol = diagonalize(build_pseudo_hamiltonian(build_basis(5), las))
    assert sol.residual_norm <= 1e-10 and sol.orthogonality_error <= 1e-10


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=2, max_value=12), st.integers(min_value=0, max_value=10_000))
def test_global_sign_convention(n, seed):
    _, V, _, _ = diagonalize_matrix(_random_symmetric(n, seed))
    idx = np.argmax(np.abs(V), axis=0)
    assert np.all(V[idx, np.arange(n)] > 0)


def test_rejects_non_symmetric_and_bad_method():
    with pytest.raises(DomainError):
        diagonalize_matrix(np.array([[1.0, 2.0], [2.000001, 1.0]]))
    with pytest.raises(DomainError):
        diagonalize_matrix(np.eye(2), method="magic")
    with pytest.raises(DomainError):
        diagonalize_matrix(np.ones((2, 3)))


def test_jacobi_reports_convergence_failure():
    with pytest.raises(ConvergenceError) as err:
        jacobi_eigh(_random_symmetric(8, 1), max_sweeps=1)
    assert err.value.diagnostics["sweeps"] == 1


def test_ground_state_zero_field():
    sol = diagonalize(build_pseudo_hamiltonian(build_basis(3), LaserParams(0.0, 0.3)))
    gs = ground_state_index(sol)
    assert sol.energies[gs.index] == -0.5
    assert gs.overlap == 1.0 and not gs.ambiguous


def test_ground_state_overlap_monotone_in_amplitude():
    overlaps = []
    for A_au in (1e-2, 1e-3, 1e-4):
        sol = diagonalize(build_pseudo_hamiltonian(build_basis(5), LaserParams.from_au(A_au, 0.296 / 27.211386245988)))
        overlaps.append(ground_state_index(sol).overlap)
    assert overlaps[0] < overlaps[1] < overlaps[2] <= 1.0
    assert 1 - overlaps[2] < 1e-6


def test_ground_state_sign_flip_invariance():
    sol = diagonalize(build_pseudo_hamiltonian(build_basis(4), LaserParams(5e-6, 0.296)))
    gs = ground_state_index(sol)
    flipped = type(sol)(sol.energies, -sol.vectors, sol.basis, sol.laser, sol.residual_norm, sol.orthogonality_error)
    assert ground_state_index(flipped) == gs


def test_ground_state_ambiguity_warning(caplog):
    # strong field: the 1s component is spread over several dressed states
    sol = diagonalize(build_pseudo_hamiltonian(build_basis(6), LaserParams(4e-5, 5.0)))
    with caplog.at_level(logging.WARNING):
        gs = ground_state_index(sol)
    assert gs.ambiguous and gs.overlap < 0.5
    assert "ambiguous" in caplog.text
    # still returns the best candidate
    assert gs.overlap == np.max(sol.coefficients((1, 0, 0)) ** 2)
