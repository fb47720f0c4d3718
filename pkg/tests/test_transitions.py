import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hydrolaser import (
    GROUND,
    BasisState,
    DomainError,
    LaserParams,
    MatrixCache,
    build_basis,
    build_pseudo_hamiltonian,
    diagonalize,
    instantaneous_probability,
    intensity_scan,
    photon_energy_scan,
    transition_matrix,
    transition_probabilities,
)
from hydrolaser.constants import CODATA, hartree_to_ev
from hydrolaser.eigensolver import EigenSolution, diagonalize_matrix
from hydrolaser.specfun import angular_px_coupling
from hydrolaser.basis import px_radial_element
from hydrolaser.transitions import bohr_index, default_targets, loglog_slopes, solve

from oracles import numeric_time_average, two_level_average

HARTREE = CODATA.hartree_eV


def _solution(n0, A_au, omega_au):
    return solve(n0, LaserParams.from_au(A_au, omega_au))


def _coupling_1s_2pm(A_au):
    """Two-level coupling <2p,-1| A p_x |1s>."""
    return A_au * angular_px_coupling(0, 0, 1, -1) * px_radial_element(1, 0, 2, 1)


def test_zero_field_identity():
    sol = _solution(3, 0.0, 0.3)
    table = transition_probabilities(sol, GROUND)
    for state, w in table.probabilities.items():
        assert w == (1.0 if state == GROUND else 0.0)
    np.testing.assert_array_equal(transition_matrix(sol), np.eye(len(sol)))


def test_symmetry_and_double_stochasticity():
    sol = solve(6, LaserParams(5e-6, 0.296))
    W = transition_matrix(sol)
    np.testing.assert_allclose(W, W.T, rtol=0, atol=1e-15)
    np.testing.assert_allclose(W.sum(axis=0), 1.0, atol=1e-10)
    np.testing.assert_allclose(W.sum(axis=1), 1.0, atol=1e-10)
    assert W.min() >= 0.0 and W.max() <= 1.0 + 1e-15


@settings(max_examples=15, deadline=None)
@given(st.floats(min_value=1e-4, max_value=0.3), st.floats(min_value=0.02, max_value=0.6))
def test_table_sums_to_one(A_au, omega):
    sol = _solution(4, A_au, omega)
    for src in (GROUND, BasisState(2, 1, -1), BasisState(3, 2, 1)):
        table = transition_probabilities(sol, src)
        assert table.total == pytest.approx(1.0, abs=1e-10)
        assert all(0.0 <= w <= 1.0 + 1e-15 for w in table.probabilities.values())


def test_from_state_outside_basis():
    sol = _solution(2, 1e-3, 0.3)
    with pytest.raises(DomainError):
        transition_probabilities(sol, BasisState(3, 0, 0))
    with pytest.raises(DomainError):
        instantaneous_probability(sol, GROUND, BasisState(4, 1, 0), 0.0)


def test_exact_resonance_two_level():
    """omega = E_2 - E_1: 1s and 2p(mu=-1) are degenerate in the rotating frame and mix 50/50."""
    sol = _solution(5, 1e-4, 0.375)
    W = transition_probabilities(sol, GROUND)[BasisState(2, 1, -1)]
    assert W == pytest.approx(0.5, abs=1e-3)
    # the opposite circular component stays far from resonance
    assert transition_probabilities(sol, GROUND)[BasisState(2, 1, 1)] < 1e-6


@pytest.mark.parametrize("detuning_in_V", [0.5, 2.0, 7.0])
def test_two_level_lineshape(detuning_in_V):
    A_au = 1e-4
    V = abs(_coupling_1s_2pm(A_au))
    omega = 0.375 + detuning_in_V * V
    sol = _solution(4, A_au, omega)
    W = transition_probabilities(sol, GROUND)[BasisState(2, 1, -1)]
    assert W == pytest.approx(two_level_average(V, detuning_in_V * V), rel=2e-3)


def test_line_narrows_with_amplitude():
    """Full width at half maximum of the 1s -> 2p(-1) line is 4V, proportional to A."""
    widths = []
    for A_au in (1e-3, 1e-4):
        V = abs(_coupling_1s_2pm(A_au))
        offsets = np.linspace(-8 * V, 8 * V, 161)
        W = np.array(
            [transition_probabilities(_solution(3, A_au, 0.375 + d), GROUND)[BasisState(2, 1, -1)] for d in offsets]
        )
        # the A^2 shifts are common to both levels; any residual Stark shift moves the centre
        above = offsets[W >= 0.25]
        widths.append(above.max() - above.min())
        assert widths[-1] == pytest.approx(4 * V, rel=0.05)
    assert widths[1] < widths[0] / 5


# --------------------------------------------------------------------------
# instantaneous probability
# --------------------------------------------------------------------------

def test_instantaneous_at_t_zero():
    sol = _solution(3, 0.05, 0.2)
    for a in sol.basis.states[:6]:
        for b in sol.basis.states[:6]:
            val = instantaneous_probability(sol, a, b, 0.0)
            assert val == pytest.approx(1.0 if a == b else 0.0, abs=1e-13)


def test_instantaneous_bounded():
    sol = _solution(3, 0.05, 0.2)
    t = np.linspace(0, 2000, 4001)
    w = instantaneous_probability(sol, GROUND, BasisState(2, 1, -1), t)
    assert w.shape == t.shape
    assert np.all(w >= 0) and np.all(w <= 1 + 1e-12)


def test_time_average_converges_to_w():
    sol = _solution(2, 0.08, 0.3)
    target = BasisState(2, 1, -1)
    E = sol.energies
    gaps = np.abs(E[:, None] - E[None, :])[~np.eye(len(E), dtype=bool)]
    shortest_period = 2 * math.pi / gaps.max()
    longest_period = 2 * math.pi / gaps[gaps > 1e-12].min()
    T = 1e4 * max(shortest_period, longest_period)
    samples = int(40 * T / shortest_period) + 1
    avg = numeric_time_average(lambda t: instantaneous_probability(sol, GROUND, target, t), T, samples)
    assert avg == pytest.approx(transition_probabilities(sol, GROUND)[target], abs=1e-4)


def test_shift_invariance_of_w():
    h = build_pseudo_hamiltonian(build_basis(4), LaserParams(5e-6, 0.296))
    w1, V1, r1, o1 = diagonalize_matrix(h.matrix)
    w2, V2, r2, o2 = diagonalize_matrix(h.matrix + 0.37 * np.eye(len(h.basis)))
    S1 = EigenSolution(w1, V1, h.basis, h.laser, r1, o1)
    S2 = EigenSolution(w2, V2, h.basis, h.laser, r2, o2)
    np.testing.assert_allclose(transition_matrix(S1), transition_matrix(S2), atol=1e-10)


# --------------------------------------------------------------------------
# scans
# --------------------------------------------------------------------------

def test_bohr_index_not_rounded():
    eta = bohr_index(GROUND, BasisState(2, 1, -1), 0.2)
    assert eta == pytest.approx(0.375 / 0.2, rel=1e-15)
    assert eta != round(eta)


def test_default_targets():
    targets = default_targets(6)
    assert len(targets) == 1 + 4 + 9 + 16
    assert max(t.n for t in targets) == 4


def test_single_point_scan_matches_direct():
    las = LaserParams(5e-6, 0.296)
    table = photon_energy_scan(4, 5e-6, [0.296], GROUND)
    direct = transition_probabilities(solve(4, las), GROUND)
    row = table.rows[0]
    assert row.ok
    for t in table.targets:
        assert row.probabilities[t] == direct[t]
    assert row.eta[BasisState(3, 1, 0)] == bohr_index(GROUND, BasisState(3, 1, 0), las.omega_au)


def test_scan_records_failures_and_continues():
    table = photon_energy_scan(3, 5e-6, [0.3, 900.0, 0.4], GROUND)
    assert [r.ok for r in table.rows] == [True, False, True]
    assert "dipole" in table.rows[1].error
    assert not table.ok


def test_empty_grid_rejected():
    with pytest.raises(DomainError):
        photon_energy_scan(3, 5e-6, [], GROUND)
    with pytest.raises(DomainError):
        intensity_scan(3, 0.3, [], GROUND)


def test_parallel_scan_deterministic_order():
    grid = np.linspace(0.1, 0.5, 5)
    serial = photon_energy_scan(4, 5e-6, grid, GROUND)
    parallel = photon_energy_scan(4, 5e-6, grid, GROUND, workers=2)
    for a, b in zip(serial.rows, parallel.rows):
        assert a.photon_energy == b.photon_energy
        assert a.probabilities == b.probabilities


def test_full_flag_reports_every_state():
    table = photon_energy_scan(5, 5e-6, [0.3], GROUND, full=True)
    assert len(table.rows[0].probabilities) == 55


def test_reference_spectrum_continuous():
    """A = 5e-6 V s/m: finite, nonzero off-diagonal weight everywhere; no delta-like spikes as the grid refines."""
    ratios = []
    for steps in (28, 56, 111):
        table = photon_energy_scan(8, 5e-6, np.linspace(0.05, 0.6, steps), GROUND)
        off = table.off_diagonal()
        assert np.all(np.isfinite(off)) and np.all(off > 1e-3)
        ratios.append(off.max() / np.median(off))
    assert max(ratios) < 10
    assert ratios[-1] < 1.5 * ratios[0]


def test_intensity_scan_zero_endpoint_identity():
    table = intensity_scan(4, 0.296, [0.0, 1e-6], GROUND)
    first = table.rows[0].probabilities
    assert first[GROUND] == 1.0
    assert all(v == 0.0 for s, v in first.items() if s != GROUND)


@pytest.mark.parametrize("target, order", [(BasisState(2, 1, -1), 1), (BasisState(2, 1, 1), 1), (BasisState(3, 1, -1), 1), (BasisState(3, 2, -2), 2)])
def test_weak_field_slopes_integer(target, order):
    A_si = np.geomspace(1e-5, 1e-3, 7) * CODATA.vector_potential_au_SI
    table = intensity_scan(6, 0.296, A_si, GROUND, [target])
    I = np.array([r.intensity for r in table.rows])
    slopes = loglog_slopes(I, table.column(target))
    assert slopes[0] == pytest.approx(order, abs=1e-3)


def test_strong_field_slope_non_integer():
    A = np.geomspace(1e-6, 5e-6, 12)
    targets = [BasisState(2, 1, -1), BasisState(3, 2, -2), BasisState(3, 1, -1)]
    table = intensity_scan(8, 0.296, A, GROUND, targets)
    I = np.array([r.intensity for r in table.rows])
    found = False
    for t in targets:
        s = loglog_slopes(I, table.column(t))
        if np.any(np.abs(s - np.round(s)) > 0.1):
            found = True
    assert found


# --------------------------------------------------------------------------
# cache
# --------------------------------------------------------------------------

def test_cache_round_trip_bit_exact(tmp_path):
    cache = MatrixCache(tmp_path)
    las = LaserParams(5e-6, 0.296)
    first = solve(5, las, cache)
    assert cache.misses == 1 and cache.hits == 0
    second = solve(5, las, cache)
    assert cache.hits == 1
    assert np.array_equal(first.vectors, second.vectors)
    assert np.array_equal(first.energies, second.energies)
    h = build_pseudo_hamiltonian(build_basis(5), las)
    cache.store_matrix(h)
    back = cache.load_matrix(5, las)
    assert np.array_equal(back.matrix, h.matrix)


def test_cache_rejects_other_constants(tmp_path):
    from hydrolaser.constants import PhysicalConstants

    cache = MatrixCache(tmp_path)
    las = LaserParams(5e-6, 0.296)
    solve(3, las, cache)
    other = LaserParams(5e-6, 0.296, PhysicalConstants(hartree_eV=27.2114))
    assert cache.load_solution(3, other) is None
    assert cache.load_solution(4, las) is None
    assert not list(tmp_path.glob("*.tmp"))


def test_cache_from_env(monkeypatch, tmp_path):
    monkeypatch.setenv("HYDROLASER_CACHE", str(tmp_path))
    assert MatrixCache.from_env().directory == tmp_path
    monkeypatch.delenv("HYDROLASER_CACHE")
    assert MatrixCache.from_env() is None


def test_rotating_frame_lowest_level_is_not_ground():
    """E_n + mu*omega can undercut E_1: the ground state is picked by overlap, not by order."""
    from hydrolaser import ground_state_index

    sol = _solution(3, 0.0, 0.25)
    gs = ground_state_index(sol)
    assert hartree_to_ev(sol.energies[gs.index]) == pytest.approx(-0.5 * HARTREE, rel=1e-15)
    assert sol.energies[0] == pytest.approx(-1 / 18 - 2 * 0.25, rel=1e-14)


def test_table_lookup_by_tuple():
    table = transition_probabilities(_solution(3, 1e-3, 0.3), GROUND)
    assert table[(2, 1, -1)] == table[BasisState(2, 1, -1)]
    with pytest.raises(DomainError):
        table[(4, 0, 0)]
