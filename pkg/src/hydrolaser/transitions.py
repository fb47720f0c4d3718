"""Bound-bound transition probabilities and their scans over photon energy and intensity.

The observed probability is the long-time average of the instantaneous one,

    W(b <- a) = sum_i C_a(i)^2 C_b(i)^2,

which makes the full W matrix doubly stochastic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .basis import build_basis, build_pseudo_hamiltonian
from .constants import CODATA, BasisState, LaserParams
from .eigensolver import EigenSolution, diagonalize
from .errors import DomainError
from .parallel import map_ordered

logger = logging.getLogger(__name__)

DEFAULT_TARGET_NMAX = 4


@dataclass(frozen=True)
class TransitionTable:
    from_state: BasisState
    probabilities: dict
    laser: LaserParams
    n0: int

    def __getitem__(self, state):
        if not isinstance(state, BasisState):
            state = BasisState(*state)
        try:
            return self.probabilities[state]
        except KeyError:
            raise DomainError(f"state {tuple(state)} is not in the basis truncated at n0={self.n0}") from None

    @property
    def total(self) -> float:
        return float(sum(self.probabilities.values()))


def transition_matrix(sol: EigenSolution) -> np.ndarray:
    """Full W matrix, ``W[b, a]`` = probability of a -> b."""
    S = sol.vectors**2
    return S @ S.T


def transition_probabilities(sol: EigenSolution, from_state: BasisState) -> TransitionTable:
    a = sol.basis.position(from_state)
    S = sol.vectors**2
    w = S @ S[a]
    probs = {state: float(w[i]) for i, state in enumerate(sol.basis.states)}
    return TransitionTable(from_state, probs, sol.laser, sol.basis.n0)


def instantaneous_probability(sol: EigenSolution, from_state: BasisState, to_state: BasisState, t):
    """|sum_i C_a(i) C_b(i) exp(-i (E_i - mu_b omega) t)|^2 at time(s) t (atomic units)."""
    ca = sol.coefficients(from_state)
    cb = sol.coefficients(to_state)
    t = np.asarray(t, dtype=float)
    weights = ca * cb
    phase = np.exp(-1j * np.multiply.outer(t, sol.energies - to_state.mu * sol.laser.omega_au))
    amp = phase @ weights
    out = np.abs(amp) ** 2
    return float(out) if out.ndim == 0 else out


def bohr_index(from_state: BasisState, to_state: BasisState, photon_energy_au: float) -> float:
    """(E_n' - E_n) / (hbar omega), reported unrounded."""
    return (to_state.energy - from_state.energy) / photon_energy_au


def default_targets(n0: int, n_max: int = DEFAULT_TARGET_NMAX) -> list[BasisState]:
    basis = build_basis(n0)
    return [s for s in basis.states if s.n <= n_max]


# --------------------------------------------------------------------------
# scans
# --------------------------------------------------------------------------

@dataclass
class ScanRow:
    photon_energy: float
    amplitude_A: float
    intensity: float
    probabilities: dict = field(default_factory=dict)
    eta: dict = field(default_factory=dict)
    residual: float = float("nan")
    ground_overlap: float = float("nan")
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass
class SpectrumTable:
    kind: str
    n0: int
    from_state: BasisState
    targets: list
    rows: list
    fixed: dict

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def column(self, target: BasisState) -> np.ndarray:
        return np.array([r.probabilities.get(target, np.nan) for r in self.rows])

    def off_diagonal(self) -> np.ndarray:
        """Sum of W over targets other than the initial state, per row."""
        return np.array(
            [sum(v for s, v in r.probabilities.items() if s != self.from_state) if r.ok else np.nan for r in self.rows]
        )


def solve(n0: int, laser: LaserParams, cache=None) -> EigenSolution:
    """Build and diagonalize H_ps, through ``cache`` when one is given."""
    if cache is not None:
        hit = cache.load_solution(n0, laser)
        if hit is not None:
            return hit
    basis = build_basis(n0)
    sol = diagonalize(build_pseudo_hamiltonian(basis, laser))
    if cache is not None:
        cache.store_solution(n0, laser, sol)
    return sol


def _scan_point(n0, laser, from_state, targets, cache, full):
    from .eigensolver import ground_state_index

    row = ScanRow(laser.photon_energy, laser.amplitude_A, laser.intensity_W_per_cm2)
    try:
        sol = solve(n0, laser, cache)
        table = transition_probabilities(sol, from_state)
        chosen = sol.basis.states if full else targets
        row.probabilities = {s: table[s] for s in chosen}
        row.eta = {s: bohr_index(from_state, s, laser.omega_au) for s in chosen}
        row.residual = sol.residual_norm
        row.ground_overlap = ground_state_index(sol, from_state).overlap
    except Exception as exc:  # recorded per grid point; the scan continues
        logger.error("grid point A=%g hw=%g failed: %s", laser.amplitude_A, laser.photon_energy, exc)
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _prepare(n0, from_state, targets):
    basis = build_basis(n0)
    basis.position(from_state)
    if targets is None:
        targets = default_targets(n0)
    for t in targets:
        basis.position(t)
    return list(targets)


def photon_energy_scan(
    n0: int,
    A: float,
    photon_grid: Sequence[float],
    from_state: BasisState,
    targets: Sequence[BasisState] | None = None,
    *,
    cache=None,
    workers: int = 1,
    full: bool = False,
    constants=CODATA,
) -> SpectrumTable:
    """W(from -> target) versus photon energy (eV) at fixed amplitude A (V*s/m)."""
    if len(photon_grid) == 0:
        raise DomainError("photon-energy grid is empty")
    targets = _prepare(n0, from_state, targets)
    lasers = [LaserParams(A, float(hw), constants) for hw in photon_grid]
    rows = map_ordered(
        _scan_point, [(n0, las, from_state, targets, cache, full) for las in lasers], workers
    )
    return SpectrumTable("spectrum", n0, from_state, targets, rows, {"amplitude_A": A})


def intensity_scan(
    n0: int,
    photon_energy: float,
    A_grid: Sequence[float],
    from_state: BasisState,
    targets: Sequence[BasisState] | None = None,
    *,
    cache=None,
    workers: int = 1,
    full: bool = False,
    constants=CODATA,
) -> SpectrumTable:
    """W(from -> target) versus amplitude A (V*s/m) at fixed photon energy (eV)."""
    if len(A_grid) == 0:
        raise DomainError("amplitude grid is empty")
    targets = _prepare(n0, from_state, targets)
    lasers = [LaserParams(float(A), photon_energy, constants) for A in A_grid]
    rows = map_ordered(
        _scan_point, [(n0, las, from_state, targets, cache, full) for las in lasers], workers
    )
    return SpectrumTable("intensity", n0, from_state, targets, rows, {"photon_energy": photon_energy})


def loglog_slopes(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Local d ln y / d ln x by centered differences on the grid."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return np.gradient(ly, lx)
