"""Photoionization from the dressed ground state.

Channel mu ends with the electron in a continuum state of magnetic quantum
number mu and kinetic energy E_f0 = E_i - mu*omega, where E_i is the
pseudo-energy of the eigenvector adiabatically connected to 1s.  The
cross section, in units of pi a0^2, is

    sigma = 16 alpha v / (k a0 c) * sum_{l >= |mu|} |beta_l|^2,

with v = sqrt(2 E_f0), k = omega/c.  Here beta_l is the partial-wave
amplitude of <psi_f0| p_x |phi_i> over energy-normalized Coulomb waves,
scaled by sqrt(pi/(2v)) so that sigma equals the golden-rule rate divided by
the photon flux.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import BINDING_ENERGY, CODATA, BasisState, LaserParams, hartree_to_ev
from .eigensolver import EigenSolution, GroundStateIndex, ground_state_index
from .errors import AccuracyError, DomainError
from .parallel import map_ordered
from .specfun import (
    angular_px_coupling,
    bound_extent,
    coulomb_grid,
    coulomb_radial_wave,
    hydrogen_gradient_radial,
    simpson_weights,
)

logger = logging.getLogger(__name__)

DEFAULT_MU_WINDOW = (-12, 2)
TAIL_TOL = 1e-6
NORMALIZATION = "energy-normalized Coulomb waves, <E|E'> = delta(E-E'), density of states 1"


@dataclass(frozen=True)
class IonizationChannel:
    mu: int
    E_f0: float  # eV
    eta: float
    is_open: bool
    beta: dict = field(default_factory=dict)
    sigma: float | None = None  # pi a0^2
    tail: float | None = None
    l_cut: int | None = None


def _resolve_index(sol: EigenSolution, index) -> int:
    if index is None:
        return ground_state_index(sol).index
    if isinstance(index, GroundStateIndex):
        return index.index
    return int(index)


def channel_energy_au(sol: EigenSolution, mu: int, index=None) -> float:
    i = _resolve_index(sol, index)
    return float(sol.energies[i]) - mu * sol.laser.omega_au


def photoelectron_energies(
    sol: EigenSolution, laser: LaserParams | None = None, mu_window=DEFAULT_MU_WINDOW, index=None
) -> list[IonizationChannel]:
    """E_f0 = E_i - mu*omega and eta = (E_i + b)/omega - mu for every mu in the window."""
    laser = laser or sol.laser
    i = _resolve_index(sol, index)
    E_i = float(sol.energies[i])
    omega = laser.omega_au
    lo, hi = mu_window
    out = []
    for mu in range(int(lo), int(hi) + 1):
        E_f0 = E_i - mu * omega
        eta = (E_i + BINDING_ENERGY) / omega - mu
        out.append(IonizationChannel(mu, hartree_to_ev(E_f0, laser.constants), eta, E_f0 > 0))
    return out


# --------------------------------------------------------------------------
# continuum matrix elements
# --------------------------------------------------------------------------

@functools.lru_cache(maxsize=64)
def _continuum_table(E: float, l: int, h: float, npts: int) -> np.ndarray:
    u = coulomb_radial_wave(E, l, h * np.arange(npts))
    u.setflags(write=False)
    return u


def radial_grid(n_max: int, E: float) -> np.ndarray:
    return coulomb_grid(E, bound_extent(n_max))


def px_amplitudes(sol: EigenSolution, channel_mu: int, index=None, grid=None, l_max=None) -> dict:
    """A-free partial-wave amplitudes <E_f0 l channel_mu| p_x |phi_i> for l = |mu| .. l_max.

    Contributions come from basis components with mu = channel_mu -+ 1 and
    l_s = l -+ 1; phases follow the same i^l convention as the bound basis.
    """
    i = _resolve_index(sol, index)
    E = channel_energy_au(sol, channel_mu, i)
    if not E > 0:
        raise DomainError(f"channel mu={channel_mu} is closed (E_f0 = {E:.6g} hartree)")
    basis = sol.basis
    n0 = basis.n0
    if grid is None:
        grid = radial_grid(n0, E)
    h = float(grid[1] - grid[0])
    weights = simpson_weights(grid.size, h) * grid
    C = sol.vectors[:, i]
    l_max = n0 if l_max is None else int(l_max)
    out = {}
    for l in range(abs(channel_mu), l_max + 1):
        u = _continuum_table(E, l, h, grid.size)
        wu = weights * u
        total = 0.0
        for l_s in (l - 1, l + 1):
            if l_s < 0 or l_s >= n0:
                continue
            sign = -1.0 if l == l_s + 1 else 1.0
            for mu_s in (channel_mu - 1, channel_mu + 1):
                if abs(mu_s) > l_s:
                    continue
                ang = angular_px_coupling(l_s, mu_s, l, channel_mu)
                for n in range(l_s + 1, n0 + 1):
                    c = C[basis.index[BasisState(n, l_s, mu_s)]]
                    if c == 0.0:
                        continue
                    radial = float(wu @ hydrogen_gradient_radial(n, l_s, l, grid))
                    total += c * sign * ang * radial
        out[l] = total
    return out


def continuum_matrix_element(sol: EigenSolution, channel_mu: int, laser: LaserParams | None = None, *, index=None, grid=None, l_max=None) -> dict:
    """Partial-wave amplitudes of H''_{f0,i} = <psi_f0| A p_x |phi_i> (hartree per unit energy^(1/2))."""
    laser = laser or sol.laser
    A = laser.amplitude_au
    return {l: A * v for l, v in px_amplitudes(sol, channel_mu, index, grid, l_max).items()}


def cross_section(
    sol: EigenSolution, laser: LaserParams | None = None, channel_mu: int = -1, *, index=None, l_cut=None, grid=None
) -> IonizationChannel:
    """Photoionization cross section of one channel, in units of pi a0^2.

    All partial waves allowed by the truncated basis (l <= n0) are summed;
    ``l_cut`` truncates earlier and then the discarded fraction must stay
    below ``TAIL_TOL``.
    """
    laser = laser or sol.laser
    i = _resolve_index(sol, index)
    E = channel_energy_au(sol, channel_mu, i)
    if not E > 0:
        raise DomainError(f"channel mu={channel_mu} is closed (E_f0 = {hartree_to_ev(E):.6g} eV)")
    amps = px_amplitudes(sol, channel_mu, i, grid)
    v = math.sqrt(2 * E)
    beta_scale = math.sqrt(math.pi / (2 * v))
    beta_all = {l: float(beta_scale * m) for l, m in amps.items()}
    total = sum(b * b for b in beta_all.values())
    l_cut = sol.basis.n0 if l_cut is None else int(l_cut)
    beta = {l: b for l, b in beta_all.items() if l <= l_cut}
    kept = sum(b * b for b in beta.values())
    tail = (total - kept) / total if total > 0 else 0.0
    if tail > TAIL_TOL:
        raise AccuracyError(
            f"partial-wave tail {tail:.3g} above {TAIL_TOL:g} at l_cut={l_cut}", tail=tail, l_cut=l_cut
        )
    c = laser.constants.speed_of_light_au
    sigma = float(16 * v * kept / (laser.omega_au * c))
    eta = (float(sol.energies[i]) + BINDING_ENERGY) / laser.omega_au - channel_mu
    return IonizationChannel(
        channel_mu, hartree_to_ev(E, laser.constants), eta, True, beta, sigma, tail, l_cut
    )


def dominant_channel(channels: Sequence[IonizationChannel]) -> IonizationChannel:
    open_ = [c for c in channels if c.is_open and c.sigma is not None]
    if not open_:
        raise DomainError("no open channel with a cross section")
    return max(open_, key=lambda c: c.sigma)


# --------------------------------------------------------------------------
# scans
# --------------------------------------------------------------------------

@dataclass
class IonizationRow:
    amplitude_A: float
    intensity: float
    channels: list = field(default_factory=list)
    ground_overlap: float = float("nan")
    ambiguous: bool = False
    residual: float = float("nan")
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass
class IonizationTable:
    n0: int
    photon_energy: float
    mu_window: tuple
    rows: list

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)

    def channel(self, mu: int) -> list:
        """Per row, the channel with this mu (None if the row failed)."""
        out = []
        for r in self.rows:
            match = [c for c in r.channels if c.mu == mu]
            out.append(match[0] if match else None)
        return out


def _ionization_point(n0, laser, mu_window, cache, with_sigma):
    from .transitions import solve

    row = IonizationRow(laser.amplitude_A, laser.intensity_W_per_cm2)
    try:
        sol = solve(n0, laser, cache)
        gs = ground_state_index(sol)
        row.ground_overlap, row.ambiguous, row.residual = gs.overlap, gs.ambiguous, sol.residual_norm
        for ch in photoelectron_energies(sol, laser, mu_window, gs):
            if ch.is_open and with_sigma:
                ch = cross_section(sol, laser, ch.mu, index=gs)
            row.channels.append(ch)
    except Exception as exc:  # recorded per grid point; the scan continues
        logger.error("ionization point A=%g failed: %s", laser.amplitude_A, exc)
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def ionization_scan(
    n0: int,
    photon_energy: float,
    A_grid: Sequence[float],
    mu_window=DEFAULT_MU_WINDOW,
    *,
    cache=None,
    workers: int = 1,
    with_sigma: bool = True,
    constants=CODATA,
) -> IonizationTable:
    if len(A_grid) == 0:
        raise DomainError("amplitude grid is empty")
    lasers = [LaserParams(float(A), photon_energy, constants) for A in A_grid]
    rows = map_ordered(
        _ionization_point, [(n0, las, tuple(mu_window), cache, with_sigma) for las in lasers], workers
    )
    return IonizationTable(n0, photon_energy, tuple(mu_window), rows)
