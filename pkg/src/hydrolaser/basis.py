"""Truncated hydrogen basis and the rotating-frame pseudo-Hamiltonian matrix.

In the frame co-rotating with the circular polarization the Hamiltonian is

    H_ps = p^2/2 - 1/r + omega L_z + A p_x + A^2/2          (atomic units)

Its representation in the unperturbed states psi_{n l mu} = i^l R_nl Y_l,mu is
real and symmetric.  The i^l phases are folded into the sign of the radial
element, so no complex numbers appear anywhere.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .constants import BasisState, LaserParams, bound_energy
from .errors import DomainError
from .specfun import angular_px_coupling, hydrogen_norm_squared, laplace_product_integral

DIPOLE_WARN = 1e-2
DIPOLE_MAX = 0.1


@dataclass(frozen=True)
class BasisSet:
    """All bound states with n <= n0 in lexicographic (n, l, mu) order."""

    n0: int
    states: tuple[BasisState, ...]
    index: dict = field(repr=False, compare=False)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __contains__(self, state):
        return state in self.index

    def position(self, state: BasisState) -> int:
        if not isinstance(state, BasisState):
            state = BasisState(*state)
        try:
            return self.index[state]
        except KeyError:
            raise DomainError(f"state {tuple(state)} is not in the basis truncated at n0={self.n0}") from None

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.states])

    @property
    def mus(self) -> np.ndarray:
        return np.array([s.mu for s in self.states])


def basis_size(n0: int) -> int:
    return n0 * (n0 + 1) * (2 * n0 + 1) // 6


def build_basis(n0: int) -> BasisSet:
    if int(n0) != n0 or n0 < 1:
        raise DomainError(f"truncation level must satisfy n0 >= 1, got {n0!r}")
    states = tuple(
        BasisState(n, l, mu) for n in range(1, n0 + 1) for l in range(n) for mu in range(-l, l + 1)
    )
    return BasisSet(int(n0), states, {s: i for i, s in enumerate(states)})


# --------------------------------------------------------------------------
# radial elements
# --------------------------------------------------------------------------

def _laplace_term(p: int, n_t: int, l_t: int, a_s: int, c_s: int, n_s: int) -> Fraction:
    """int_0^inf e^{-(1/n_s+1/n_t) r} r^p F(l_t+1-n_t; 2l_t+2; 2r/n_t) F(a_s; c_s; 2r/n_s) dr, exact."""
    lam_t = Fraction(2, n_t)
    lam_s = Fraction(2, n_s)
    s = Fraction(1, n_s) + Fraction(1, n_t)
    u = p + 1
    value = laplace_product_integral(s / lam_t, u, l_t + 1 - n_t, 2 * l_t + 2, a_s, c_s, lam_s / lam_t)
    return value / lam_t**u


@functools.lru_cache(maxsize=None)
def px_radial_exact(n: int, l: int, n_t: int, l_t: int) -> tuple[Fraction, Fraction]:
    """Radial factor as (squared normalization, rational integral); value = sign*sqrt(first)*second."""
    a, c = l + 1 - n, 2 * l + 2
    p = l_t + l + 2
    total = Fraction(0)
    if a != 0:
        total += Fraction(2 * a, n * c) * _laplace_term(p, n_t, l_t, a + 1, c + 1, n)
    total -= Fraction(1, n) * _laplace_term(p, n_t, l_t, a, c, n)
    if l_t == l - 1:
        total += (2 * l + 1) * _laplace_term(p - 1, n_t, l_t, a, c, n)
    return hydrogen_norm_squared(n, l) * hydrogen_norm_squared(n_t, l_t), total


def px_radial_element(n: int, l: int, n_t: int, l_t: int) -> float:
    """Radial factor of <n_t l_t mu_t| p_x |n l mu> in the i^l-phased basis.

    The matrix element equals ``angular_px_coupling(l, mu, l_t, mu_t) *
    px_radial_element(n, l, n_t, l_t)``.  The radial integral of R_{n_t l_t}
    against the gradient operator acting on R_nl is done analytically through
    the Laplace product integral; the sign carries the (-i) of p = -i grad and
    the i^l phases: -1 for l_t = l + 1, +1 for l_t = l - 1.
    """
    for nn, ll in ((n, l), (n_t, l_t)):
        if nn < 1 or not 0 <= ll < nn:
            raise DomainError(f"not a bound state: n={nn}, l={ll}")
    if abs(l - l_t) != 1:
        return 0.0
    norm2, integral = px_radial_exact(n, l, n_t, l_t)
    sign = -1.0 if l_t == l + 1 else 1.0
    return sign * math.sqrt(norm2) * float(integral)


# --------------------------------------------------------------------------
# pseudo-Hamiltonian
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PseudoHamiltonian:
    basis: BasisSet
    matrix: np.ndarray = field(repr=False)
    laser: LaserParams

    @property
    def n0(self) -> int:
        return self.basis.n0


def check_dipole_limit(laser: LaserParams) -> float:
    ka0 = laser.dipole_parameter
    if ka0 > DIPOLE_MAX:
        raise DomainError(f"dipole limit violated: k*a0 = {ka0:.3g} > {DIPOLE_MAX}")
    if ka0 > DIPOLE_WARN:
        warnings.warn(f"dipole approximation marginal: k*a0 = {ka0:.3g}", RuntimeWarning, stacklevel=3)
    return ka0


@functools.lru_cache(maxsize=8)
def coupling_pattern(n0: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Upper-triangle (row, col, p_x element) triples of the A-independent coupling for a basis at n0."""
    basis = build_basis(n0)
    rows, cols, vals = [], [], []
    for j, src in enumerate(basis.states):
        for l_t in (src.l - 1, src.l + 1):
            if l_t < 0:
                continue
            for mu_t in (src.mu - 1, src.mu + 1):
                if abs(mu_t) > l_t:
                    continue
                ang = angular_px_coupling(src.l, src.mu, l_t, mu_t)
                for n_t in range(l_t + 1, n0 + 1):
                    i = basis.index[BasisState(n_t, l_t, mu_t)]
                    if i <= j:
                        continue
                    value = ang * px_radial_element(src.n, src.l, n_t, l_t)
                    if value == 0.0:  # same-n pairs: p = i[H, r] vanishes between degenerate states
                        continue
                    rows.append(i)
                    cols.append(j)
                    vals.append(value)
    out = (np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp), np.array(vals))
    for arr in out:
        arr.setflags(write=False)
    return out


def build_pseudo_hamiltonian(basis: BasisSet, laser: LaserParams) -> PseudoHamiltonian:
    """Dense real symmetric matrix of H_ps in the unperturbed rotating-frame basis (hartree)."""
    check_dipole_limit(laser)
    A = laser.amplitude_au
    omega = laser.omega_au
    diag = basis.energies + basis.mus * omega + 0.5 * A * A
    H = np.diag(diag)
    if A != 0.0:
        rows, cols, vals = coupling_pattern(basis.n0)
        H[rows, cols] = A * vals
        H[cols, rows] = A * vals
    H.setflags(write=False)
    return PseudoHamiltonian(basis, H, laser)


def unperturbed_energies(basis: BasisSet, laser: LaserParams) -> np.ndarray:
    """Diagonal of H_0' = H_0 + omega L_z, without the A^2/2 shift."""
    return basis.energies + basis.mus * laser.omega_au


__all__ = [
    "BasisSet",
    "PseudoHamiltonian",
    "basis_size",
    "build_basis",
    "build_pseudo_hamiltonian",
    "check_dipole_limit",
    "coupling_pattern",
    "px_radial_element",
    "unperturbed_energies",
    "bound_energy",
]
