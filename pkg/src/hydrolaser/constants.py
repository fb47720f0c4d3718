"""Physical constants, unit conversions and the small value types used everywhere.

Internally everything is in atomic units with the reduced mass of the
electron-proton pair set to one.  At the boundary energies are given in eV
and the vector-potential amplitude in V*s/m.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 values.  Every exported file echoes these."""

    fine_structure_alpha: float = 7.2973525693e-3
    hartree_eV: float = 27.211386245988
    bohr_radius_m: float = 5.29177210903e-11
    hbar_Js: float = 1.054571817e-34
    elementary_charge_C: float = 1.602176634e-19
    vacuum_permittivity: float = 8.8541878128e-12
    speed_of_light: float = 299792458.0

    snapshot: str = "CODATA-2018"

    @property
    def vector_potential_au_SI(self) -> float:
        """Atomic unit of vector potential hbar/(e a0) in V*s/m."""
        return self.hbar_Js / (self.elementary_charge_C * self.bohr_radius_m)

    @property
    def speed_of_light_au(self) -> float:
        return 1.0 / self.fine_structure_alpha

    def as_dict(self) -> dict[str, float | str]:
        return {
            "constants": self.snapshot,
            "fine_structure_alpha": self.fine_structure_alpha,
            "hartree_eV": self.hartree_eV,
            "bohr_radius_m": self.bohr_radius_m,
            "hbar_Js": self.hbar_Js,
            "elementary_charge_C": self.elementary_charge_C,
            "vacuum_permittivity": self.vacuum_permittivity,
            "speed_of_light": self.speed_of_light,
            "vector_potential_au_SI": self.vector_potential_au_SI,
        }

    def header_lines(self) -> list[str]:
        lines = [f"{k}={_fmt(v)}" for k, v in self.as_dict().items()]
        lines.append(f"constants_hash={self.hash()}")
        return lines

    def hash(self) -> str:
        text = ";".join(f"{k}={_fmt(v)}" for k, v in self.as_dict().items())
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _fmt(value):
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


CODATA = PhysicalConstants()


def bound_energy(n: int) -> float:
    """Unperturbed hydrogen level -1/(2 n^2) in hartree (reduced-mass units)."""
    if int(n) != n or n < 1:
        raise DomainError(f"principal quantum number must be an integer >= 1, got {n!r}")
    return -0.5 / (n * n)


def amplitude_to_au(A: float, constants: PhysicalConstants = CODATA) -> float:
    """Vector-potential amplitude in V*s/m to atomic units."""
    if not A >= 0:
        raise DomainError(f"vector-potential amplitude must be >= 0, got {A!r}")
    return A / constants.vector_potential_au_SI


def au_to_amplitude(A_au: float, constants: PhysicalConstants = CODATA) -> float:
    if not A_au >= 0:
        raise DomainError(f"vector-potential amplitude must be >= 0, got {A_au!r}")
    return A_au * constants.vector_potential_au_SI


def ev_to_hartree(E_eV: float, constants: PhysicalConstants = CODATA) -> float:
    return E_eV / constants.hartree_eV


def hartree_to_ev(E_h: float, constants: PhysicalConstants = CODATA) -> float:
    return E_h * constants.hartree_eV


@dataclass(frozen=True)
class LaserParams:
    """Monochromatic circularly polarized field.

    Parameters
    ----------
    amplitude_A : float
        Vector-potential amplitude in V*s/m.
    photon_energy : float
        Photon energy hbar*omega in eV.
    """

    amplitude_A: float
    photon_energy: float
    constants: PhysicalConstants = field(default=CODATA, repr=False, compare=False)

    def __post_init__(self):
        if not self.amplitude_A >= 0:
            raise DomainError(f"amplitude_A must be >= 0, got {self.amplitude_A!r}")
        if not self.photon_energy > 0:
            raise DomainError(f"photon_energy must be > 0 eV, got {self.photon_energy!r}")

    @classmethod
    def from_au(cls, amplitude_au: float, omega_au: float, constants: PhysicalConstants = CODATA):
        """Build from the atomic-unit coupling and photon energy in hartree."""
        return cls(
            au_to_amplitude(amplitude_au, constants),
            hartree_to_ev(omega_au, constants),
            constants,
        )

    @property
    def amplitude_au(self) -> float:
        return amplitude_to_au(self.amplitude_A, self.constants)

    @property
    def omega_au(self) -> float:
        """Photon energy in hartree (equal to the angular frequency in a.u.)."""
        return ev_to_hartree(self.photon_energy, self.constants)

    @property
    def dipole_parameter(self) -> float:
        """k*a0 = omega/c in atomic units."""
        return self.omega_au * self.constants.fine_structure_alpha

    @property
    def intensity_W_per_cm2(self) -> float:
        return intensity_of(self)


def intensity_of(laser: LaserParams) -> float:
    """Cycle-averaged intensity eps0*c*omega^2*A^2 of the circular wave, in W/cm^2."""
    k = laser.constants
    omega = laser.photon_energy * k.elementary_charge_C / k.hbar_Js
    I_SI = k.vacuum_permittivity * k.speed_of_light * (omega * laser.amplitude_A) ** 2
    return I_SI * 1e-4


@dataclass(frozen=True, order=True)
class BasisState:
    """Hydrogen bound state label (n, l, mu)."""

    n: int
    l: int
    mu: int

    def __post_init__(self):
        if self.n < 1 or not (0 <= self.l < self.n) or abs(self.mu) > self.l:
            raise DomainError(f"invalid hydrogen quantum numbers (n, l, mu) = {tuple(self)}")

    def __iter__(self):
        return iter((self.n, self.l, self.mu))

    @property
    def energy(self) -> float:
        return bound_energy(self.n)

    def label(self) -> str:
        return f"{self.n},{self.l},{self.mu}"

    @classmethod
    def parse(cls, text: str) -> "BasisState":
        parts = [p for p in text.replace("(", "").replace(")", "").split(",") if p.strip()]
        if len(parts) != 3:
            raise DomainError(f"state must be given as n,l,mu, got {text!r}")
        try:
            n, l, mu = (int(p) for p in parts)
        except ValueError as exc:
            raise DomainError(f"state must be given as n,l,mu, got {text!r}") from exc
        return cls(n, l, mu)


GROUND = BasisState(1, 0, 0)

# binding energy of the unperturbed ground state, hartree
BINDING_ENERGY = -bound_energy(1)

__all__ = [
    "PhysicalConstants",
    "CODATA",
    "LaserParams",
    "BasisState",
    "GROUND",
    "BINDING_ENERGY",
    "bound_energy",
    "amplitude_to_au",
    "au_to_amplitude",
    "ev_to_hartree",
    "hartree_to_ev",
    "intensity_of",
]
