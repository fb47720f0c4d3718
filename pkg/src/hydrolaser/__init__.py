"""Hydrogen in an intense circularly polarized laser field.

The time dependence of the circular field is removed exactly by going to a
co-rotating frame.  What remains is a time-independent pseudo-Hamiltonian
that is diagonalized in a truncated basis of hydrogen bound states.  From its
eigenpairs follow time-averaged bound-bound transition probabilities,
photoelectron energies and photoionization cross sections.
"""

from .basis import (
    BasisSet,
    PseudoHamiltonian,
    basis_size,
    build_basis,
    build_pseudo_hamiltonian,
    px_radial_element,
)
from .cache import MatrixCache
from .constants import (
    CODATA,
    GROUND,
    BasisState,
    LaserParams,
    PhysicalConstants,
    amplitude_to_au,
    au_to_amplitude,
    bound_energy,
    intensity_of,
)
from .eigensolver import EigenSolution, diagonalize, ground_state_index, jacobi_eigh
from .errors import AccuracyError, ConvergenceError, DomainError
from .ionization import (
    IonizationChannel,
    continuum_matrix_element,
    cross_section,
    ionization_scan,
    photoelectron_energies,
)
from .specfun import (
    angular_px_coupling,
    coulomb_radial_wave,
    kummer_1f1,
    laplace_product_integral,
)
from .transitions import (
    TransitionTable,
    instantaneous_probability,
    intensity_scan,
    photon_energy_scan,
    transition_matrix,
    transition_probabilities,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "BasisSet",
    "BasisState",
    "CODATA",
    "ConvergenceError",
    "DomainError",
    "EigenSolution",
    "GROUND",
    "IonizationChannel",
    "LaserParams",
    "MatrixCache",
    "PhysicalConstants",
    "PseudoHamiltonian",
    "TransitionTable",
    "amplitude_to_au",
    "angular_px_coupling",
    "au_to_amplitude",
    "basis_size",
    "bound_energy",
    "build_basis",
    "build_pseudo_hamiltonian",
    "continuum_matrix_element",
    "coulomb_radial_wave",
    "cross_section",
    "diagonalize",
    "ground_state_index",
    "instantaneous_probability",
    "intensity_of",
    "intensity_scan",
    "ionization_scan",
    "jacobi_eigh",
    "kummer_1f1",
    "laplace_product_integral",
    "photoelectron_energies",
    "photon_energy_scan",
    "px_radial_element",
    "transition_matrix",
    "transition_probabilities",
]
