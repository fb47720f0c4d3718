"""On-disk cache of assembled matrices and eigen-solutions.

Entries are ``.npz`` files keyed by (n0, A, photon energy, constants hash);
arrays round-trip bit-exactly.  Writes go through a temporary file and an
atomic rename.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path

import numpy as np

from .basis import PseudoHamiltonian, build_basis
from .constants import LaserParams

CACHE_ENV = "HYDROLASER_CACHE"


def cache_key(n0: int, laser: LaserParams) -> str:
    text = f"n0={n0}|A={laser.amplitude_A!r}|hw={laser.photon_energy!r}|constants={laser.constants.hash()}"
    return hashlib.sha256(text.encode()).hexdigest()[:24]


def _atomic_save(path: Path, **arrays) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, **arrays)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class MatrixCache:
    """Directory of cached pseudo-Hamiltonians and their eigen-solutions."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.hits = 0
        self.misses = 0

    @classmethod
    def from_env(cls, default=None):
        directory = os.environ.get(CACHE_ENV) or default
        return cls(directory) if directory else None

    def _path(self, kind: str, n0: int, laser: LaserParams) -> Path:
        return self.directory / f"{kind}-{cache_key(n0, laser)}.npz"

    def _meta(self, n0, laser):
        return dict(
            n0=np.int64(n0),
            amplitude_A=np.float64(laser.amplitude_A),
            photon_energy=np.float64(laser.photon_energy),
            constants_hash=np.array(laser.constants.hash()),
        )

    def _valid(self, data, n0, laser) -> bool:
        return (
            str(data["constants_hash"]) == laser.constants.hash()
            and int(data["n0"]) == n0
            and float(data["amplitude_A"]) == laser.amplitude_A
            and float(data["photon_energy"]) == laser.photon_energy
        )

    def store_matrix(self, h: PseudoHamiltonian) -> Path:
        path = self._path("matrix", h.n0, h.laser)
        _atomic_save(path, matrix=h.matrix, **self._meta(h.n0, h.laser))
        return path

    def load_matrix(self, n0: int, laser: LaserParams) -> PseudoHamiltonian | None:
        path = self._path("matrix", n0, laser)
        if not path.exists():
            self.misses += 1
            return None
        with np.load(path) as data:
            if not self._valid(data, n0, laser):
                self.misses += 1
                return None
            matrix = data["matrix"]
        matrix.setflags(write=False)
        self.hits += 1
        return PseudoHamiltonian(build_basis(n0), matrix, laser)

    def store_solution(self, n0: int, laser: LaserParams, sol) -> Path:
        path = self._path("eigen", n0, laser)
        _atomic_save(
            path,
            energies=sol.energies,
            vectors=sol.vectors,
            residual_norm=np.float64(sol.residual_norm),
            orthogonality_error=np.float64(sol.orthogonality_error),
            **self._meta(n0, laser),
        )
        return path

    def load_solution(self, n0: int, laser: LaserParams):
        from .eigensolver import EigenSolution

        path = self._path("eigen", n0, laser)
        if not path.exists():
            self.misses += 1
            return None
        with np.load(path) as data:
            if not self._valid(data, n0, laser):
                self.misses += 1
                return None
            energies, vectors = data["energies"], data["vectors"]
            residual, ortho = float(data["residual_norm"]), float(data["orthogonality_error"])
        for arr in (energies, vectors):
            arr.setflags(write=False)
        self.hits += 1
        return EigenSolution(energies, vectors, build_basis(n0), laser, residual, ortho)
