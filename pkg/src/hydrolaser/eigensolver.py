"""Dense symmetric diagonalization with certified residuals.

Production path is LAPACK (``numpy.linalg.eigh``); :func:`jacobi_eigh` is an
independent cyclic Jacobi solver used as a cross-check on small matrices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSet, PseudoHamiltonian
from .constants import GROUND, LaserParams
from .errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
ORTHO_TOL = 1e-10
AMBIGUOUS_OVERLAP = 0.5


@dataclass(frozen=True)
class EigenSolution:
    """Pseudo-energies (ascending, hartree) and real orthonormal eigenvectors.

    ``vectors[a, i]`` is the coefficient C_a(i) of basis state ``a`` in
    eigenvector ``i``.
    """

    energies: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)
    basis: BasisSet
    laser: LaserParams
    residual_norm: float
    orthogonality_error: float

    def __len__(self):
        return self.energies.size

    def coefficients(self, state) -> np.ndarray:
        """C_state(i) for all eigenvectors i."""
        return self.vectors[self.basis.position(state)]


@dataclass(frozen=True)
class GroundStateIndex:
    index: int
    overlap: float
    ambiguous: bool

    def __index__(self):
        return self.index

    def __int__(self):
        return self.index


def _canonicalize(H: np.ndarray, w: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Fix the free rotation inside degenerate eigenspaces and the global signs."""
    scale = max(np.max(np.abs(w)), 1.0)
    tol = 1e-12 * scale
    n = w.size
    V = V.copy()
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[stop - 1] <= tol:
            stop += 1
        if stop - start > 1:
            V[:, start:stop] = _canonical_subspace_basis(V[:, start:stop])
        start = stop
    # largest-magnitude coefficient positive; first index wins ties
    pivots = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[pivots, np.arange(n)])
    signs[signs == 0] = 1.0
    return V * signs


def _canonical_subspace_basis(Q: np.ndarray) -> np.ndarray:
    """Orthonormal basis of span(Q) built from projections of e_0, e_1, ... in order.

    The result does not depend on which orthonormal basis of the subspace
    LAPACK happened to return, and its first vector has the largest possible
    overlap with the lexicographically first basis state touching the
    subspace.
    """
    k = Q.shape[1]
    out = []
    weights = np.sum(Q * Q, axis=1)
    for a in range(Q.shape[0]):
        if weights[a] < 1e-6:
            continue
        v = Q @ Q[a]  # projection of e_a onto the subspace
        for _ in range(2):
            for u in out:
                v = v - (u @ v) * u
        norm = np.linalg.norm(v)
        if norm > 1e-3:
            out.append(v / norm)
            if len(out) == k:
                break
    if len(out) != k:
        return Q
    basis = np.column_stack(out)
    # re-project onto span(Q) so rounding cannot leak out of the eigenspace
    basis = Q @ (Q.T @ basis)
    basis, r = np.linalg.qr(basis)
    return basis * np.sign(np.where(np.diag(r) == 0, 1.0, np.diag(r)))


def _certify(H: np.ndarray, w: np.ndarray, V: np.ndarray) -> tuple[float, float]:
    norm_H = np.linalg.norm(H)
    R = H @ V - V * w
    residual = float(np.max(np.linalg.norm(R, axis=0))) if w.size else 0.0
    ortho = float(np.max(np.abs(V.T @ V - np.eye(w.size)))) if w.size else 0.0
    return residual / max(norm_H, np.finfo(float).tiny), ortho


def diagonalize_matrix(H: np.ndarray, method: str = "lapack") -> tuple[np.ndarray, np.ndarray, float, float]:
    """Eigenpairs of a real symmetric matrix, canonicalized and certified.

    Returns ``(energies, vectors, relative_residual, orthogonality_error)``.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {H.shape}")
    if not np.array_equal(H, H.T):
        raise DomainError("matrix is not exactly symmetric")
    if method == "lapack":
        try:
            w, V = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"LAPACK eigensolver failed: {exc}", size=H.shape[0]) from exc
    elif method == "jacobi":
        w, V = jacobi_eigh(H)
    else:
        raise DomainError(f"unknown eigensolver method {method!r}")
    V = _canonicalize(H, w, V)
    residual, ortho = _certify(H, w, V)
    if residual > RESIDUAL_TOL or ortho > ORTHO_TOL:
        raise ConvergenceError(
            "eigenpairs fail the residual/orthogonality certificate",
            residual=residual, orthogonality=ortho, size=H.shape[0], method=method,
        )
    return w, V, residual, ortho


def diagonalize(h: PseudoHamiltonian, method: str = "lapack") -> EigenSolution:
    w, V, residual, ortho = diagonalize_matrix(h.matrix, method)
    for arr in (w, V):
        arr.setflags(write=False)
    logger.debug("diagonalized n0=%d size=%d residual=%.2e", h.n0, w.size, residual)
    return EigenSolution(w, V, h.basis, h.laser, residual, ortho)


def jacobi_eigh(H: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi rotations; returns ascending eigenvalues and column eigenvectors."""
    A = np.array(H, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if scale == 0:
        return np.zeros(n), V
    for sweep in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2 * apq)
                t = np.sign(theta) / (abs(theta) + np.hypot(theta, 1.0)) if theta else 1.0
                c = 1 / np.sqrt(t * t + 1)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                ap = A[p, :].copy()
                aq = A[q, :].copy()
                A[p, :] = c * ap - s * aq
                A[q, :] = s * ap + c * aq
                vp = V[:, p].copy()
                V[:, p] = c * vp - s * V[:, q]
                V[:, q] = s * vp + c * V[:, q]
    else:
        raise ConvergenceError("Jacobi sweeps did not converge", sweeps=max_sweeps, off_norm=off)
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def ground_state_index(sol: EigenSolution, state=GROUND) -> GroundStateIndex:
    """Eigenvector with the largest weight C^2 on ``state`` (default 1s)."""
    weights = sol.coefficients(state) ** 2
    i = int(np.argmax(weights))
    overlap = float(weights[i])
    ambiguous = overlap < AMBIGUOUS_OVERLAP
    if ambiguous:
        logger.warning("ground-state identification ambiguous: max overlap %.3f < %.1f", overlap, AMBIGUOUS_OVERLAP)
    return GroundStateIndex(i, overlap, ambiguous)
