"""Validated Hermitian and density operators, eigendecomposition and
eigenvalue clustering into a finite spectral measure."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import (
    ConvergenceFailure,
    NegativeEigenvalue,
    NonFinite,
    NotHermitian,
    NotSquare,
    ZeroTrace,
)

HERMITIAN_TOL = 1e-12
DENSITY_TOL = 1e-9
TRACE_RENORM_TOL = 1e-6
CLUSTER_TOL = 1e-9


def _as_square(raw) -> np.ndarray:
    m = np.asarray(raw, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise NotSquare(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite("matrix has NaN or infinite entries")
    return m


def max_norm(m) -> float:
    return float(np.max(np.abs(m))) if np.size(m) else 0.0


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A self-adjoint matrix, stored exactly symmetrized."""

    matrix: np.ndarray
    hermiticity_tol: float = HERMITIAN_TOL

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


def validate_hermitian(raw, tol: float = HERMITIAN_TOL) -> HermitianOperator:
    """Check that ``raw`` is Hermitian within ``tol`` and return the
    symmetrized operator ``(M + M^dagger) / 2``."""
    m = _as_square(raw)
    asym = max_norm(m - m.conj().T)
    if asym > tol:
        raise NotHermitian(asym)
    return HermitianOperator(np.ascontiguousarray((m + m.conj().T) / 2), tol)


def validate_density(raw, tol: float = DENSITY_TOL) -> DensityOperator:
    """Validate a density operator: Hermitian, PSD within ``tol`` and with
    trace within 1e-6 of one, in which case it is renormalized silently."""
    h = validate_hermitian(raw, tol).matrix
    w = eig_hermitian(HermitianOperator(h.copy(), tol)).eigenvalues
    if w[0] < -tol:
        raise NegativeEigenvalue(w[0])
    tr = float(np.trace(h).real)
    if abs(tr - 1.0) > TRACE_RENORM_TOL:
        raise ZeroTrace(tr)
    return DensityOperator(np.ascontiguousarray(h / tr))


def eig_hermitian(h: HermitianOperator) -> EigenDecomposition:
    """Eigendecomposition by cyclic Jacobi rotations, eigenvalues ascending."""
    d = h.dim
    max_sweeps = 100 * d * d
    w, v, sweeps = _backend.jacobi_eigh(h.matrix, max_sweeps)
    if sweeps < 0:
        raise ConvergenceFailure(max_sweeps)
    w.setflags(write=False)
    v.setflags(write=False)
    return EigenDecomposition(w, v, sweeps)


def cluster_spectrum(decomp: EigenDecomposition, cluster_tol: float = CLUSTER_TOL):
    """Merge eigenvalues into distinct spectral points.

    ``cluster_tol`` is relative: consecutive ascending eigenvalues closer than
    ``cluster_tol * max(range, max |lambda|)`` (or 1 if that is zero) share a
    spectral point located at their mean. The projector of a point is the sum
    of the rank-one projectors of its members.
    """
    from .spectral import SpectralMeasure

    w = np.asarray(decomp.eigenvalues)
    v = np.asarray(decomp.eigenvectors)
    scale = max(float(w[-1] - w[0]), float(np.max(np.abs(w))))
    gap_tol = cluster_tol * (scale if scale > 0 else 1.0)
    groups = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[k - 1] <= gap_tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    points = np.array([float(np.mean(w[g])) for g in groups])
    projectors = np.array([v[:, g] @ v[:, g].conj().T for g in groups])
    return SpectralMeasure(points, projectors)


def spectral_measure(raw, tol: float = HERMITIAN_TOL, cluster_tol: float = CLUSTER_TOL):
    """Validate ``raw`` and return its spectral measure in one step."""
    return cluster_spectrum(eig_hermitian(validate_hermitian(raw, tol)), cluster_tol)
