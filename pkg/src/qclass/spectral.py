"""Finite projection-valued measures.

Outcome sets are finite subsets of the spectrum, given as collections of
spectral-point indices. Countable additivity is automatic here since every
spectrum is finite.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

import numpy as np

from .errors import DimensionMismatch, IndexOutOfRange, UndefinedAt

COMMUTE_TOL = 1e-10
COLLISION_TOL = 1e-12

BorelFunction = Union[Callable[[float], float], Mapping[float, float]]


@dataclass(frozen=True, eq=False)
class SpectralMeasure:
    """Distinct eigenvalues (ascending) paired with orthogonal projectors."""

    points: np.ndarray
    projectors: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.float64))
        object.__setattr__(self, "projectors", np.asarray(self.projectors, dtype=np.complex128))
        self.points.setflags(write=False)
        self.projectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.projectors.shape[1]

    def __len__(self):
        return len(self.points)

    def operator(self) -> np.ndarray:
        """Reassemble ``sum_k lambda_k P_k``."""
        return np.einsum("k,kij->ij", self.points, self.projectors)

    def index_of(self, value: float, tol: float = 1e-9) -> int:
        """Index of the spectral point equal to ``value`` within ``tol``."""
        hits = np.flatnonzero(np.abs(self.points - value) <= tol)
        if len(hits) != 1:
            raise IndexOutOfRange(f"{value!r} is not a point of the spectrum {self.points.tolist()}")
        return int(hits[0])


def outcome_subset(measure: SpectralMeasure, selected: Iterable[int]) -> frozenset:
    """Validate a set of spectral indices."""
    out = frozenset(int(i) for i in selected)
    for i in out:
        if not 0 <= i < len(measure):
            raise IndexOutOfRange(f"spectral index {i} out of range for {len(measure)} points")
    return out


def pvm_value(measure: SpectralMeasure, selected: Iterable[int]) -> np.ndarray:
    """Projector ``P(B) = sum_{k in B} P_k``; empty ``B`` gives 0."""
    idx = sorted(outcome_subset(measure, selected))
    if not idx:
        return np.zeros((measure.dim, measure.dim), dtype=np.complex128)
    return measure.projectors[idx].sum(axis=0)


def commute(s1: SpectralMeasure, s2: SpectralMeasure, tol: float = COMMUTE_TOL) -> bool:
    """True iff every projector of ``s1`` commutes with every projector of ``s2``."""
    if s1.dim != s2.dim:
        raise DimensionMismatch(f"dimensions {s1.dim} and {s2.dim} differ")
    for p in s1.projectors:
        for q in s2.projectors:
            if np.max(np.abs(p @ q - q @ p)) > tol:
                return False
    return True


def _evaluate(phi: BorelFunction, points: np.ndarray) -> np.ndarray:
    values = []
    for lam in points:
        try:
            val = phi[float(lam)] if isinstance(phi, Mapping) else phi(float(lam))
        except (KeyError, ValueError, ZeroDivisionError, OverflowError, ArithmeticError):
            raise UndefinedAt(lam) from None
        if val is None or not np.isfinite(val):
            raise UndefinedAt(lam)
        values.append(float(val))
    return np.array(values)


def image_groups(phi: BorelFunction, points: np.ndarray):
    """Group spectral points by their image under ``phi``.

    Returns ``(values, groups)``: the distinct images in ascending order and,
    for each, the indices of the points mapped onto it. Images closer than
    ``COLLISION_TOL`` are identified and labelled by the smallest of them.
    """
    images = _evaluate(phi, points)
    order = np.argsort(images, kind="stable")
    values, groups = [], []
    for k in order:
        if groups and images[k] - values[-1] <= COLLISION_TOL:
            groups[-1].append(int(k))
        else:
            values.append(float(images[k]))
            groups.append([int(k)])
    return np.array(values), [sorted(g) for g in groups]


def apply_function(measure: SpectralMeasure, phi: BorelFunction) -> SpectralMeasure:
    """Spectral measure of ``phi(X)``: ``P_{phi(X)}(B) = P_X(phi^{-1}(B))``."""
    values, groups = image_groups(phi, measure.points)
    projectors = np.array([measure.projectors[g].sum(axis=0) for g in groups])
    return SpectralMeasure(values, projectors)
