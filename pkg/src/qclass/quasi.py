"""The quasi-classical signed measure of a state.

``quasi_measure(rho, M)`` weights every atom of the product spectrum by
``Re tr[rho M(atom)]``. The weights sum to one and reproduce Born
probabilities for commuting families, but may be negative otherwise.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadWeights,
    ComplexResidue,
    DimensionMismatch,
    IndexOutOfRange,
    NonCommuting,
    SpaceMismatch,
)
from .hermitian import DensityOperator
from .spectral import BorelFunction, SpectralMeasure, commute, image_groups, pvm_value
from .symproduct import Observable, OperatorMeasure, ProductSpace, sym_product_measure

IMAG_TOL = 1e-10
REPORT_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Real weights on the atoms of a product space, array of ``space.shape``."""

    space: ProductSpace
    weights: np.ndarray

    def __post_init__(self):
        self.weights.setflags(write=False)

    def __getitem__(self, atom) -> float:
        return float(self.weights[self.space.check_atom(atom)])

    def total(self) -> float:
        return float(self.weights.sum())

    def rows(self):
        """``(values, weight)`` pairs in lexicographic atom order."""
        for atom in self.space.atoms():
            yield self.space.values_at(atom), float(self.weights[atom])


@dataclass(frozen=True)
class EventSpec:
    """Conjunction of per-coordinate outcome constraints.

    ``constraints`` maps an observable id to the set of admissible spectral
    indices; ids that are not listed are unconstrained.
    """

    constraints: tuple

    @classmethod
    def of(cls, constraints: Mapping) -> "EventSpec":
        return cls(tuple((ident, frozenset(int(i) for i in sel)) for ident, sel in constraints.items()))

    @classmethod
    def by_value(cls, space: ProductSpace, constraints: Mapping, tol: float = 1e-9) -> "EventSpec":
        """Build from eigenvalues rather than indices."""
        out = {}
        for ident, vals in constraints.items():
            spec = space.spectra[space.position(ident)]
            idx = set()
            for v in vals:
                hits = np.flatnonzero(np.abs(spec - v) <= tol)
                if len(hits) != 1:
                    raise ValueError(f"{v!r} is not a spectral value of id {ident}")
                idx.add(int(hits[0]))
            out[ident] = idx
        return cls.of(out)


@dataclass(frozen=True)
class NegativityReport:
    min_weight: float
    negative_atoms: tuple
    total_variation: float
    is_classical: bool


def _real_trace(rho: np.ndarray, values: np.ndarray) -> np.ndarray:
    # tr[rho V] = sum_ij rho_ij V_ji
    tr = np.einsum("ij,...ji->...", rho, values)
    residue = float(np.max(np.abs(tr.imag))) if tr.size else 0.0
    if residue > IMAG_TOL:
        raise ComplexResidue(residue)
    return np.ascontiguousarray(tr.real)


def quasi_measure(rho: DensityOperator, measure: OperatorMeasure) -> SignedMeasure:
    if rho.dim != measure.dim:
        raise DimensionMismatch(f"state dimension {rho.dim} != operator dimension {measure.dim}")
    return SignedMeasure(measure.space, _real_trace(rho.matrix, measure.values))


def _event_mask(space: ProductSpace, event: EventSpec) -> np.ndarray:
    mask = np.ones(space.shape, dtype=bool)
    for ident, selected in event.constraints:
        pos = space.position(ident)
        if any(not 0 <= k < space.shape[pos] for k in selected):
            raise IndexOutOfRange(f"outcome indices {sorted(selected)} out of range for id {ident}")
        axis_mask = np.zeros(space.shape[pos], dtype=bool)
        axis_mask[sorted(selected)] = True
        shape = [1] * len(space.shape)
        shape[pos] = space.shape[pos]
        mask &= axis_mask.reshape(shape)
    return mask


def event_value(mu: SignedMeasure, event: EventSpec) -> float:
    """Measure of the event: sum of the weights of all atoms satisfying it."""
    return float(mu.weights[_event_mask(mu.space, event)].sum())


def event_value_indicator(mu: SignedMeasure, event: EventSpec) -> float:
    """Same as :func:`event_value`, as an integral of a product of indicators."""
    positions = [(mu.space.position(ident), sel) for ident, sel in event.constraints]
    total = 0.0
    for atom in mu.space.atoms():
        chi = 1.0
        for pos, sel in positions:
            chi *= 1.0 if atom[pos] in sel else 0.0
        total += chi * float(mu.weights[atom])
    return total


def born_joint(rho: DensityOperator, commuting: Sequence[SpectralMeasure], subsets: Sequence[Iterable[int]]) -> float:
    """``tr[rho P_1(B_1) ... P_n(B_n)]`` for mutually commuting observables."""
    if len(commuting) != len(subsets):
        raise ValueError("need one outcome subset per observable")
    for s in commuting:
        if s.dim != rho.dim:
            raise DimensionMismatch(f"observable dimension {s.dim} != state dimension {rho.dim}")
    for i, j in itertools.combinations(range(len(commuting)), 2):
        if not commute(commuting[i], commuting[j]):
            raise NonCommuting((i, j))
    prod = np.eye(rho.dim, dtype=np.complex128)
    for s, sel in zip(commuting, subsets):
        prod = prod @ pvm_value(s, sel)
    return float(_real_trace(rho.matrix, prod[None])[0])


def sym_moment(rho: DensityOperator, observables: Sequence[Observable]) -> float:
    """Integral of the product of coordinate values against the quasi-measure."""
    mu = quasi_measure(rho, sym_product_measure(observables))
    products = np.ones(mu.space.shape)
    for pos, spec in enumerate(mu.space.spectra):
        shape = [1] * len(mu.space.shape)
        shape[pos] = len(spec)
        products = products * np.asarray(spec).reshape(shape)
    return float(np.sum(products * mu.weights))


def negativity_report(mu: SignedMeasure, report_tol: float = REPORT_TOL) -> NegativityReport:
    negative = tuple(
        (atom, float(mu.weights[atom])) for atom in mu.space.atoms() if mu.weights[atom] < -report_tol
    )
    min_weight = float(mu.weights.min())
    return NegativityReport(
        min_weight=min_weight,
        negative_atoms=negative,
        total_variation=float(np.abs(mu.weights).sum()),
        is_classical=min_weight >= -report_tol,
    )


def check_mixture_weights(alphas: Sequence[float]) -> tuple:
    alphas = tuple(float(a) for a in alphas)
    if not alphas or any(not a > 0 for a in alphas) or abs(math.fsum(alphas) - 1.0) > WEIGHT_SUM_TOL:
        raise BadWeights(f"mixture weights must be positive and sum to 1, got {alphas}")
    return alphas


def mix(measures: Sequence[SignedMeasure], alphas: Sequence[float]) -> SignedMeasure:
    """Atomwise convex combination of signed measures over one space."""
    alphas = check_mixture_weights(alphas)
    if len(measures) != len(alphas):
        raise BadWeights(f"{len(measures)} measures but {len(alphas)} weights")
    space = measures[0].space
    for mu in measures[1:]:
        if not mu.space.same_as(space):
            raise SpaceMismatch("all measures must share one product space")
    weights = np.zeros(space.shape)
    for a, mu in zip(alphas, measures):
        weights = weights + a * mu.weights
    return SignedMeasure(space, weights)


def pushforward(mu: SignedMeasure, ident, phi: BorelFunction) -> SignedMeasure:
    """Relabel coordinate ``ident`` by ``phi``, merging atoms that collide.

    The id is kept: the new coordinate is ``phi`` composed with the old one.
    """
    pos = mu.space.position(ident)
    values, groups = image_groups(phi, mu.space.spectra[pos])
    weights = np.stack([mu.weights.take(g, axis=pos).sum(axis=pos) for g in groups], axis=pos)
    spectra = list(mu.space.spectra)
    spectra[pos] = values
    space = ProductSpace(mu.space.ids, mu.space.names, tuple(spectra))
    return SignedMeasure(space, weights)
