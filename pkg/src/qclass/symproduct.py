"""Symmetrized product measures of finitely many observables.

For observables ``X_1..X_n`` the measure assigns to each atom
``(l_1, .., l_n)`` of the product spectrum the operator

    (1/n!) * sum over orderings of P_1({l_1}) ... P_n({l_n}),

which is Hermitian, sums to the identity over all atoms and reduces to the
ordinary joint projection-valued measure when the observables commute.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _backend
from .errors import (
    AtomBudgetExceeded,
    DimensionMismatch,
    DuplicateObservable,
    EmptySubset,
    InvalidAtom,
    InvalidPermutation,
    UnknownId,
    UnregisteredId,
)
from .hermitian import (
    HERMITIAN_TOL,
    HermitianOperator,
    cluster_spectrum,
    eig_hermitian,
    validate_hermitian,
)
from .spectral import SpectralMeasure

DEFAULT_ATOM_BUDGET = 10**6
DEDUP_TOL = 1e-12


def atom_budget() -> int:
    return int(os.environ.get("QCLASS_ATOM_BUDGET", DEFAULT_ATOM_BUDGET))


@dataclass(frozen=True, eq=False)
class Observable:
    id: int
    name: str
    matrix: np.ndarray
    spectral: SpectralMeasure

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


class Registry:
    """Assigns one integer id per distinct operator, in insertion order.

    Matrices equal entrywise within ``dedup_tol`` share an id, so that each
    observable is modelled by exactly one coordinate.
    """

    def __init__(self, dedup_tol: float = DEDUP_TOL):
        self.dedup_tol = dedup_tol
        self._observables: list[Observable] = []
        self._names: dict[str, int] = {}

    def register(self, operator, name: str | None = None) -> Observable:
        if isinstance(operator, SpectralMeasure):
            spectral = operator
            matrix = operator.operator()
        else:
            herm = operator if isinstance(operator, HermitianOperator) else validate_hermitian(operator, HERMITIAN_TOL)
            matrix = herm.matrix
            spectral = None
        if self._observables and matrix.shape != self._observables[0].matrix.shape:
            raise DimensionMismatch(
                f"registry dimension is {self._observables[0].dim}, got {matrix.shape[0]}"
            )
        for obs in self._observables:
            if np.max(np.abs(obs.matrix - matrix)) <= self.dedup_tol:
                if name is not None:
                    self._names.setdefault(name, obs.id)
                return obs
        if spectral is None:
            spectral = cluster_spectrum(eig_hermitian(herm))
        ident = len(self._observables)
        obs = Observable(ident, name if name is not None else f"X{ident}", matrix, spectral)
        self._observables.append(obs)
        self._names.setdefault(obs.name, ident)
        return obs

    def __getitem__(self, key) -> Observable:
        if isinstance(key, str):
            if key not in self._names:
                raise UnregisteredId(f"no observable named {key!r}")
            key = self._names[key]
        if not isinstance(key, (int, np.integer)) or not 0 <= key < len(self._observables):
            raise UnregisteredId(f"no observable with id {key!r}")
        return self._observables[int(key)]

    def __contains__(self, key) -> bool:
        try:
            self[key]
        except UnregisteredId:
            return False
        return True

    def __iter__(self) -> Iterator[Observable]:
        return iter(self._observables)

    def __len__(self) -> int:
        return len(self._observables)

    @property
    def dim(self) -> int:
        return self._observables[0].dim


@dataclass(frozen=True, eq=False)
class ProductSpace:
    """Ordered observable ids with their spectra; atoms are index tuples."""

    ids: tuple
    names: tuple
    spectra: tuple

    def __post_init__(self):
        if len(set(self.ids)) != len(self.ids):
            raise DuplicateObservable(f"ids must be distinct, got {self.ids}")
        n_atoms = int(np.prod([len(s) for s in self.spectra], dtype=np.int64))
        if n_atoms > atom_budget():
            raise AtomBudgetExceeded(n_atoms, atom_budget())

    @classmethod
    def of(cls, observables: Sequence[Observable]) -> "ProductSpace":
        return cls(
            tuple(o.id for o in observables),
            tuple(o.name for o in observables),
            tuple(np.asarray(o.spectral.points) for o in observables),
        )

    @property
    def shape(self) -> tuple:
        return tuple(len(s) for s in self.spectra)

    @property
    def n_atoms(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    def atoms(self) -> Iterator[tuple]:
        """All atoms in lexicographic order of (id position, spectral index)."""
        return itertools.product(*(range(k) for k in self.shape))

    def values_at(self, atom: Sequence[int]) -> tuple:
        return tuple(float(self.spectra[i][k]) for i, k in enumerate(atom))

    def position(self, ident) -> int:
        try:
            return self.ids.index(ident)
        except ValueError:
            raise UnknownId(f"id {ident!r} is not in the space {self.ids}") from None

    def check_atom(self, atom) -> tuple:
        atom = tuple(int(k) for k in atom)
        if len(atom) != len(self.ids) or any(not 0 <= k < n for k, n in zip(atom, self.shape)):
            raise InvalidAtom(f"atom {atom} is not valid for shape {self.shape}")
        return atom

    def same_as(self, other: "ProductSpace") -> bool:
        return (
            self.ids == other.ids
            and self.shape == other.shape
            and all(np.array_equal(a, b) for a, b in zip(self.spectra, other.spectra))
        )

    def subspace(self, positions: Sequence[int]) -> "ProductSpace":
        return ProductSpace(
            tuple(self.ids[p] for p in positions),
            tuple(self.names[p] for p in positions),
            tuple(self.spectra[p] for p in positions),
        )


@dataclass(frozen=True, eq=False)
class OperatorMeasure:
    """Operator values on every atom, array of shape ``(*space.shape, d, d)``."""

    space: ProductSpace
    values: np.ndarray

    def __post_init__(self):
        self.values.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.values.shape[-1]

    def __getitem__(self, atom) -> np.ndarray:
        return self.values[self.space.check_atom(atom)]

    def total(self) -> np.ndarray:
        return self.values.reshape(-1, self.dim, self.dim).sum(axis=0)


def sym_product_measure(observables: Sequence[Observable]) -> OperatorMeasure:
    if not observables:
        raise EmptySubset("need at least one observable")
    dims = {o.dim for o in observables}
    if len(dims) != 1:
        raise DimensionMismatch(f"observables have dimensions {sorted(dims)}")
    space = ProductSpace.of(observables)
    (d,) = dims
    if len(observables) == 1:
        values = np.array(observables[0].spectral.projectors)
    else:
        table = _backend.sym_product_table([o.spectral.projectors for o in observables])
        values = table.reshape(space.shape + (d, d))
    return OperatorMeasure(space, values)


def measure_of_set(measure: OperatorMeasure, atoms: Iterable[Sequence[int]]) -> np.ndarray:
    d = measure.dim
    checked = {measure.space.check_atom(a) for a in atoms}
    out = np.zeros((d, d), dtype=np.complex128)
    for atom in sorted(checked):
        out += measure.values[atom]
    return out


def marginalize(measure: OperatorMeasure, keep: Iterable) -> OperatorMeasure:
    """Sum out every coordinate not in ``keep``; kept ids stay in space order."""
    keep = set(keep)
    if not keep:
        raise EmptySubset("keep must name at least one id")
    for ident in keep:
        measure.space.position(ident)
    kept = [p for p, ident in enumerate(measure.space.ids) if ident in keep]
    dropped = tuple(p for p in range(len(measure.space.ids)) if p not in kept)
    values = measure.values.sum(axis=dropped) if dropped else measure.values.copy()
    return OperatorMeasure(measure.space.subspace(kept), values)


def reorder(measure: OperatorMeasure, perm: Sequence[int]) -> OperatorMeasure:
    """Reorder coordinates: new coordinate ``j`` is old coordinate ``perm[j]``."""
    n = len(measure.space.ids)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise InvalidPermutation(f"{perm} is not a permutation of range({n})")
    values = np.transpose(measure.values, perm + (n, n + 1)).copy()
    return OperatorMeasure(measure.space.subspace(perm), values)


def is_projection_valued(measure: OperatorMeasure, tol: float = 1e-10) -> bool:
    flat = measure.values.reshape(-1, measure.dim, measure.dim)
    return bool(np.all(np.max(np.abs(flat @ flat - flat), axis=(1, 2)) <= tol))
