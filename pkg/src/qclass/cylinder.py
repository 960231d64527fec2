"""Global operator measure on cylinder sets over a registry of observables.

A cylinder ``pi^{-1}_{(X_1..X_n)}(F)`` constrains finitely many coordinates
of the (never materialized) space of all spectral assignments. Its value is
the symmetrized product measure of ``X_1..X_n`` evaluated on ``F``; the
audits below check that this does not depend on how the set is written and
that it is additive on disjoint cylinders.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConsistencyViolation, DuplicateObservable, InvalidAtom, NotDisjoint, UnregisteredId
from .hermitian import DensityOperator
from .quasi import _real_trace
from .symproduct import OperatorMeasure, Registry, measure_of_set, sym_product_measure

AUDIT_TOL = 1e-9


@dataclass(frozen=True)
class CylinderSet:
    ids: tuple
    base: frozenset

    @classmethod
    def of(cls, ids: Sequence[int], base: Iterable[Sequence[int]]) -> "CylinderSet":
        return cls(tuple(int(i) for i in ids), frozenset(tuple(int(k) for k in a) for a in base))

    @classmethod
    def rectangle(cls, registry: Registry, sides: dict) -> "CylinderSet":
        """Cylinder over a product of per-id outcome index sets."""
        ids = tuple(sides)
        return cls.of(ids, itertools.product(*(sorted(sides[i]) for i in ids))).validate(registry)

    @classmethod
    def full(cls) -> "CylinderSet":
        return cls((), frozenset({()}))

    def validate(self, registry: Registry) -> "CylinderSet":
        if len(set(self.ids)) != len(self.ids):
            raise DuplicateObservable(f"cylinder ids must be distinct, got {self.ids}")
        sizes = []
        for ident in self.ids:
            if ident not in registry:
                raise UnregisteredId(f"id {ident} is not registered")
            sizes.append(len(registry[ident].spectral))
        for atom in self.base:
            if len(atom) != len(sizes) or any(not 0 <= k < n for k, n in zip(atom, sizes)):
                raise InvalidAtom(f"atom {atom} is invalid over ids {self.ids}")
        return self


def _shape(registry: Registry, ids: Sequence[int]) -> tuple:
    return tuple(len(registry[i].spectral) for i in ids)


def lift(registry: Registry, c: CylinderSet, ids: Sequence[int]) -> frozenset:
    """Base of the same cylinder written over ``ids`` (a superset of ``c.ids``)."""
    ids = tuple(ids)
    missing = set(c.ids) - set(ids)
    if missing:
        raise ValueError(f"cannot lift to {ids}: ids {sorted(missing)} would be dropped")
    positions = [ids.index(i) for i in c.ids]
    return frozenset(
        atom
        for atom in itertools.product(*(range(k) for k in _shape(registry, ids)))
        if tuple(atom[p] for p in positions) in c.base
    )


def canonical(registry: Registry, c: CylinderSet) -> CylinderSet:
    """Sort ids by registry order and drop coordinates left unconstrained."""
    c.validate(registry)
    order = sorted(range(len(c.ids)), key=lambda p: c.ids[p])
    ids = [c.ids[p] for p in order]
    base = {tuple(a[p] for p in order) for a in c.base}
    changed = True
    while changed and ids:
        changed = False
        for pos in range(len(ids)):
            k = len(registry[ids[pos]].spectral)
            rest = {a[:pos] + a[pos + 1:] for a in base}
            if len(base) == len(rest) * k:
                ids.pop(pos)
                base = rest
                changed = True
                break
    if not base:
        return CylinderSet((), frozenset())
    return CylinderSet(tuple(ids), frozenset(base))


def _union_ids(c1: CylinderSet, c2: CylinderSet) -> tuple:
    return tuple(sorted(set(c1.ids) | set(c2.ids)))


def same_set(registry: Registry, c1: CylinderSet, c2: CylinderSet) -> bool:
    ids = _union_ids(c1, c2)
    return lift(registry, c1, ids) == lift(registry, c2, ids)


class GlobalMeasure:
    """Lazy global measure over a registry, memoizing product measures by id set."""

    def __init__(self, registry: Registry):
        self.registry = registry
        self._memo: dict[tuple, OperatorMeasure] = {}
        self._lock = threading.Lock()

    def product_measure(self, ids: Iterable[int]) -> OperatorMeasure:
        key = tuple(sorted(ids))
        hit = self._memo.get(key)
        if hit is None:
            # duplicated work under contention is harmless: results are identical
            hit = sym_product_measure([self.registry[i] for i in key])
            with self._lock:
                hit = self._memo.setdefault(key, hit)
        return hit


def global_operator_value(g: GlobalMeasure, c: CylinderSet) -> np.ndarray:
    c.validate(g.registry)
    d = g.registry.dim
    if not c.ids:
        return np.eye(d, dtype=np.complex128) if () in c.base else np.zeros((d, d), dtype=np.complex128)
    key = tuple(sorted(c.ids))
    where = [c.ids.index(i) for i in key]
    atoms = [tuple(a[p] for p in where) for a in c.base]
    return measure_of_set(g.product_measure(key), atoms)


def global_state_value(g: GlobalMeasure, rho: DensityOperator, c: CylinderSet) -> float:
    return float(_real_trace(rho.matrix, global_operator_value(g, c)[None])[0])


def check_well_defined(g: GlobalMeasure, c1: CylinderSet, c2: CylinderSet, tol: float = AUDIT_TOL) -> bool:
    """False if the cylinders denote different sets; True if they denote the
    same set and receive the same operator value.

    Raises :class:`ConsistencyViolation` when one set gets two values.
    """
    c1.validate(g.registry)
    c2.validate(g.registry)
    if not same_set(g.registry, c1, c2):
        return False
    diff = float(np.max(np.abs(global_operator_value(g, c1) - global_operator_value(g, c2))))
    if diff > tol:
        raise ConsistencyViolation(f"same cylinder set, operator values differ by {diff:.3e}")
    return True


def check_additivity(g: GlobalMeasure, c1: CylinderSet, c2: CylinderSet, tol: float = AUDIT_TOL) -> bool:
    c1.validate(g.registry)
    c2.validate(g.registry)
    ids = _union_ids(c1, c2)
    l1, l2 = lift(g.registry, c1, ids), lift(g.registry, c2, ids)
    if l1 & l2:
        raise NotDisjoint(f"cylinders share {len(l1 & l2)} atoms over ids {ids}")
    union = CylinderSet(ids, l1 | l2)
    lhs = global_operator_value(g, union)
    rhs = global_operator_value(g, c1) + global_operator_value(g, c2)
    return bool(np.max(np.abs(lhs - rhs)) <= tol)
