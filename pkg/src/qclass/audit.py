"""Executable consistency checks used by ``qclass audit`` and audit requests.

Each check returns a :class:`Check` carrying the worst deviation found and
the tolerance it was held to.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .cylinder import CylinderSet, GlobalMeasure, check_additivity, check_well_defined
from .errors import QClassError
from .hermitian import DensityOperator, validate_density
from .quasi import EventSpec, born_joint, event_value, quasi_measure
from .spectral import commute
from .symproduct import Observable, Registry, marginalize, reorder, sym_product_measure

TOL = 1e-9
# beyond this many observables the permutation audit samples instead of enumerating
FULL_PERMUTATIONS_UP_TO = 4


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    deviation: float = 0.0
    tol: float = TOL
    detail: str = ""


def _max_abs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityOperator:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return validate_density(rho / np.trace(rho).real)


def permutations_for(n: int, rng: np.random.Generator | None = None, sample: int = 24) -> list:
    if n <= FULL_PERMUTATIONS_UP_TO:
        return list(itertools.permutations(range(n)))
    rng = rng or np.random.default_rng(0)
    perms = {tuple(range(n)), tuple(reversed(range(n)))}
    perms.update(tuple(np.roll(np.arange(n), k).tolist()) for k in range(1, n))
    while len(perms) < sample:
        perms.add(tuple(int(i) for i in rng.permutation(n)))
    return sorted(perms)


def normalization_check(measure, label: str = "") -> Check:
    dev = _max_abs(measure.total() - np.eye(measure.dim))
    return Check(f"normalization{label}", dev <= TOL, dev)


def product_checks(observables: Sequence[Observable], rng: np.random.Generator | None = None) -> list:
    """Permutation and marginalization consistency of the product measure."""
    full = sym_product_measure(observables)
    checks = [normalization_check(full)]
    n = len(observables)
    worst = 0.0
    perms = permutations_for(n, rng)
    for perm in perms:
        fresh = sym_product_measure([observables[p] for p in perm])
        worst = max(worst, _max_abs(reorder(full, perm).values - fresh.values))
    checks.append(Check("permutation", worst <= TOL, worst, detail=f"{len(perms)} permutations"))
    worst = 0.0
    subsets = [s for k in range(1, n) for s in itertools.combinations(range(n), k)]
    for subset in subsets:
        sub = [observables[p] for p in subset]
        marginal = marginalize(full, [o.id for o in sub])
        worst = max(worst, _max_abs(marginal.values - sym_product_measure(sub).values))
    checks.append(Check("marginalization", worst <= TOL, worst, detail=f"{len(subsets)} subsets"))
    return checks


def cylinder_cases(registry: Registry, ids: Sequence[int], rng: np.random.Generator) -> list:
    """Pairs of cylinder sets covering lifting, permutation and complements.

    Returns ``(kind, c1, c2)`` triples: ``kind`` is ``"same"`` for two
    representations of one set and ``"disjoint"`` for disjoint sets.
    """
    ids = list(ids)
    sizes = {i: len(registry[i].spectral) for i in ids}
    cases = []

    def random_base(sub):
        atoms = list(itertools.product(*(range(sizes[i]) for i in sub)))
        keep = rng.random(len(atoms)) < 0.5
        return frozenset(a for a, k in zip(atoms, keep) if k)

    for i in ids:
        side = frozenset((k,) for k in range(sizes[i]) if rng.random() < 0.5) or frozenset({(0,)})
        c = CylinderSet((i,), side)
        for j in ids:
            if j == i:
                continue
            lifted = frozenset(a + (k,) for a in side for k in range(sizes[j]))
            cases.append(("same", c, CylinderSet((i, j), lifted)))
        complement = frozenset((k,) for k in range(sizes[i])) - side
        if complement:
            cases.append(("disjoint", c, CylinderSet((i,), complement)))
    for i, j in itertools.combinations(ids, 2):
        base = random_base((i, j))
        c = CylinderSet((i, j), base)
        cases.append(("same", c, CylinderSet((j, i), frozenset((b, a) for a, b in base))))
        complement = frozenset(itertools.product(range(sizes[i]), range(sizes[j]))) - base
        if base and complement:
            cases.append(("disjoint", c, CylinderSet((i, j), complement)))
        # a single-coordinate cylinder against a disjoint two-coordinate one
        k0 = int(rng.integers(sizes[i]))
        other = frozenset(a for a in itertools.product(range(sizes[j]), range(sizes[i])) if a[1] != k0)
        if other:
            cases.append(("disjoint", CylinderSet((i,), frozenset({(k0,)})), CylinderSet((j, i), other)))
    if len(ids) >= 3:
        a, b, c3 = ids[:3]
        base = random_base((a, b))
        lifted = frozenset((x, y, z) for x, y in base for z in range(sizes[c3]))
        cases.append(("same", CylinderSet((a, b), base), CylinderSet((c3, b, a), frozenset((z, y, x) for x, y, z in lifted))))
    return cases


def cylinder_checks(g: GlobalMeasure, cases: list) -> list:
    failures = {"same": [], "disjoint": []}
    counts = {"same": 0, "disjoint": 0}
    for n, (kind, c1, c2) in enumerate(cases):
        counts[kind] += 1
        check = check_well_defined if kind == "same" else check_additivity
        try:
            ok = check(g, c1, c2)
        except QClassError as exc:
            ok = False
            failures[kind].append(f"case {n}: {exc}")
            continue
        if not ok:
            failures[kind].append(f"case {n}")
    return [
        Check(
            f"cylinder_{name}",
            not failures[kind],
            float(len(failures[kind])),
            0.0,
            "; ".join(failures[kind]) or f"{counts[kind]} cases",
        )
        for name, kind in (("well_defined", "same"), ("additivity", "disjoint"))
    ]


def state_checks(rho: DensityOperator, observables: Sequence[Observable], label: str = "") -> list:
    """Single-observable positivity and Born recovery for commuting pairs."""
    worst_single, min_single = 0.0, 0.0
    for obs in observables:
        mu = quasi_measure(rho, sym_product_measure([obs]))
        born = np.einsum("ij,kji->k", rho.matrix, obs.spectral.projectors).real
        worst_single = max(worst_single, _max_abs(mu.weights - born))
        min_single = min(min_single, float(mu.weights.min()))
    checks = [
        Check(f"single_born{label}", worst_single <= TOL, worst_single),
        Check(f"single_positive{label}", min_single >= -1e-10, -min_single, 1e-10),
    ]
    worst, pairs = 0.0, 0
    for a, b in itertools.combinations(observables, 2):
        if not commute(a.spectral, b.spectral):
            continue
        pairs += 1
        mu = quasi_measure(rho, sym_product_measure([a, b]))
        for i in range(len(a.spectral)):
            for j in range(len(b.spectral)):
                born = born_joint(rho, [a.spectral, b.spectral], [{i}, {j}])
                worst = max(worst, abs(event_value(mu, EventSpec.of({a.id: {i}, b.id: {j}})) - born))
    if pairs:
        checks.append(Check(f"commuting_born{label}", worst <= TOL, worst, detail=f"{pairs} pairs"))
    return checks


def symmetrized_trace(rho: DensityOperator, matrices: Sequence[np.ndarray]) -> float:
    """``(1/n!) Re tr[rho {X_1 ... X_n}_sym]`` by explicit enumeration of orderings."""
    total = np.zeros_like(rho.matrix)
    for perm in itertools.permutations(range(len(matrices))):
        prod = np.eye(rho.dim, dtype=np.complex128)
        for p in perm:
            prod = prod @ matrices[p]
        total = total + prod
    return float(np.trace(rho.matrix @ total).real / math.factorial(len(matrices)))
