"""Scenario files: loading, validation and request execution.

A scenario is a JSON document::

    {
      "name": "pauli-triple",
      "dim": 2,
      "observables": {"X": {"pauli": "X"}, "Z": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]},
      "states": {"up": {"vector": [[1, 0], [0, 0]]}, "b": {"bloch": [0, 0, 1]}},
      "requests": [{"kind": "table", "state": "b", "observables": ["X", "Z"]}]
    }

Matrices are row-major lists of rows whose entries are ``[re, im]`` pairs
(a bare number is read as a real entry).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import audit
from .cylinder import GlobalMeasure
from .errors import DanglingReference, ParseError, QClassError, ValidationError
from .hermitian import DensityOperator, validate_density, validate_hermitian
from .quasi import (
    EventSpec,
    born_joint,
    check_mixture_weights,
    event_value,
    mix,
    negativity_report,
    quasi_measure,
    sym_moment,
)
from .spectral import commute
from .symproduct import Observable, Registry, marginalize, sym_product_measure

BUILTINS = ("pauli-triple", "singlet-chsh", "mixture-demo", "ghz")
REQUEST_KINDS = ("table", "event", "marginal", "moment", "chsh", "negativity", "audit")
EXPECT_TOL = 1e-9

PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


@dataclass
class Scenario:
    name: str
    dim: int
    registry: Registry
    observables: dict
    states: dict
    mixtures: dict = field(default_factory=dict)
    requests: list = field(default_factory=list)


def _matrix(spec, what: str) -> np.ndarray:
    try:
        rows = [[complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e) for e in row] for row in spec]
        return np.array(rows, dtype=np.complex128)
    except (TypeError, ValueError, IndexError) as exc:
        raise ValidationError(what, f"malformed matrix: {exc}") from None


def _vector(spec, what: str) -> np.ndarray:
    try:
        return np.array([complex(e[0], e[1]) if isinstance(e, (list, tuple)) else complex(e) for e in spec])
    except (TypeError, ValueError, IndexError) as exc:
        raise ValidationError(what, f"malformed vector: {exc}") from None


def _operator(spec, name: str) -> np.ndarray:
    if isinstance(spec, list):
        return _matrix(spec, name)
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValidationError(name, "observable must be a matrix or a one-key shorthand object")
    ((key, arg),) = spec.items()
    if key == "matrix":
        return _matrix(arg, name)
    if key == "pauli":
        if not isinstance(arg, str) or not arg or set(arg) - set(PAULI):
            raise ValidationError(name, f"bad Pauli string {arg!r}")
        out = np.eye(1, dtype=np.complex128)
        for ch in arg:
            out = np.kron(out, PAULI[ch])
        return out
    if key == "spin":
        # spin observable in the x-z plane at angle theta from the z axis
        theta = float(arg)
        return math.cos(theta) * PAULI["Z"] + math.sin(theta) * PAULI["X"]
    if key == "kron":
        out = np.eye(1, dtype=np.complex128)
        for factor in arg:
            out = np.kron(out, PAULI[factor] if isinstance(factor, str) and factor in PAULI else _operator(factor, name))
        return out
    raise ValidationError(name, f"unknown observable shorthand {key!r}")


def _state(spec, name: str, dim: int) -> np.ndarray:
    if isinstance(spec, list):
        return _matrix(spec, name)
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ValidationError(name, "state must be a matrix or a one-key shorthand object")
    ((key, arg),) = spec.items()
    if key == "matrix":
        return _matrix(arg, name)
    if key == "bloch":
        if dim != 2:
            raise ValidationError(name, "Bloch shorthand is only valid at dim 2")
        x, y, z = (float(v) for v in arg)
        if x * x + y * y + z * z > 1 + 1e-12:
            raise ValidationError(name, "Bloch vector longer than 1")
        return (PAULI["I"] + x * PAULI["X"] + y * PAULI["Y"] + z * PAULI["Z"]) / 2
    if key == "vector":
        psi = _vector(arg, name)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValidationError(name, "zero state vector")
        psi = psi / norm
        return np.outer(psi, psi.conj())
    raise ValidationError(name, f"unknown state shorthand {key!r}")


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object")
    try:
        dim = int(doc["dim"])
        obs_specs = doc["observables"]
        state_specs = doc.get("states", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"missing or malformed field {exc}") from None
    registry = Registry()
    observables = {}
    for name, spec in obs_specs.items():
        matrix = _operator(spec, name)
        if matrix.shape != (dim, dim):
            raise ValidationError(name, f"shape {matrix.shape} does not match dim {dim}")
        try:
            observables[name] = registry.register(validate_hermitian(matrix), name)
        except QClassError as exc:
            raise ValidationError(name, exc) from None
    states, mixtures = {}, {}
    for name, spec in state_specs.items():
        if isinstance(spec, dict) and set(spec) == {"mixture"}:
            mixtures[name] = spec["mixture"]
            continue
        matrix = _state(spec, name, dim)
        if matrix.shape != (dim, dim):
            raise ValidationError(name, f"shape {matrix.shape} does not match dim {dim}")
        try:
            states[name] = validate_density(matrix)
        except QClassError as exc:
            raise ValidationError(name, exc) from None
    resolved_mixtures = {}
    for name, parts in mixtures.items():
        comps, alphas = [], []
        for part in parts:
            if part.get("state") not in states:
                raise DanglingReference(part.get("state"))
            comps.append(part["state"])
            alphas.append(part["weight"])
        try:
            alphas = check_mixture_weights(alphas)
        except QClassError as exc:
            raise ValidationError(name, exc) from None
        rho = sum(a * states[c].matrix for a, c in zip(alphas, comps))
        states[name] = validate_density(rho)
        resolved_mixtures[name] = list(zip(comps, alphas))
    requests = list(doc.get("requests", []))
    for req in requests:
        _check_request(req, observables, states)
    return Scenario(str(doc.get("name", "scenario")), dim, registry, observables, states, resolved_mixtures, requests)


def _check_request(req, observables, states):
    kind = req.get("kind")
    if kind not in REQUEST_KINDS:
        raise ParseError(f"unknown request kind {kind!r}")
    names = list(req.get("observables", []))
    names += list(req.get("keep", [])) + list(req.get("constraints", {}))
    names += list(req.get("A", [])) + list(req.get("B", []))
    for n in names:
        if n not in observables:
            raise DanglingReference(n)
    if kind != "audit" and req.get("state") not in states:
        raise DanglingReference(req.get("state"))


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    return parse_scenario(doc)


def builtin_text(name: str) -> str:
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")
    return resources.files("qclass").joinpath("builtins", f"{name}.json").read_text()


def load_builtin(name: str) -> Scenario:
    return parse_scenario(json.loads(builtin_text(name)))


# -- request execution --------------------------------------------------------


def _collection(sc: Scenario, names) -> list:
    return [sc.observables[n] for n in names]


def _table(mu, names) -> dict:
    return {
        "columns": list(names) + ["weight"],
        "rows": [list(values) + [weight] for values, weight in mu.rows()],
    }


def _expect(req, report) -> None:
    if "expect" not in req:
        return
    key = req.get("field", "value")
    got = report[key]
    tol = float(req.get("tol", EXPECT_TOL))
    dev = abs(got - float(req["expect"]))
    report["checks"].append(audit.Check(f"expect_{key}", dev <= tol, dev, tol))


def run_request(sc: Scenario, req: dict, seed: int = 0) -> dict:
    kind = req["kind"]
    report: dict[str, Any] = {"kind": kind, "checks": []}
    if "state" in req:
        report["state"] = req["state"]
    rho = sc.states.get(req.get("state"))
    if kind in ("table", "negativity", "marginal", "moment", "event"):
        names = req["observables"]
        report["observables"] = list(names)
        obs = _collection(sc, names)
        measure = sym_product_measure(obs)
        mu = quasi_measure(rho, measure)
        report["checks"].append(audit.normalization_check(measure))
        dev = abs(mu.total() - 1.0)
        report["checks"].append(audit.Check("weights_sum_to_one", dev <= audit.TOL, dev))
    if kind == "table":
        report.update(_table(mu, names))
        if req.get("state") in sc.mixtures:
            report["checks"].append(_mixture_check(sc, req["state"], measure, mu))
    elif kind == "negativity":
        neg = negativity_report(mu)
        report["min_weight"] = neg.min_weight
        report["total_variation"] = neg.total_variation
        report["is_classical"] = neg.is_classical
        report["negative_atoms"] = [list(mu.space.values_at(a)) + [w] for a, w in neg.negative_atoms]
        report["value"] = neg.min_weight
    elif kind == "marginal":
        keep = req["keep"]
        kept_ids = {sc.observables[n].id for n in keep}
        marginal = marginalize(measure, kept_ids)
        mu_m = quasi_measure(rho, marginal)
        direct = quasi_measure(rho, sym_product_measure([o for o in obs if o.id in kept_ids]))
        dev = float(np.max(np.abs(mu_m.weights - direct.weights)))
        report["checks"].append(audit.Check("marginal_consistency", dev <= audit.TOL, dev))
        report.update(_table(mu_m, [n for n in names if sc.observables[n].id in kept_ids]))
    elif kind == "moment":
        report["value"] = sym_moment(rho, obs)
        direct = audit.symmetrized_trace(rho, [o.matrix for o in obs])
        dev = abs(report["value"] - direct)
        report["direct"] = direct
        report["checks"].append(audit.Check("moment_identity", dev <= audit.TOL, dev))
    elif kind == "event":
        constraints = {sc.observables[n].id: vals for n, vals in req.get("constraints", {}).items()}
        event = EventSpec.by_value(mu.space, constraints)
        report["constraints"] = {n: list(v) for n, v in req.get("constraints", {}).items()}
        report["value"] = event_value(mu, event)
        constrained = [sc.observables[n] for n in req.get("constraints", {})]
        if constrained and all(
            commute(a.spectral, b.spectral) for a, b in itertools.combinations(constrained, 2)
        ):
            subsets = [dict(event.constraints)[o.id] for o in constrained]
            born = born_joint(rho, [o.spectral for o in constrained], subsets)
            report["born"] = born
            dev = abs(born - report["value"])
            report["checks"].append(audit.Check("born_recovery", dev <= audit.TOL, dev))
    elif kind == "chsh":
        report.update(run_chsh(sc, req, rho))
    elif kind == "audit":
        report.update(run_audit(sc, req, seed))
    _expect(req, report)
    return report


def _mixture_check(sc, name, measure, mu) -> audit.Check:
    parts = sc.mixtures[name]
    mixed = mix([quasi_measure(sc.states[c], measure) for c, _ in parts], [a for _, a in parts])
    dev = float(np.max(np.abs(mixed.weights - mu.weights)))
    return audit.Check("mixture_linearity", dev <= 1e-10, dev, 1e-10)


def run_chsh(sc: Scenario, req: dict, rho: DensityOperator) -> dict:
    """CHSH value ``S = E11 + E12 + E21 - E22`` from quasi-measure correlators."""
    a_names, b_names = req["A"], req["B"]
    if len(a_names) != 2 or len(b_names) != 2:
        raise ParseError("chsh needs two A and two B observables")
    a_obs, b_obs = _collection(sc, a_names), _collection(sc, b_names)
    for o in a_obs + b_obs:
        if not set(np.round(o.spectral.points, 9)) <= {-1.0, 1.0}:
            raise ValidationError(o.name, "CHSH observables must have spectrum within {-1, +1}")
    checks = []
    corr = {}
    worst = 0.0
    for (i, a), (j, b) in itertools.product(enumerate(a_obs, 1), enumerate(b_obs, 1)):
        if not commute(a.spectral, b.spectral):
            raise ValidationError(f"{a.name},{b.name}", "A and B observables must commute")
        corr[f"E{i}{j}"] = sym_moment(rho, [a, b])
        mu = quasi_measure(rho, sym_product_measure([a, b]))
        for ka, kb in itertools.product(range(len(a.spectral)), range(len(b.spectral))):
            born = born_joint(rho, [a.spectral, b.spectral], [{ka}, {kb}])
            worst = max(worst, abs(event_value(mu, EventSpec.of({a.id: {ka}, b.id: {kb}})) - born))
    checks.append(audit.Check("pair_marginals_born", worst <= audit.TOL, worst))
    s = corr["E11"] + corr["E12"] + corr["E21"] - corr["E22"]
    joint = quasi_measure(rho, sym_product_measure(a_obs + b_obs))
    neg = negativity_report(joint)
    dev = abs(joint.total() - 1.0)
    checks.append(audit.Check("weights_sum_to_one", dev <= audit.TOL, dev))
    return {
        "observables": list(a_names) + list(b_names),
        **corr,
        "S": s,
        "abs_S": abs(s),
        "value": s,
        "joint_min_weight": neg.min_weight,
        "joint_negative_atoms": len(neg.negative_atoms),
        "joint_total_variation": neg.total_variation,
        "checks": checks,
    }


def run_audit(sc: Scenario, req: dict, seed: int = 0) -> dict:
    rng = np.random.default_rng(int(req.get("seed", seed)))
    if "random" in req:
        spec = req["random"]
        dim, count = int(spec.get("dim", 3)), int(spec.get("count", 4))
        registry = Registry()
        obs = [registry.register(audit.random_hermitian(rng, dim), f"R{k}") for k in range(count)]
        states = {"random": audit.random_density(rng, dim)}
    else:
        registry = sc.registry
        names = req.get("observables") or list(sc.observables)
        obs = list({sc.observables[n].id: sc.observables[n] for n in names}.values())
        states = sc.states
    checks = audit.product_checks(obs, rng)
    g = GlobalMeasure(registry)
    checks += audit.cylinder_checks(g, audit.cylinder_cases(registry, [o.id for o in obs], rng))
    for name, rho in states.items():
        if rho.dim == obs[0].dim:
            checks += audit.state_checks(rho, obs, f"[{name}]")
    return {"audited": [o.name for o in obs], "checks": checks}


def run_scenario(sc: Scenario, seed: int = 0) -> list:
    reports = []
    for index, req in enumerate(sc.requests):
        report = run_request(sc, req, seed)
        report["index"] = index
        reports.append(report)
    return reports


def audit_scenario(sc: Scenario, seed: int = 0) -> dict:
    return run_audit(sc, {"kind": "audit"}, seed)
