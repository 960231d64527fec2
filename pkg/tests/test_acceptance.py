"""Exit criteria of the package, each at its stated tolerance.

Every test carries an ``acceptance(number, title)`` marker; conftest turns
the outcome into one PASS/FAIL line printed at the end of the session.
"""
import itertools
import math
import shutil
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import NORMALIZATION_TOL, normalization_stats
from oracles import eig_projectors, naive_symmetrized, random_hermitian, random_state, trace_weight
from qclass.cylinder import (
    CylinderSet,
    GlobalMeasure,
    check_additivity,
    check_well_defined,
    global_operator_value,
    lift,
)
from qclass.hermitian import validate_density
from qclass.quasi import (
    EventSpec,
    born_joint,
    event_value,
    mix,
    negativity_report,
    pushforward,
    quasi_measure,
    sym_moment,
)
from qclass.scenario import BUILTINS, load_builtin, run_scenario
from qclass.spectral import apply_function
from qclass.symproduct import Registry, marginalize, reorder, sym_product_measure

SQRT3 = math.sqrt(3)
I2 = np.eye(2)


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def integer_spectrum(rng, d, low=-2, high=2):
    u = random_unitary(rng, d)
    return u @ np.diag(rng.integers(low, high + 1, size=d).astype(float)) @ u.conj().T


def subsets(n):
    return (set(s) for k in range(n + 1) for s in itertools.combinations(range(n), k))


def commuting_family(rng, n):
    """``n`` distinct commuting observables on two qubits: local terms on
    each factor, their products and functions of them."""
    # a degenerate local term on the first factor, a generic one on the second
    u = random_unitary(rng, 2)
    a = u @ np.diag([-1.0, 1.0]) @ u.conj().T if rng.random() < 0.3 else random_hermitian(rng, 2)
    b = random_hermitian(rng, 2)
    pool = [np.kron(a, I2), np.kron(I2, b), np.kron(a, b), np.kron(a @ a, I2) + np.kron(I2, b)]
    return [pool[k] for k in rng.choice(len(pool), size=n, replace=False)]


@pytest.mark.acceptance(1, "Born rule recovered by single-observable quasi-measures")
def test_criterion_01_born_rule():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for trial in range(200):
        d = int(rng.integers(1, 7))
        h = integer_spectrum(rng, d) if trial % 3 == 0 else random_hermitian(rng, d)
        rho = random_state(rng, d)
        obs = Registry().register(h)
        mu = quasi_measure(validate_density(rho), sym_product_measure([obs]))
        points, projs = eig_projectors(h)
        assert len(points) == len(obs.spectral)
        assert np.allclose(points, obs.spectral.points, atol=1e-8)
        for sel in subsets(len(points)):
            expected = trace_weight(rho, sum((projs[k] for k in sel), np.zeros((d, d))))
            worst = max(worst, abs(event_value(mu, EventSpec.of({obs.id: sel})) - expected))
    elapsed = time.perf_counter() - start
    print(f"worst deviation {worst:.3e}, {elapsed:.2f} s")
    assert worst <= 1e-9
    assert elapsed < 10


@pytest.mark.acceptance(2, "commuting joint distributions recovered")
def test_criterion_02_commuting_joint():
    rng = np.random.default_rng(202)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 4))
        reg = Registry()
        obs = [reg.register(m) for m in commuting_family(rng, n)]
        assert len({o.id for o in obs}) == n
        rho = validate_density(random_state(rng, 4))
        mu = quasi_measure(rho, sym_product_measure(obs))
        spectral = [o.spectral for o in obs]
        events = [[{k} for k in atom] for atom in mu.space.atoms()]
        for _ in range(5):
            events.append([set(np.flatnonzero(rng.random(len(s)) < 0.5).tolist()) for s in spectral])
        for sides in events:
            ev = event_value(mu, EventSpec.of({o.id: sel for o, sel in zip(obs, sides)}))
            worst = max(worst, abs(ev - born_joint(rho, spectral, sides)))
    print(f"worst deviation {worst:.3e}")
    assert worst <= 1e-9


@pytest.mark.acceptance(3, "permutation and marginalization consistency of the product measure")
def test_criterion_03_product_consistency():
    rng = np.random.default_rng(303)
    start = time.perf_counter()
    reg = Registry()
    obs = [reg.register(random_hermitian(rng, 3)) for _ in range(4)]
    full = sym_product_measure(obs)
    perm_dev, perms = 0.0, 0
    for perm in itertools.permutations(range(4)):
        fresh = sym_product_measure([obs[p] for p in perm])
        perm_dev = max(perm_dev, float(np.max(np.abs(reorder(full, perm).values - fresh.values))))
        perms += 1
    marg_dev, subs = 0.0, 0
    for k in (1, 2, 3):
        for keep in itertools.combinations(range(4), k):
            fresh = sym_product_measure([obs[p] for p in keep])
            got = marginalize(full, [obs[p].id for p in keep])
            marg_dev = max(marg_dev, float(np.max(np.abs(got.values - fresh.values))))
            subs += 1
    elapsed = time.perf_counter() - start
    print(f"{perms} permutations dev {perm_dev:.3e}; {subs} subsets dev {marg_dev:.3e}; {elapsed:.2f} s")
    assert (perms, subs) == (24, 14)
    assert perm_dev <= 1e-9 and marg_dev <= 1e-9
    assert elapsed < 30


def _random_base(rng, reg, ids):
    shape = [len(reg[i].spectral) for i in ids]
    atoms = [a for a in itertools.product(*(range(k) for k in shape)) if rng.random() < 0.5]
    return atoms or [tuple(0 for _ in ids)]


@pytest.mark.acceptance(4, "cylinder values well defined and additive")
def test_criterion_04_cylinders():
    rng = np.random.default_rng(404)
    reg = Registry()
    obs = [reg.register(random_hermitian(rng, 3)) for _ in range(4)]
    ids = [o.id for o in obs]
    g = GlobalMeasure(reg)
    same, disjoint = [], []
    for _ in range(8):
        sub = sorted(rng.choice(ids, size=int(rng.integers(1, 3)), replace=False).tolist())
        c = CylinderSet.of(sub, _random_base(rng, reg, sub))
        extra = [i for i in ids if i not in sub]
        sup = list(rng.permutation(sub + extra[: int(rng.integers(1, len(extra) + 1))]))
        same.append((c, CylinderSet.of(sup, lift(reg, c, sup))))
    for _ in range(6):
        sub = rng.choice(ids, size=3, replace=False).tolist()
        c = CylinderSet.of(sub, _random_base(rng, reg, sub))
        perm = rng.permutation(3)
        same.append((c, CylinderSet.of([sub[p] for p in perm], [tuple(a[p] for p in perm) for a in c.base])))
    for _ in range(6):
        sub = sorted(rng.choice(ids, size=2, replace=False).tolist())
        c = CylinderSet.of(sub, _random_base(rng, reg, sub))
        everything = lift(reg, CylinderSet.full(), sub)
        disjoint.append((c, CylinderSet.of(sub, everything - c.base)))
    for _ in range(4):
        a, b = rng.choice(ids, size=2, replace=False).tolist()
        k = int(rng.integers(len(reg[a].spectral)))
        c1 = CylinderSet.of([a], [(k,)])
        rest = [(j, m) for j in range(len(reg[a].spectral)) if j != k for m in range(len(reg[b].spectral))]
        disjoint.append((c1, CylinderSet.of([a, b], [r for r in rest if rng.random() < 0.6] or rest[:1])))
    results = [check_well_defined(g, c1, c2) for c1, c2 in same]
    results += [check_additivity(g, c1, c2) for c1, c2 in disjoint]
    complement_dev = max(
        float(np.max(np.abs(g.product_measure(c1.ids).total() - (
            global_operator_value(g, c1) + global_operator_value(g, c2))))) for c1, c2 in disjoint[:6])
    print(f"{len(same)} same-set cases, {len(disjoint)} disjoint cases, complement dev {complement_dev:.3e}")
    assert len(results) >= 20
    assert all(results)
    assert complement_dev <= 1e-9


@pytest.mark.acceptance(5, "negative atom of the Pauli triple")
def test_criterion_05_negativity_witness():
    sc = load_builtin("pauli-triple")
    rho = sc.states["bloch111"]
    obs = [sc.observables[n] for n in ("X", "Y", "Z")]
    mu = quasi_measure(rho, sym_product_measure(obs))
    rep = negativity_report(mu)
    minus = tuple(o.spectral.index_of(-1.0) for o in obs)
    # oracle: the same weight from dense permutation sums
    projs = [eig_projectors(o.matrix)[1][0] for o in obs]
    oracle = trace_weight(rho.matrix, naive_symmetrized(projs))
    print(f"weight {mu[minus]!r}, oracle {oracle!r}, TV {rep.total_variation!r}")
    assert abs(mu[minus] - (1 - SQRT3) / 8) <= 1e-12
    assert abs(oracle - (1 - SQRT3) / 8) <= 1e-12
    assert [atom for atom, _ in rep.negative_atoms] == [minus]
    assert abs(rep.total_variation - (1 + (SQRT3 - 1) / 4)) <= 1e-12
    table = run_scenario(sc)[0]
    assert abs(table["rows"][0][3] - (1 - SQRT3) / 8) <= 1e-12


@pytest.mark.acceptance(6, "moments equal symmetrized traces")
def test_criterion_06_moments():
    rng = np.random.default_rng(606)
    worst, done = 0.0, 0
    while done < 100:
        d, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        mats = [random_hermitian(rng, d) for _ in range(n)]
        rho = random_state(rng, d)
        reg = Registry()
        obs = [reg.register(m) for m in mats]
        if len({o.id for o in obs}) < n:
            continue
        direct = trace_weight(rho, naive_symmetrized(mats))
        worst = max(worst, abs(sym_moment(validate_density(rho), obs) - direct))
        done += 1
    print(f"worst deviation {worst:.3e}")
    assert worst <= 1e-9


FUNCTIONS = [np.sign, np.abs, np.square, lambda v: np.floor(v / 2), lambda v: v**3 - v, lambda v: 2 * v + 1]


@pytest.mark.acceptance(7, "pushforward and mixture coherence")
def test_criterion_07_pushforward_and_mixtures():
    rng = np.random.default_rng(707)
    push_dev, case = 0.0, 0
    while case < 50:
        d, n = int(rng.integers(2, 5)), int(rng.integers(1, 4))
        reg = Registry()
        obs = [reg.register(integer_spectrum(rng, d) if k == 0 else random_hermitian(rng, d)) for k in range(n)]
        pos = 0 if case % 2 == 0 else int(rng.integers(n))
        phi = FUNCTIONS[case % len(FUNCTIONS)]
        rho = validate_density(random_state(rng, d))
        pushed = pushforward(quasi_measure(rho, sym_product_measure(obs)), obs[pos].id, phi)
        image = reg.register(apply_function(obs[pos].spectral, phi))
        rebuilt_obs = obs[:pos] + [image] + obs[pos + 1:]
        if len({o.id for o in rebuilt_obs}) < n:
            continue
        rebuilt = quasi_measure(rho, sym_product_measure(rebuilt_obs))
        assert pushed.space.shape == rebuilt.space.shape
        push_dev = max(push_dev, float(np.max(np.abs(pushed.weights - rebuilt.weights))))
        push_dev = max(push_dev, float(np.max(np.abs(pushed.space.spectra[pos] - rebuilt.space.spectra[pos]))))
        case += 1
    mix_dev = 0.0
    for _ in range(50):
        d, k = int(rng.integers(2, 5)), int(rng.integers(1, 5))
        reg = Registry()
        measure = sym_product_measure([reg.register(random_hermitian(rng, d)) for _ in range(int(rng.integers(1, 4)))])
        alphas = rng.dirichlet(np.ones(k))
        alphas[-1] = 1.0 - alphas[:-1].sum()
        states = [random_state(rng, d) for _ in range(k)]
        mixed = mix([quasi_measure(validate_density(s), measure) for s in states], alphas)
        direct = quasi_measure(validate_density(sum(a * s for a, s in zip(alphas, states))), measure)
        mix_dev = max(mix_dev, float(np.max(np.abs(mixed.weights - direct.weights))))
    print(f"pushforward dev {push_dev:.3e}, mixture dev {mix_dev:.3e}")
    assert push_dev <= 1e-9
    assert mix_dev <= 1e-10


@pytest.mark.acceptance(8, "CHSH at the Tsirelson point: local marginals, signed joint")
def test_criterion_08_chsh():
    sc = load_builtin("singlet-chsh")
    report = run_scenario(sc)[0]
    rho = sc.states["singlet"]
    a_obs = [sc.observables[n] for n in ("A1", "A2")]
    b_obs = [sc.observables[n] for n in ("B1", "B2")]
    joint = quasi_measure(rho, sym_product_measure(a_obs + b_obs))
    rep = negativity_report(joint)
    worst = 0.0
    for a, b in itertools.product(a_obs, b_obs):
        for ka, kb in itertools.product(range(2), range(2)):
            ev = event_value(joint, EventSpec.of({a.id: {ka}, b.id: {kb}}))
            worst = max(worst, abs(ev - born_joint(rho, [a.spectral, b.spectral], [{ka}, {kb}])))
    print(f"S {report['S']!r}, {len(rep.negative_atoms)} negative atoms, marginal dev {worst:.3e}")
    # with S = E11 + E12 + E21 - E22 and E = -cos(a - b) the singlet gives -2 sqrt 2
    assert abs(report["abs_S"] - 2 * math.sqrt(2)) <= 1e-9
    assert abs(report["S"] + 2 * math.sqrt(2)) <= 1e-9
    assert len(rep.negative_atoms) >= 1
    assert worst <= 1e-9


@pytest.mark.acceptance(10, "byte-identical CLI output for every builtin")
def test_criterion_10_determinism(tmp_path):
    exe = shutil.which("qclass")
    base = [exe] if exe else [sys.executable, "-m", "qclass.cli"]
    for name in BUILTINS:
        for fmt in ("csv", "json"):
            runs = [subprocess.run(base + ["run", name, "--format", fmt], capture_output=True, timeout=300)
                    for _ in range(2)]
            assert runs[0].returncode == 0, runs[0].stderr.decode()
            assert runs[0].stdout and runs[0].stdout == runs[1].stdout, f"{name} {fmt}"


@pytest.mark.run_last
@pytest.mark.acceptance(9, "normalization of every measure in the test corpus")
def test_criterion_09_normalization():
    rng = np.random.default_rng(909)
    # explicit sweep on top of whatever the session has already built
    for name in BUILTINS:
        sc = load_builtin(name)
        names = list(sc.observables)[:4]
        measure = sym_product_measure([sc.observables[n] for n in names])
        for rho in sc.states.values():
            quasi_measure(rho, measure)
    for _ in range(50):
        d, n = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        reg = Registry()
        measure = sym_product_measure([reg.register(random_hermitian(rng, d)) for _ in range(n)])
        quasi_measure(validate_density(random_state(rng, d)), measure)
    stats = normalization_stats()
    (ops, op_dev), (signed, s_dev) = stats["operator"], stats["signed"]
    print(f"{ops} operator measures (worst {op_dev:.3e}), {signed} signed measures (worst {s_dev:.3e})")
    assert ops >= 50 and signed >= 50
    assert op_dev <= NORMALIZATION_TOL and s_dev <= NORMALIZATION_TOL
