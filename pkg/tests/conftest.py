import numpy as np
import pytest

from qclass import quasi, symproduct
from qclass.symproduct import Registry

NORMALIZATION_TOL = 1e-9

# every OperatorMeasure / SignedMeasure built anywhere in the session
_seen = {"operator": [0, 0.0], "signed": [0, 0.0]}
ACCEPTANCE_LINES = []


def _track(cls, kind, deviation):
    original = cls.__post_init__

    def __post_init__(self):
        original(self)
        stat = _seen[kind]
        stat[0] += 1
        stat[1] = max(stat[1], deviation(self))

    cls.__post_init__ = __post_init__


_track(
    symproduct.OperatorMeasure,
    "operator",
    lambda m: float(np.max(np.abs(m.total() - np.eye(m.dim)))),
)
_track(quasi.SignedMeasure, "signed", lambda mu: abs(mu.total() - 1.0))


def normalization_stats():
    return {k: tuple(v) for k, v in _seen.items()}


def pytest_terminal_summary(terminalreporter):
    ops, op_dev = _seen["operator"]
    signed, s_dev = _seen["signed"]
    terminalreporter.write_sep("-", "normalization across the test corpus")
    terminalreporter.write_line(f"OperatorMeasure: {ops} built, worst |sum - I| = {op_dev:.3e}")
    terminalreporter.write_line(f"SignedMeasure:   {signed} built, worst |sum - 1| = {s_dev:.3e}")
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pytest_collection_modifyitems(items):
    # the corpus-wide normalization criterion has to see every other test first
    items.sort(key=lambda item: item.get_closest_marker("run_last") is not None)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    line = f"criterion {number:2d} {'PASS' if report.passed else 'FAIL'}  {title}"
    ACCEPTANCE_LINES.append(line)
    print(f"\n{line}")


def pytest_sessionfinish(session, exitstatus):
    if max(_seen["operator"][1], _seen["signed"][1]) > NORMALIZATION_TOL and exitstatus == 0:
        session.exitstatus = 1


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


def bloch_state(x, y, z):
    return (I2 + x * PAULI_X + y * PAULI_Y + z * PAULI_Z) / 2


SINGLET = np.outer([0, 1, -1, 0], [0, 1, -1, 0]).astype(complex) / 2


@pytest.fixture
def paulis():
    reg = Registry()
    return reg, reg.register(PAULI_X, "X"), reg.register(PAULI_Y, "Y"), reg.register(PAULI_Z, "Z")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
