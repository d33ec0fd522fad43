import functools

import numpy as np
import pytest

import maxplus_gate
import maxplus_gate.cli
import maxplus_gate.linalg
import maxplus_gate.model
import maxplus_gate.slices


class _ExpmRecorder:
    """Tracks the worst unitarity residual of every expm_skew result in the run."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0
        self.worst = 0.0

    def wrap(self):
        @functools.wraps(self.fn)
        def recorded(h, t=1.0):
            u = self.fn(h, t)
            d = u.shape[-1]
            res = float(np.linalg.norm(u.conj().T @ u - np.eye(d)))
            self.calls += 1
            self.worst = max(self.worst, res)
            return u

        return recorded


EXPM = _ExpmRecorder(maxplus_gate.linalg.expm_skew)
_recorded = EXPM.wrap()
for _mod in (maxplus_gate, maxplus_gate.linalg, maxplus_gate.model, maxplus_gate.slices, maxplus_gate.cli):
    _mod.expm_skew = _recorded

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE and not EXPM.calls:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k[2:])):
        ok, detail = ACCEPTANCE[key]
        tr.write_line(f"{key} {'PASS' if ok else 'FAIL'}  {detail}")
    tr.write_line(f"expm_skew over the whole suite: {EXPM.calls} calls, worst ||U^H U - I||_F = {EXPM.worst:.2e}")


def pytest_sessionfinish(session, exitstatus):
    if EXPM.worst > 1e-12:
        session.exitstatus = 1


@pytest.fixture(scope="session")
def expm_recorder():
    return EXPM


@pytest.fixture(scope="session")
def su2():
    return maxplus_gate.model.build_su2_example(tau=0.2, n_steps=6, epsilon=0.1)


@pytest.fixture(scope="session")
def su2_set(su2):
    return maxplus_gate.model.control_set(su2)


@pytest.fixture(scope="session")
def su2_points():
    rng = np.random.default_rng(2024)
    return np.array([maxplus_gate.linalg.random_unitary(2, rng) for _ in range(100)])


def random_hermitian(rng, d, scale=1.0):
    m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return scale * (m + m.conj().T) / 2
