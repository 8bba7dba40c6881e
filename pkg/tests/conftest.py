import re

import numpy as np
import pytest
from hypothesis import settings

from qframes.hilbert import Factorization, StateVector

settings.register_profile("default", deadline=None)
settings.load_profile("default")

SQRT2 = np.sqrt(2)
SQRT3 = np.sqrt(3)


def random_state(rng: np.random.Generator, dim: int, fact: Factorization | None = None, real: bool = False) -> StateVector:
    v = rng.normal(size=dim) + (0 if real else 1j * rng.normal(size=dim))
    return StateVector.normalize(v, fact)


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20181018)


_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m and (rep.when == "call" or outcome == "error"):
                lines.append((int(m.group(1)), rep.nodeid.split("::")[-1], outcome.upper()))
    if lines:
        terminalreporter.section("acceptance criteria")
        for n, name, status in sorted(lines):
            terminalreporter.write_line(f"criterion {n}: {'PASS' if status == 'PASSED' else 'FAIL'}  ({name})")
