import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_RESULTS = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_state(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_axis(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        passed, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {key}: {detail}")
