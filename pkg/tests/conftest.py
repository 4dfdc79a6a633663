import numpy as np
import pytest
from hypothesis import settings

from dcf2d.core import Population

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_pop(F, C=None, X=None, first_id=0):
    F = np.atleast_2d(np.asarray(F, dtype=float))
    n = F.shape[0]
    C = np.zeros((n, 0)) if C is None else np.asarray(C, dtype=float).reshape(n, -1)
    X = np.zeros((n, 1)) if X is None else np.asarray(X, dtype=float).reshape(n, -1)
    return Population.from_arrays(X, F, C, np.arange(first_id, first_id + n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance line; the lines are printed in the terminal summary."""
    def _report(number: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
