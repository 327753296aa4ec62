import numpy as np
import pytest

from cansys import PiecewiseConstant

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def criterion(request):
    """Record ``(number, passed, detail)`` for the end-of-run summary."""
    rows = request.config.stash[_RESULTS]

    def record(number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        rows.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = config.stash.get(_RESULTS, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(rows):
        terminalreporter.write_line(line)


def random_cells(rng: np.random.Generator, n: int | None = None) -> PiecewiseConstant:
    """Random PSD piecewise-constant Hamiltonian with 1 to 6 cells."""
    n = n or int(rng.integers(1, 7))
    widths = rng.uniform(0.2, 1.5, n - 1)
    bp = np.concatenate(([0.0], np.cumsum(widths)))
    a = rng.uniform(0.1, 2.0, n)
    c = rng.uniform(0.1, 2.0, n)
    b = rng.uniform(-0.9, 0.9, n) * np.sqrt(a * c)
    return PiecewiseConstant(bp, np.stack([a, b, c], axis=1))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
