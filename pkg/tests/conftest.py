import numpy as np
import pytest

from lerbeam.config import Scenario, reduced_config
from lerbeam.field import steering_matrix, steering_vector
from lerbeam.geometry import ArrayGeometry


def random_instance(rng, n, q, spread=30.0):
    """Steering matrix of ``q`` random near-field points plus one user vector."""
    geom = ArrayGeometry(n)
    pts = np.column_stack([rng.uniform(5, 5 + spread, q), rng.uniform(-spread / 2, spread / 2, q)])
    user = (rng.uniform(5, 5 + spread), rng.uniform(-spread / 2, spread / 2))
    return geom, steering_matrix(geom, pts), steering_vector(geom, user)


def ler_instance(rng, n=16, side=6, step=1.0):
    """Small LER-like instance: a sampled square plus a user outside it."""
    geom = ArrayGeometry(n)
    xs = 10 + step * np.arange(side)
    ys = step * np.arange(side)
    pts = np.array([(x, y) for x in xs for y in ys])
    user = (12.0 + rng.uniform(-1, 1), -6.0 + rng.uniform(-1, 1))
    return geom, steering_matrix(geom, pts), steering_vector(geom, user)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def reduced():
    sc = Scenario(reduced_config())
    sc.basis  # computed once for the session
    return sc


@pytest.fixture(scope="session")
def full():
    from lerbeam.config import default_config
    sc = Scenario(default_config())
    sc.basis
    return sc


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> bool:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
