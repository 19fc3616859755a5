import numpy as np
import pytest

from lblab.simplefn import normalize

ACCEPTANCE_LINES: list[str] = []


def random_simple(rng: np.random.Generator, max_pieces: int = 16):
    k = int(rng.integers(1, max_pieces + 1))
    vals = rng.uniform(0.01, 10.0, size=k)
    masses = rng.uniform(1e-3, 5.0, size=k)
    return normalize(zip(vals, masses))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
