import math

import numpy as np
import pytest

from dephase import DiscreteBath, validate_system

PLUS = np.full((2, 2), 0.5)

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def qubit_plus():
    return validate_system([0.0, 1.0], [0.0, 1.0], PLUS)


@pytest.fixture
def two_mode_bath():
    return DiscreteBath([1.0, 2.3], [0.4, 0.7])


def random_density_matrix(rng, d, rank=None):
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_instance(rng, d_max=4, k_max=5):
    """A random system and bath; returns (system, bath, beta)."""
    d = int(rng.integers(1, d_max + 1))
    K = int(rng.integers(0, k_max + 1))
    system = validate_system(rng.normal(size=d), rng.normal(size=d), random_density_matrix(rng, d))
    bath = DiscreteBath(rng.uniform(0.2, 3.0, K), rng.normal(size=K) + 1j * rng.normal(size=K))
    beta = math.inf if rng.random() < 0.2 else float(rng.uniform(0.1, 10.0))
    return system, bath, beta


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
