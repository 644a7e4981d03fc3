import math

import pytest

from slt.problem import (BoundaryAngles, Potential, ProblemSpec, SolverSettings,
                         TransmissionMatrix, classical_dirichlet, delta_interaction)
from slt.spectral import find_eigenvalues

# Lines collected by test_acceptance.py, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def settings():
    return SolverSettings()


@pytest.fixture(scope="session")
def classical():
    """alpha = beta = 0, q = 0, continuity at 0: eigenvalues n^2/4."""
    return classical_dirichlet()


@pytest.fixture(scope="session")
def delta():
    """Dirichlet ends with a unit delta interaction at 0."""
    return ProblemSpec(Potential.constant(0.0), BoundaryAngles(0.0, 0.0), delta_interaction(1.0))


@pytest.fixture(scope="session")
def asymmetric():
    """rho12 = 2, rho34 = 1: the two sides carry different weights."""
    T = TransmissionMatrix((0, 2, 0, -1), (-1, 0, 1, 0))
    return ProblemSpec(Potential("polynomial", [0.5, 0.0, 1.0], [1.0, -1.0]),
                       BoundaryAngles(0.3, 1.1), T)


@pytest.fixture(scope="session")
def classical_spectrum(classical, settings):
    return find_eigenvalues(classical, settings.replace(lambda_max=2600.0, max_eigenvalues=100))


@pytest.fixture(scope="session")
def delta_spectrum(delta, settings):
    return find_eigenvalues(delta, settings.replace(max_eigenvalues=12))


@pytest.fixture(scope="session")
def asymmetric_spectrum(asymmetric, settings):
    return find_eigenvalues(asymmetric, settings.replace(max_eigenvalues=10))


def dirichlet_eigenvalues(n):
    return [k * k / 4.0 for k in range(1, n + 1)]


PI = math.pi
