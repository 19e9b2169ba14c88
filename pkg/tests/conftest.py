import math

import pytest

from logconcave.measure1d import (exponential_symmetric, gaussian, log_concave_family, realize,
                                  uniform)


@pytest.fixture(scope="session")
def std_gauss():
    return realize(gaussian(0.0, 1.0))


@pytest.fixture(scope="session")
def laplace():
    return realize(exponential_symmetric(1.0))


@pytest.fixture(scope="session")
def box():
    return realize(uniform(-1.0, 1.0))


@pytest.fixture(scope="session")
def family():
    """Twelve log-concave measures at N=2048."""
    return log_concave_family(2048)


@pytest.fixture(scope="session")
def small_family():
    return log_concave_family(512)


def gaussian_tv(d: float) -> float:
    return math.erf(abs(d) / (2.0 * math.sqrt(2.0)))


# acceptance lines, printed once at the end of the session
ACCEPTANCE: list[str] = []


def acceptance_line(tag: str, ok: bool, detail: str) -> str:
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[0][2:])):
            terminalreporter.write_line(line)
