import numpy as np
import pytest

from nclp import AlgebraSpec, FunctionalSpec

M2 = AlgebraSpec([2])
M3 = AlgebraSpec([3])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def rho_state():
    """The faithful state with density diag(0.75, 0.25) on M_2."""
    return FunctionalSpec(M2.diag(0.75, 0.25))


def unit(alg, i, j, k=0):
    return alg.matrix_unit(k, i, j)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.RESULTS:
        terminalreporter.write_line(line)
