import math

import numpy as np
import pytest

from fnls_lab.grid import ComplexField, PhysParams, make_grid
from fnls_lab.groundstate import petviashvili_solve

# criterion number -> (passed, detail); printed after the run by the hook below
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def grid_1d():
    return make_grid(1, 1024, 10 * math.pi)


@pytest.fixture(scope="session")
def nls_cubic():
    return PhysParams(1.0, 3.0)


@pytest.fixture(scope="session")
def sech_soliton(grid_1d):
    x = grid_1d.coords[0]
    return ComplexField(grid_1d, math.sqrt(2.0) / np.cosh(x))


@pytest.fixture(scope="session")
def gs_1d(grid_1d, nls_cubic):
    return petviashvili_solve(nls_cubic, grid_1d, tol=1e-10)


@pytest.fixture(scope="session")
def frac_params():
    return PhysParams(0.9, 3.0)


@pytest.fixture(scope="session")
def gs_3d(frac_params):
    """Fractional ground state, s=0.9, d=3, p=3, on the 64^3 / l=5 preset."""
    return petviashvili_solve(frac_params, make_grid(3, 64, 5.0), tol=1e-10)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
