import numpy as np
import pytest

from verne.params import reference_params
from verne.workspace import ConstraintLimits, full_workspace


@pytest.fixture(scope="session")
def p():
    return reference_params()


@pytest.fixture(scope="session")
def lim(p):
    return ConstraintLimits.from_params(p)


@pytest.fixture(scope="session")
def grid(p, lim):
    return full_workspace(p, lim)


@pytest.fixture(scope="session")
def interior_poses(p, lim):
    """Accepted workspace poses from a denser sweep, (n, 4) rows of x, y, z, alpha."""
    g = full_workspace(p, lim, alpha_steps=101, z_steps=81, resolution=80)
    return g.sweep.accepted_poses()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""
    def record(n: int, ok: bool, detail: str) -> bool:
        _ACCEPTANCE[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(_ACCEPTANCE[n])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance")
        for n in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[n])
