import numpy as np
import pytest

from toruscs import FourierField, TorusGrid, eigendecompose, kn_matrix, symbol_from_spec
from toruscs.symbols import PRESETS

ACCEPTANCE_LINES: list[str] = []


def random_field(grid: TorusGrid, rng: np.random.Generator, band: int | None = None) -> FourierField:
    """Unit-norm field with complex Gaussian coefficients on |k|_inf <= band."""
    c = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    if band is not None:
        c[np.max(np.abs(grid.modes), axis=1) > band] = 0
    return FourierField(grid, c).normalized()


@pytest.fixture(scope="session")
def pendulum():
    return symbol_from_spec(PRESETS["pendulum"])


@pytest.fixture(scope="session")
def pendulum_dec():
    """Decompositions keyed by (h, K), computed once per session."""
    b = symbol_from_spec(PRESETS["pendulum"])
    store = {}

    def get(h: float, K: int):
        if (h, K) not in store:
            store[(h, K)] = eigendecompose(kn_matrix(b, TorusGrid.create(1, K, h)))
        return store[(h, K)]

    return get


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
