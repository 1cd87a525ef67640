"""Shared fixtures and field constructors for the test suite."""

import numpy as np
import pytest

import kgwaveguide as kg

# verdict lines collected by the acceptance tests, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def gaussian_state(grid, amplitude=1.0, width=2.0, center=None, v=None):
    """Gaussian bump in the euclidean directions, constant on the torus."""
    coords = grid.coordinate_grids()
    center = [0.0] * grid.d if center is None else center
    r2 = np.zeros(grid.shape)
    for i in range(grid.d):
        r2 = r2 + (coords[i] - center[i]) ** 2
    u = amplitude * np.exp(-r2 / (2.0 * width**2)) * np.ones_like(coords[-1])
    vv = np.zeros(grid.shape) if v is None else v
    return kg.FieldState(u, vv, 0.0)


def random_state(grid, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return kg.FieldState(scale * rng.standard_normal(grid.shape),
                         scale * rng.standard_normal(grid.shape), 0.0)


@pytest.fixture(scope="session")
def small_grid():
    return kg.make_grid(1, 8.0, 64, 8)


@pytest.fixture(scope="session")
def tiny_grid():
    return kg.make_grid(1, 8.0, 16, 4)
