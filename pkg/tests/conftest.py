import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import srlab


@pytest.fixture(scope="session")
def gas():
    return srlab.GasParameters(1.4, 1.0, 2.0)


@pytest.fixture(scope="session")
def weak60(gas):
    return srlab.solve_state2(gas, np.radians(60.0))["weak"]


@pytest.fixture(scope="session")
def model_ab(weak60):
    return 2.4, 1.0 / weak60.c2


@pytest.fixture(scope="session")
def model_field(model_ab):
    """Converged perturbed-data model solve on a graded grid, shared by tests."""
    a, b = model_ab
    rhat, halfwidth = 0.5, 1.0
    coeffs = srlab.model_coefficients(a, b)
    outer = lambda y: (rhat**2 / (2 * a)) * (1.0 + 0.2 * np.cos(np.pi * y / halfwidth))
    grid = srlab.GridSpec(rhat=rhat, nx=97, ny=97, y_lo=-halfwidth, y_hi=halfwidth, grade_q=0.95)
    bc = srlab.BoundaryConditions(outer=outer)
    return srlab.solve(coeffs, bc, grid, srlab.SolverOptions(tolerance=1e-10, max_iterations=6000))


@pytest.fixture(scope="session")
def reflection_field(weak60):
    """Converged near-sonic reflection solve, shared by diagnostics tests."""
    return srlab.solve_reflection_near_sonic(
        weak60, eps=weak60.c2 / 20.0, grid_nx=97, grid_ny=49,
        opts=srlab.SolverOptions(tolerance=1e-9, max_iterations=6000),
    )
