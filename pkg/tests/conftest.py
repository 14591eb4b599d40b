import numpy as np
import pytest

from thirdharmonic import GridSpec, ComplexField, StatePair, solve_ground_state


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def radial_grid():
    return GridSpec.radial(1024, 12.0)


@pytest.fixture(scope="session")
def gs_ref():
    """Reference ground state at gamma = 3 (shared; tight tolerance)."""
    grid = GridSpec.radial(2048, 24.0)
    return solve_ground_state(3.0, grid, tol=1e-10, max_iter=500)


def gaussian_state(grid, amp_u=1.0, amp_v=0.0, width=1.0, gamma=3.0, mu=9.0,
                   phase_u=0.0, phase_v=0.0, time=0.0):
    r = grid.radius_field
    bump = np.exp(-(r**2) / width**2)
    u = ComplexField(grid, amp_u * np.exp(1j * phase_u) * bump.astype(complex))
    v = ComplexField(grid, amp_v * np.exp(1j * phase_v) * bump.astype(complex))
    return StatePair(u, v, gamma, mu, time)


@pytest.fixture
def make_gaussian_state():
    return gaussian_state
