import numpy as np
import pytest

from torsionlab.closed_forms import ball_torsion, ellipsoid_torsion, triangle_torsion
from torsionlab.fields import interpolant
from torsionlab.geometry import build_grid
from torsionlab.presets import preset_domain
from torsionlab.solver import solve_torsion


def _solve(domain, h):
    return solve_torsion(build_grid(domain, h))


@pytest.fixture(scope="session")
def disk_domain():
    return preset_domain("disk")


@pytest.fixture(scope="session")
def ellipse_domain():
    return preset_domain("ellipse")


@pytest.fixture(scope="session")
def square_domain():
    return preset_domain("square")


@pytest.fixture(scope="session")
def triangle_domain():
    return preset_domain("paper-triangle")


@pytest.fixture(scope="session")
def u_ball():
    return ball_torsion(center=(0.0, 0.0), radius=1.0, n=2)


@pytest.fixture(scope="session")
def u_ellipse():
    return ellipsoid_torsion(coefficients=(1.5, 0.5))


@pytest.fixture(scope="session")
def u_triangle():
    return triangle_torsion()


@pytest.fixture(scope="session")
def solved_disk_32(disk_domain):
    return _solve(disk_domain, 1.0 / 32.0)


@pytest.fixture(scope="session")
def solved_disk_64(disk_domain):
    return _solve(disk_domain, 1.0 / 64.0)


@pytest.fixture(scope="session")
def solved_disk_128(disk_domain):
    return _solve(disk_domain, 1.0 / 128.0)


@pytest.fixture(scope="session")
def solved_ellipse_128(ellipse_domain):
    return _solve(ellipse_domain, 1.0 / 128.0)


@pytest.fixture(scope="session")
def solved_square_128(square_domain):
    return _solve(square_domain, 1.0 / 128.0)


@pytest.fixture(scope="session")
def solved_triangle_64(triangle_domain):
    return _solve(triangle_domain, 1.0 / 64.0)


@pytest.fixture(scope="session")
def disk_field_128(solved_disk_128):
    return interpolant(solved_disk_128)


@pytest.fixture(scope="session")
def ellipse_field_128(solved_ellipse_128):
    return interpolant(solved_ellipse_128)


@pytest.fixture(scope="session")
def square_field_128(solved_square_128):
    return interpolant(solved_square_128)


@pytest.fixture(scope="session")
def triangle_field_64(solved_triangle_64):
    return interpolant(solved_triangle_64)
