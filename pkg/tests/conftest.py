import pytest

from ypqwave.geometry import solve_geometry


@pytest.fixture(scope="session")
def gp23():
    return solve_geometry(2, 3)


@pytest.fixture(scope="session")
def gp34():
    return solve_geometry(3, 4)


def label_lattice(p_top=6):
    import math
    return [(p, q) for p in range(2, p_top + 1) for q in range(p + 1, 2 * p)
            if math.gcd(p, q) == 1]
