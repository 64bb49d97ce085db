from fractions import Fraction

import pytest

from carpetlab import PhaseState, build_spec, carpet_spec, uniform_spec


@pytest.fixture(scope="session")
def s1():
    # weights (1/2, 1/4, 0; 0, 1/8, 1/8): marginals q=(3/4,1/4), r=(1/2,3/8,1/8)
    return build_spec(2, 3, [[Fraction(1, 2), Fraction(1, 4), 0],
                             [0, Fraction(1, 8), Fraction(1, 8)]])


@pytest.fixture(scope="session")
def u23():
    return uniform_spec(2, 3)


@pytest.fixture(scope="session")
def c1():
    return carpet_spec(2, 3, [(0, 0), (0, 2), (1, 1)])


@pytest.fixture(scope="session")
def pointmass():
    return build_spec(2, 3, [[1, 0, 0], [0, 0, 0]])


@pytest.fixture()
def phase0():
    return PhaseState.create(2, 3, 0)
