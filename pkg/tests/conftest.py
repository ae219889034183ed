"""Shared fixtures: the standard map zoo and cone fields used across tests."""
import numpy as np
import pytest

from toruslab import Cone, ConeField, make_map
from toruslab.semiconjugacy import make_strip_map

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def e1():
    # linear shear-free product, expands x by 3
    return make_map([[3, 0], [0, 1]], allow_degree_one=True)


@pytest.fixture(scope="session")
def e2():
    return make_map(
        [[3, 0], [0, 1]],
        pert_x=[(0, 1, 0.05, 0.0)],
        pert_y=[(1, 0, 0.0, 0.05)],
        allow_degree_one=True,
    )


@pytest.fixture(scope="session")
def anosov():
    return make_map([[2, 1], [1, 1]], allow_degree_one=True)


@pytest.fixture(scope="session")
def circle3():
    return make_map(
        [[3, 0], [0, 1]],
        pert_x=[(1, 0, 0.1, 0.0)],
        allow_degree_one=True,
    )


@pytest.fixture(scope="session")
def pointwise_map():
    a = 1.5 / TWO_PI
    b = 0.45 / TWO_PI
    return make_map(
        [[3, 0], [0, 1]],
        pert_x=[(1, 0, a, 0.0)],
        pert_y=[(0, 1, b, 0.0), (1, 1, b / 2, 0.0), (-1, 1, b / 2, 0.0)],
        allow_degree_one=True,
    )


@pytest.fixture(scope="session")
def horizontal_cone():
    return ConeField.constant(Cone(axis=0.0, half_width=np.pi / 8))


@pytest.fixture(scope="session")
def e4_strip():
    return make_strip_map(3, fx_terms=[(1, 0, 0.2, 0.0), (0, 1, 0.1, 0.0)])


@pytest.fixture(scope="session")
def strip2():
    return make_strip_map(2, fx_terms=[(1, 0, 0.15, 0.0)])
