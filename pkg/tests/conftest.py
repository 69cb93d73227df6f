import numpy as np
import pytest

from convergence_de.core import Budget, Problem, RngStream


def sphere_objective(x):
    return np.sum(np.asarray(x) ** 2, axis=-1)


def constant_objective(x):
    return np.zeros(np.asarray(x).shape[:-1])


@pytest.fixture
def sphere2():
    return Problem(name="sphere", dimension=2, objective=sphere_objective)


@pytest.fixture
def make_sphere():
    def make(dimension: int = 2, bias: float = 0.0) -> Problem:
        return Problem(name=f"sphere{dimension}", dimension=dimension, objective=sphere_objective, bias=bias)

    return make


@pytest.fixture
def constant2():
    return Problem(name="constant", dimension=2, objective=constant_objective)


@pytest.fixture
def rng():
    return RngStream(1234)


@pytest.fixture
def budget():
    return Budget(2000)
