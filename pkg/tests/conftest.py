import numpy as np
import pytest

from hbode.problems import make_problem


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=[("quadratic", 3), ("cos_sum", 4), ("rosenbrock", 3)],
                ids=lambda p: p[0])
def suite_problem(request):
    name, dim = request.param
    return make_problem(name, dim)
