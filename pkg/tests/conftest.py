import hypothesis
import numpy as np
import pytest

import viscosolve as vs

hypothesis.settings.register_profile("ci", deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture(scope="session")
def problem():
    return vs.build_benchmark_problem()


@pytest.fixture(scope="session")
def qstar(problem):
    return vs.reference_solution(problem, tol=1e-12)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
