import numpy as np
import pytest

from monoreg import build_cubic, build_diagonal, build_fredholm, build_rank_one


def small_suite():
    """One modest instance of each problem family, for cross-cutting property tests."""
    return [
        ("diagonal", build_diagonal(12, ("poly", 2.0), "ones")),
        ("fredholm", build_fredholm(24)),
        ("cubic", build_cubic(8, None, "harmonic")),
        ("rank_one", build_rank_one(3)),
    ]


@pytest.fixture(params=small_suite(), ids=lambda p: p[0])
def suite_problem(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(0)
