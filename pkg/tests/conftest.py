import itertools
from fractions import Fraction as F

import pytest

from pdp.core import build_flower_instance


def make_example():
    """Two-petal reference instance used across the suite."""
    return build_flower_instance(
        p=[F(1, 2), F(1, 2)],
        q=[F(1, 2), F(1, 2)],
        y=[F(1, 4), F(1, 4)],
        c_life=[F(0), F(0)],
        c_platform=[F(1), F(2)],
        d=[F(10), F(1)],
        cost=[F(1, 10), F(1, 10)],
    )


@pytest.fixture
def example():
    return make_example()


def all_subsets(n):
    states = range(1, n + 1)
    for size in range(n + 1):
        for combo in itertools.combinations(states, size):
            yield frozenset(combo)
