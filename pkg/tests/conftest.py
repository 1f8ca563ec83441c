import cmath
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from descff.algebra_core import ModelParams, annulus_points

settings.register_profile(
    "descff",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("descff")

# frozen sample point shared with tests/oracles/make_frozen.py
X5 = [0.83 + 0.41j, -1.12 + 0.57j, 0.35 - 1.31j, 1.47 + 0.22j, -0.62 - 0.71j]


@pytest.fixture
def params():
    return ModelParams(p=0.31)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


def points(seed: int, count: int, params: ModelParams) -> list[complex]:
    return annulus_points(np.random.default_rng(seed), count, params)


def rel(a, b) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


# strategies
couplings = st.floats(min_value=0.12, max_value=0.88)
seeds = st.integers(min_value=0, max_value=2**31 - 1)


def generic_a(p: float):
    """Values of a at distance >= 0.02 from the degeneracy lattice and cos(pi a) = 0."""
    bad = [p / 2, -p / 2, (1 + p) / 2, -(1 + p) / 2, 0.5, -0.5]

    def ok(a):
        return all(abs((a - b) - round(a - b)) > 0.02 for b in bad)

    return st.floats(min_value=-0.45, max_value=0.45).filter(ok)
