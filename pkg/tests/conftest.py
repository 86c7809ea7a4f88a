"""Shared strategies and fixtures."""
import numpy as np
import pytest
from hypothesis import settings, strategies as st

from soblab import PointMeasure

settings.register_profile("soblab", max_examples=40, deadline=None)
settings.load_profile("soblab")

coords = st.floats(min_value=-4.0, max_value=4.0, allow_nan=False, allow_infinity=False)
masses = st.one_of(st.just(0.0), st.floats(min_value=1e-3, max_value=5.0))


@st.composite
def point_measures(draw, dim=2, min_atoms=1, max_atoms=6):
    k = draw(st.integers(min_atoms, max_atoms))
    loc = [[draw(coords) for _ in range(dim)] for _ in range(k)]
    m = [draw(masses) for _ in range(k)]
    return PointMeasure(np.array(loc).reshape(k, dim), m)


def random_measure(rng, dim=2, atoms=None, spread=2.0):
    k = atoms or int(rng.integers(1, 8))
    return PointMeasure(rng.uniform(-spread, spread, (k, dim)), rng.uniform(0.1, 2.0, k))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
