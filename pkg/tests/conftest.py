import math
import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=60, derandomize=True, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", deadline=None, max_examples=200, derandomize=True)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def circle_points(R, n, center=(0.0, 0.0)):
    th = 2 * math.pi * np.arange(n) / n
    return np.column_stack([center[0] + R * np.cos(th), center[1] + R * np.sin(th)])


def square_points(side, n):
    k = n // 4
    t = np.arange(k) / k * side
    z = np.zeros(k)
    return np.vstack([
        np.column_stack([t, z]),
        np.column_stack([z + side, t]),
        np.column_stack([side - t, z + side]),
        np.column_stack([z, side - t]),
    ])


def triangle_points(side):
    return np.array([(0.0, 0.0), (side, 0.0), (side / 2, side * math.sqrt(3) / 2)])


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
