import numpy as np
import pytest

from qplatoon.synthesis import synthesize
from qplatoon.topology import build_standard
from qplatoon.vehicle import VehicleParams, linear_model

MODEL = linear_model(VehicleParams())


def gains_for(kind, n, gamma=1.0):
    return synthesize(MODEL, build_standard(kind, n), gamma)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
