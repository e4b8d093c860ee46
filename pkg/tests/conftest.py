import logging

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vsl.absorption.model import RoomGeometry, RoomSpec, SurfaceAcoustics
from vsl.absorption.sim import SimConfig
from vsl.absorption.utils import setup_logger

settings.register_profile("fast", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.function_scoped_fixture])
settings.load_profile("fast")


@pytest.fixture(scope="session")
def logger() -> logging.Logger:
    return setup_logger("vsl.absorption.tests", logging.DEBUG)


@pytest.fixture
def shoebox() -> RoomSpec:
    """Small moderately absorbing room with frequency-dependent surfaces."""
    geometry = RoomGeometry(4.0, 5.0, 3.0)
    surfaces = [
        SurfaceAcoustics([0.10, 0.12, 0.15, 0.20, 0.25, 0.30], [0.1, 0.1, 0.2, 0.4, 0.5, 0.6]),
        SurfaceAcoustics([0.30, 0.40, 0.50, 0.60, 0.60, 0.60], [0.1, 0.1, 0.2, 0.4, 0.5, 0.6]),
        SurfaceAcoustics([0.05] * 6, [0.1, 0.1, 0.2, 0.4, 0.5, 0.6]),
        SurfaceAcoustics([0.08] * 6, [0.1, 0.1, 0.2, 0.4, 0.5, 0.6]),
        SurfaceAcoustics([0.05, 0.06, 0.07, 0.08, 0.09, 0.10], [0.1, 0.1, 0.2, 0.4, 0.5, 0.6]),
        SurfaceAcoustics([0.02] * 6, [0.1, 0.1, 0.2, 0.4, 0.5, 0.6]),
    ]
    return RoomSpec(geometry, surfaces, [1.2, 1.5, 1.4], [2.9, 3.6, 1.7])


@pytest.fixture
def fast_sim() -> SimConfig:
    """Light configuration for tests: few rays, 0.1 s of response."""
    return SimConfig(n_rays=512, max_time=0.1, max_image_order=-1, ray_block_size=256)


def exp_decay(tau: float, fs: int = 16000, duration: float = 1.5, seed: int = 0) -> np.ndarray:
    """Exponentially decaying white noise with pressure envelope exp(-t/tau)."""
    t = np.arange(int(duration * fs)) / fs
    return np.random.default_rng(seed).standard_normal(len(t)) * np.exp(-t / tau)


@pytest.fixture
def decaying_noise():
    return exp_decay
