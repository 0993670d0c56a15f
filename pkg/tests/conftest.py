import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.services import state_service, tomography_service


@pytest.fixture
def ghz3():
    return state_service.make_ghz(3, "+")


@pytest.fixture
def w_prime3():
    return state_service.make_w_prime(3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def noisy_ghz2_counts():
    """Poisson counts from a two-qubit GHZ state with 30% white noise"""
    def _make(shots: float, seed: int = 3):
        rho = state_service.mix_with_white_noise(state_service.make_ghz(2, "+"), 0.3)
        return tomography_service.simulate_counts(rho, shots, noise="poisson", rng_seed=seed)
    return _make


@pytest.fixture
def noisy_ghz3_counts():
    """Poisson counts from a three-qubit GHZ state with 30% white noise"""
    def _make(shots: float, seed: int = 3):
        rho = state_service.mix_with_white_noise(state_service.make_ghz(3, "+"), 0.3)
        return tomography_service.simulate_counts(rho, shots, noise="poisson", rng_seed=seed)
    return _make
