"""Shared fixtures."""
import math

import numpy as np
import pytest

from spin_parity.state_engine import PureState


def statistical_tolerance(q: float, n: int) -> float:
    """Four standard errors of a proportion q estimated from n trials."""
    return 4.0 * math.sqrt(q * (1.0 - q) / n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_state(rng):
    """Factory for Haar-like random normalised states."""

    def make(num_qubits: int) -> PureState:
        dim = 1 << num_qubits
        amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return PureState(amps, normalize=True)

    return make
