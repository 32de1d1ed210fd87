import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(0xAFD0)


def random_unit_symbols(rng, n):
    """Random QPSK symbols with unit average energy."""
    return (rng.choice([-1.0, 1.0], n) + 1j * rng.choice([-1.0, 1.0], n)) / np.sqrt(2)
