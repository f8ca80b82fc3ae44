import os
import sys

import numpy as np
import pytest

# Add package root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from grassfactor.grassmann import haar_unitary


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def haar_real(rng):
    """Haar O(n) sampler bound to the test generator."""
    return lambda n: haar_unitary("real", n, rng)


@pytest.fixture
def haar_complex(rng):
    return lambda n: haar_unitary("complex", n, rng)
