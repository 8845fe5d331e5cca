import numpy as np
import pytest
from hypothesis import strategies as st

from slharmonic.lie_algebra import assemble, m_dim


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def E(n, p, q):
    """Unit matrix with a one at (p, q), 1-based like the usual E_pq."""
    M = np.zeros((n, n))
    M[p - 1, q - 1] = 1.0
    return M


dims = st.integers(min_value=2, max_value=6)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def m_element(n, m, seed, scale=1.0):
    r = np.random.default_rng(seed)
    return assemble(scale * r.standard_normal(m_dim(n)), n, m)
