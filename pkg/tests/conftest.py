import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("qmarkov", max_examples=25, deadline=None, derandomize=True)
settings.load_profile("qmarkov")

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a + a.conj().T


def random_state(rng, n, rank=None):
    rank = rank or n
    a = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
