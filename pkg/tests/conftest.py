import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20260815)


def random_hermitian(rng, n: int) -> np.ndarray:
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2.0
