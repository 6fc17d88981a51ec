import warnings

import numpy as np
import pytest

from shiftkrylov.operators import bidiagonal_operator, from_matrix


@pytest.fixture(scope="session")
def bidiag1000():
    return bidiagonal_operator(1000)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def diag_dominant_complex(n, seed=0):
    rng = np.random.default_rng(seed)
    M = random_complex(rng, n, n) / np.sqrt(n)
    M += np.diag(3 + rng.uniform(0, 2, n) + 1j * rng.uniform(-1, 1, n))
    return from_matrix(M)


@pytest.fixture(autouse=True)
def _quiet_shift_warnings():
    from shiftkrylov.shifted import ShiftDivergenceWarning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ShiftDivergenceWarning)
        yield
