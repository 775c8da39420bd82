import numpy as np
import pytest

from cavitydd import CouplingSet, designer, gaussian, hermitian


def random_couplings(rng, dim, scale=0.35):
    """Random bounded Hermitian coupling quadruple."""
    mats = []
    for _ in range(4):
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        m = (m + m.conj().T) / 2
        mats.append(scale * m / max(1.0, np.linalg.norm(m, 2)))
    return CouplingSet(*mats)


@pytest.fixture(scope="session")
def g10():
    return gaussian(0.10)


@pytest.fixture(scope="session")
def h05():
    return hermitian(0.05)


@pytest.fixture(scope="session")
def q1_shape():
    return designer.design_named("Q1").shape


@pytest.fixture(scope="session")
def s1_shape():
    return designer.design_named("S1").shape
