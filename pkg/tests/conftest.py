import numpy as np
import pytest

from qfisher import catalog


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def qubit():
    return catalog.make_qubit()


@pytest.fixture
def bernoulli():
    return catalog.make_bernoulli()


@pytest.fixture
def phase_model():
    return catalog.make_phase_encoding([0.25, 0.5, 0.25], [-1.0, 0.0, 1.0], points=[-1.0, 0.0, 1.0])


def random_pure_models(count, seed=0, n_max=8, m_max=3, real=False):
    """Deterministic list of (model, theta) pairs for sweeps."""
    rng = np.random.default_rng(seed)
    make = catalog.make_random_real_pure if real else catalog.make_random_pure
    out = []
    for _ in range(count):
        n = int(rng.integers(2, n_max + 1))
        m = int(rng.integers(1, m_max + 1))
        model = make(n, m, int(rng.integers(2**31)))
        out.append((model, model.sample_parameters(rng)))
    return out
