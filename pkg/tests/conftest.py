import numpy as np
import pytest

from midkit import fit, gen_friedman1


@pytest.fixture(scope="session")
def friedman():
    """Order-2 fit of the noise-free benchmark black box, shared by suites."""
    ds, y = gen_friedman1(2000, seed=42, noise_sd=0.0)
    model = fit(ds, y, order=2, k=(25, 5))
    return ds, y, model


@pytest.fixture
def rng():
    return np.random.default_rng(123)
