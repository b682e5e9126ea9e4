import numpy as np
import pytest

from relestim import Dataset


def make_dataset(seed, n, k, noise=1.0, outliers=0, beta=None):
    """Standard-normal design with optional +20 y-outliers on a seeded subset."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, k))
    if beta is None:
        beta = rng.standard_normal(k)
    beta = np.asarray(beta, dtype=float)
    y = X @ beta + noise * rng.standard_normal(n)
    if outliers:
        idx = rng.choice(n, size=outliers, replace=False)
        y[idx] += 20.0
    return Dataset(X, y), beta


@pytest.fixture
def dataset_factory():
    return make_dataset
