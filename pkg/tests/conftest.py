import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "package",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("package")


def simulate_logistic(n, p, seed, *, scale=1.0):
    """Small well-conditioned logistic dataset for unit tests."""
    from resizedboot import Dataset

    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p)) / np.sqrt(p)
    beta = scale * rng.standard_normal(p)
    y = np.where(rng.random(n) < 1.0 / (1.0 + np.exp(-X @ beta)), 1.0, -1.0)
    return Dataset(X=X, y=y, family="logistic"), beta


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
