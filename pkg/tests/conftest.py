import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# Deterministic property tests: research results should not depend on the
# test runner's entropy.
settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_symmetric(rng, d, scale=1.0):
    A = rng.standard_normal((d, d)) * scale
    return (A + A.T) / 2


def random_psd(rng, d, scale=1.0):
    A = rng.standard_normal((d, d)) * scale
    return A @ A.T / d
