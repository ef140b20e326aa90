import numpy as np
import pytest

from cjdmd.nar import ar2, simulate_nar


@pytest.fixture(scope="session")
def ar2_series():
    """Noiseless AR(2) y_k = 1.1 y_{k-1} - 0.3 y_{k-2}, 500 points."""
    return simulate_nar(ar2(), [1.0, 0.2], 500)


def cross_lag(w):
    return 0.5 * w[-1] + 0.3 * w[-1] * w[-2]


@pytest.fixture(scope="session")
def cross_lag_data():
    """Training and held-out series of y_k = 0.5 y_{k-1} + 0.3 y_{k-1} y_{k-2}."""
    rng = np.random.default_rng(2024)
    make = lambda n: [simulate_nar(cross_lag, rng.uniform(0.2, 1.0, 2), 60) for _ in range(n)]
    return make(20), make(5)
