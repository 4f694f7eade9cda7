import numpy as np
import pytest

from volbreak import PricePanel, QVPanel, StdQVPanel


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(key=20240611))


def random_prices(rng, n_days, k_intervals, start=100.0):
    """Positive price rows from a lognormal walk, labeled by integer days."""
    steps = rng.standard_normal((n_days, k_intervals)) * 0.01
    logp = np.log(start) + np.concatenate(
        [np.zeros((n_days, 1)), np.cumsum(steps, axis=1)], axis=1
    )
    days = tuple(str(i + 1) for i in range(n_days))
    return PricePanel(days, np.exp(logp))


def random_stdqv(rng, n_days, k_intervals):
    """Random standardized quadratic variation panel (rows are cdfs)."""
    increments = rng.exponential(1.0, size=(n_days, k_intervals))
    qv = np.cumsum(increments, axis=1)
    return StdQVPanel(qv / qv[:, -1:])


def random_qv(rng, n_days, k_intervals):
    increments = rng.exponential(1.0, size=(n_days, k_intervals))
    return QVPanel(np.cumsum(increments, axis=1))
