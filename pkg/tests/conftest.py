import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20260817)


def random_existing_graph(rng, n, scale=0.8, attempts=200):
    """A simulated graph whose unrestricted fit exists."""
    from pairlrt import beta_model, core

    for _ in range(attempts):
        beta = rng.uniform(-scale, scale, n)
        g = beta_model.simulate_graph(beta, rng)
        if not (np.any(g.degrees == 0) or np.any(g.degrees == n - 1)):
            fit = beta_model.fit_mle(g)
            if fit.exists:
                return beta, g
    raise RuntimeError("no existing instance found")


def random_connected_table(rng, n, k=4, scale=0.8, attempts=200):
    """A simulated comparison table that is strongly connected."""
    from pairlrt import bt_model

    for _ in range(attempts):
        beta = rng.uniform(-scale, scale, n)
        beta[0] = 0.0
        table = bt_model.simulate_comparisons(beta, k, rng)
        if bt_model.strongly_connected(table):
            return beta, table
    raise RuntimeError("no connected instance found")
