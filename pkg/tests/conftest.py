import numpy as np
import pytest

from netrvene.model import ModelParams, from_edges


def star(weights, health=None, lam=0.5, extra_healthy=(), clock=0):
    """Sink 0 fed by nodes 1..k with the given weights; node 0 is the only target.

    Nodes listed in ``extra_healthy`` are appended as healthy nodes with a
    single in-edge from node 1, so they can be added into node 0.
    """
    k = len(weights)
    n = 1 + k + len(extra_healthy)
    edges = [(i + 1, 0, w) for i, w in enumerate(weights)]
    for j in range(k + 1, n):
        edges.append((1, j, 1.0))
    for i in range(1, k + 1):
        edges.append((0, i, 1.0))
    x = np.full(n, 0.5) if health is None else np.asarray(health, dtype=float)
    lam_v = np.full(n, lam) if np.isscalar(lam) else np.asarray(lam, dtype=float)
    healthy = list(range(k + 1, n))
    return from_edges(n, edges, x, lam_v, [0], healthy, clock=clock)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params():
    return ModelParams()
