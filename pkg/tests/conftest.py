import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from orbithom import kernels
from orbithom.graph import Graph

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

CORPUS_NAMES = ["K2", "P3", "P4", "P5", "P6", "K3", "K4", "C4", "C5", "paw", "diamond", "P7+triangle"]


def random_graph(rng, n, m):
    """Uniform simple graph with ``n`` vertices and ``min(m, C(n, 2))`` edges."""
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if not pairs:
        return Graph.from_edges(n, [])
    pick = rng.choice(len(pairs), size=min(m, len(pairs)), replace=False)
    return Graph.from_edges(n, [pairs[i] for i in pick])


def brute_hom_maps(h, g):
    """All homomorphisms by itertools.product over every map (tiny inputs only)."""
    adj = {(int(u), int(v)) for u, v in g.edge_array()}
    adj |= {(v, u) for u, v in adj}
    for phi in itertools.product(range(g.n), repeat=h.k):
        if all((phi[u], phi[v]) in adj for u, v in h.edges):
            yield phi


@st.composite
def graphs(draw, max_n=9, max_m=None):
    n = draw(st.integers(0, max_n))
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=max_m)) if pairs else []
    return Graph.from_edges(n, chosen)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    with kernels.use_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
