from collections import Counter

import numpy as np
import pytest
from hypothesis import given

from conftest import brute_hom_maps, graphs, random_graph
from orbithom.errors import BudgetExceeded
from orbithom.graph import Graph
from orbithom.oracle import (
    oracle_all_vertices_hom,
    oracle_hom,
    oracle_orbit_homs,
    oracle_signature_histogram,
    oracle_vertex_homs,
)
from orbithom.pattern import (
    automorphism_orbits,
    clique_pattern,
    cycle_pattern,
    is_independent,
    named_pattern,
    orbit_independent_sets,
    path_pattern,
)

K3 = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
K4 = Graph.from_edges(4, [(u, v) for u in range(4) for v in range(u + 1, 4)])
C4G = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])


def test_hom_examples(rng):
    assert oracle_hom(clique_pattern(3), K3) == 6
    g = random_graph(rng, 10, 17)
    assert oracle_hom(clique_pattern(2), g) == 2 * g.m
    assert oracle_hom(path_pattern(3), K3) == 12


def test_orbit_examples():
    assert oracle_orbit_homs(clique_pattern(2), K3).tolist() == [[4, 4, 4]]
    assert oracle_orbit_homs(clique_pattern(3), K4).tolist() == [[18, 18, 18, 18]]
    for name in ["K2", "C4", "paw", "P7+triangle"]:
        h = named_pattern(name)
        assert not oracle_orbit_homs(h, Graph.from_edges(5, [])).any()


def test_signature_examples():
    assert oracle_signature_histogram(clique_pattern(2), K3, (0, 1), 0) == {(0,): 2, (1,): 2}
    hist = oracle_signature_histogram(clique_pattern(3), K4, (0, 1, 2), 2)
    assert all(len(s) == 1 for s in hist)
    c4 = cycle_pattern(4)
    hist = oracle_signature_histogram(c4, C4G, (0, 1, 2, 3), 0)
    assert hist.get((0, 2), 0) > 0 and hist.get((1, 3), 0) > 0


def test_budget():
    with pytest.raises(BudgetExceeded):
        oracle_hom(path_pattern(6), Graph.from_edges(30, []), budget=10**8)
    assert oracle_hom(path_pattern(6), Graph.from_edges(30, []), budget=10**9) == 0


@given(graphs(max_n=5))
def test_oracle_matches_product_enumeration(g):
    for h in [path_pattern(3), clique_pattern(3), cycle_pattern(4), named_pattern("paw")]:
        maps = list(brute_hom_maps(h, g))
        assert oracle_hom(h, g) == len(maps)
        vh = np.zeros((h.k, g.n), dtype=np.int64)
        for phi in maps:
            for x, v in enumerate(phi):
                vh[x, v] += 1
        assert np.array_equal(oracle_vertex_homs(h, g), vh)
        orbits = automorphism_orbits(h).orbits
        oh = np.zeros((len(orbits), g.n), dtype=np.int64)
        for phi in maps:
            for i, orb in enumerate(orbits):
                for v in {phi[x] for x in orb}:
                    oh[i, v] += 1
        assert np.array_equal(oracle_orbit_homs(h, g), oh)


@pytest.mark.parametrize("name", ["C4", "P5", "diamond", "K2", "P4"])
def test_signature_laws(name, rng):
    h = named_pattern(name)
    for _ in range(3):
        g = random_graph(rng, 7, 12)
        orbit_counts = oracle_orbit_homs(h, g)
        for i, orb in enumerate(automorphism_orbits(h).orbits):
            for v in range(g.n):
                hist = oracle_signature_histogram(h, g, orb, v)
                assert all(is_independent(h, s) for s in hist)
                assert sum(hist.values()) == orbit_counts[i, v]
                for S in orbit_independent_sets(h, orb):
                    above = sum(c for s, c in hist.items() if set(S) <= set(s))
                    assert above == oracle_all_vertices_hom(h, g, S, v)
                # alternating sum over nonempty subsets of every occurring signature is 1
                for s in hist:
                    total = Counter()
                    for S in orbit_independent_sets(h, orb):
                        if set(S) <= set(s):
                            total[len(S)] += 1
                    assert sum((-1) ** (size + 1) * c for size, c in total.items()) == 1
