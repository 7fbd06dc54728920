import itertools

import numpy as np
import pytest
from hypothesis import given

from conftest import CORPUS_NAMES, graphs, random_graph
from orbithom.decomposition import width1_decomposition
from orbithom import engine
from orbithom.engine import (
    aggregate,
    build_extension_dictionary,
    enumerate_bag_homomorphisms,
    orbit_homs,
    orientation_plan,
    vertex_homs,
    vertex_homs_for_orientation,
)
from orbithom.errors import ArithmeticOverflow, DichotomyViolation
from orbithom.graph import DegeneracyOrdering, Graph, degeneracy_orientation, orient_acyclic
from orbithom.oracle import oracle_all_vertices_hom, oracle_hom, oracle_orbit_homs, oracle_vertex_homs
from orbithom.pattern import (
    DagPattern,
    Pattern,
    acyclic_orientations,
    automorphism_orbits,
    clique_pattern,
    cycle_pattern,
    merge_pattern,
    named_pattern,
    orbit_independent_sets,
    path_pattern,
    star_pattern,
)


def oriented(g, order):
    return orient_acyclic(g, DegeneracyOrdering(np.asarray(order, dtype=np.int64), 0))


def clique_graph(n):
    return Graph.from_edges(n, list(itertools.combinations(range(n), 2)))


K3G = clique_graph(3)
K4G = clique_graph(4)
OK3 = oriented(K3G, [0, 1, 2])  # 0->1, 0->2, 1->2


def dag_maps(p, og):
    """All arc-preserving maps of ``p`` into ``og`` by exhaustive product."""
    arcs = {tuple(a) for a in og.arc_array().tolist()}
    for phi in itertools.product(range(og.n), repeat=p.k):
        if all((phi[u], phi[v]) in arcs for u, v in p.arcs):
            yield phi


# -- bag enumeration -------------------------------------------------------


def test_enumerate_examples(backend):
    lone = DagPattern(Pattern.from_edges([], k=1), ())
    cols, rows = enumerate_bag_homomorphisms(lone, {0}, OK3)
    assert cols == (0,) and rows[:, 0].tolist() == [0, 1, 2]

    single = DagPattern(named_pattern("K2"), ((0, 1),))
    cols, rows = enumerate_bag_homomorphisms(single, {0}, OK3)
    assert cols == (0, 1)
    assert sorted(map(tuple, rows.tolist())) == [(0, 1), (0, 2), (1, 2)]

    star_g = Graph.from_edges(4, [(0, i) for i in range(1, 4)])
    ostar = oriented(star_g, [1, 2, 3, 0])  # every arc leaf -> hub
    path = DagPattern(path_pattern(3), ((0, 1), (1, 2)))
    _, rows = enumerate_bag_homomorphisms(path, {0}, ostar)
    assert rows.shape == (0, 3)


def test_enumerate_out_star(backend):
    # 0 <- 1 -> 2: maps are pairs of out-neighbors of the center's image
    p = DagPattern(path_pattern(3), ((1, 0), (1, 2)))
    cols, rows = enumerate_bag_homomorphisms(p, {1}, OK3)
    assert cols[0] == 1
    assert rows.shape[0] == sum(d * d for d in np.diff(OK3.indptr).tolist())


@pytest.mark.parametrize("name", ["P4", "K3", "C4", "diamond", "paw"])
def test_enumerate_matches_brute_force(name, rng, backend):
    h = named_pattern(name)
    og = degeneracy_orientation(random_graph(rng, 7, 13))
    for p in acyclic_orientations(h)[:8]:
        for s in width1_decomposition(p).bags:
            cols, rows = enumerate_bag_homomorphisms(p, s, og)
            sub_arcs = [(cols.index(u), cols.index(v)) for u, v in p.arcs if u in cols and v in cols]
            arcs = {tuple(a) for a in og.arc_array().tolist()}
            ref = [
                phi
                for phi in itertools.product(range(og.n), repeat=len(cols))
                if all((phi[a], phi[b]) in arcs for a, b in sub_arcs)
            ]
            assert sorted(map(tuple, rows.tolist())) == sorted(ref)
            assert len(set(map(tuple, rows.tolist()))) == rows.shape[0]


# -- extension dictionaries ------------------------------------------------


def test_extension_dictionary_k3_on_k4(backend):
    p = DagPattern(clique_pattern(3), ((0, 1), (0, 2), (1, 2)))
    ok4 = oriented(K4G, [0, 1, 2, 3])
    d = build_extension_dictionary(p, width1_decomposition(p), ok4)
    assert len(d) == 4
    assert set(d.as_dict().values()) == {1}


def _ext_reference(p, t, og):
    cols = None
    out = {}
    from orbithom.engine import bag_plan

    cols = bag_plan(p, next(iter(t.bags[t.root]))).columns
    for phi in dag_maps(p, og):
        key = tuple(phi[c] for c in cols)
        out[key] = out.get(key, 0) + 1
    return cols, out


def test_extension_dictionary_c4(backend):
    p = DagPattern(cycle_pattern(4), ((0, 1), (0, 3), (2, 1), (2, 3)))
    og = oriented(cycle_pattern_graph(4), [0, 2, 1, 3])  # arcs 0->1, 0->3, 2->1, 2->3
    t = width1_decomposition(p)
    for root in (0, 1):
        r = t.rerooted(root)
        d = build_extension_dictionary(p, r, og)
        cols, ref = _ext_reference(p, r, og)
        assert d.columns == cols
        assert d.as_dict() == ref
    # the root {0} sees child {2} only through the shared vertices {1, 3}; each
    # root map (images of 1 and 3 drawn from {1, 3}, not necessarily distinct)
    # extends in two ways, since both 0 and 2 have arcs into 1 and 3
    d = build_extension_dictionary(p, t.rerooted(0), og)
    expected = {(s, a, b): 2 for s in (0, 2) for a in (1, 3) for b in (1, 3)}
    assert d.as_dict() == expected


def cycle_pattern_graph(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def test_extension_dictionary_edgeless(backend):
    og = degeneracy_orientation(Graph.from_edges(5, []))
    for p in acyclic_orientations(named_pattern("paw")):
        assert len(build_extension_dictionary(p, width1_decomposition(p), og)) == 0


@pytest.mark.parametrize("name", ["P4", "C4", "paw", "diamond", "C5", "K4"])
def test_extension_dictionary_matches_brute_force(name, rng, backend):
    h = named_pattern(name)
    og = degeneracy_orientation(random_graph(rng, 6, 11))
    for p in acyclic_orientations(h):
        t = width1_decomposition(p)
        for root in range(len(t.bags)):
            r = t.rerooted(root)
            _, ref = _ext_reference(p, r, og)
            assert build_extension_dictionary(p, r, og).as_dict() == ref


# -- vertex counts ---------------------------------------------------------


def test_vertex_homs_for_orientation_edge(backend):
    p = DagPattern(clique_pattern(2), ((0, 1),))
    counts = vertex_homs_for_orientation(p, OK3)
    assert counts.tolist() == [[2, 1, 0], [0, 1, 2]]


def test_single_source_p3_matches_oracle(rng, backend):
    for p in acyclic_orientations(path_pattern(3)):
        if len(width1_decomposition(p).bags) != 1:
            continue
        for _ in range(10):
            og = degeneracy_orientation(random_graph(rng, 8, int(rng.integers(0, 20))))
            ref = np.zeros((3, og.n), dtype=np.int64)
            for phi in dag_maps(p, og):
                for x, v in enumerate(phi):
                    ref[x, v] += 1
            assert np.array_equal(vertex_homs_for_orientation(p, og), ref)


def test_vertex_homs_examples(backend):
    assert vertex_homs(clique_pattern(2), K3G).counts.tolist() == [[2, 2, 2], [2, 2, 2]]
    star3 = Graph.from_edges(4, [(0, i) for i in range(1, 4)])
    vh = vertex_homs(path_pattern(3), star3).counts
    assert vh[1].tolist() == [9, 1, 1, 1]
    assert (vertex_homs(clique_pattern(3), K4G).counts == 6).all()
    assert not vertex_homs(named_pattern("paw"), Graph.from_edges(6, [])).counts.any()


def test_vertex_homs_refuses_long_induced_cycle():
    with pytest.raises(DichotomyViolation):
        vertex_homs(cycle_pattern(6), K4G)


# -- orbit counts ----------------------------------------------------------


def test_orbit_homs_examples(backend):
    assert orbit_homs(clique_pattern(2), K3G).counts.tolist() == [[4, 4, 4]]
    t = orbit_homs(clique_pattern(3), K4G)
    assert t.counts.tolist() == [[18, 18, 18, 18]]
    assert aggregate(t, (0, 1, 2)) == 72
    assert aggregate(orbit_homs(clique_pattern(2), K3G), 0) == 12
    empty = orbit_homs(clique_pattern(3), Graph.from_edges(4, []))
    assert not empty.counts.any() and aggregate(empty, 0) == 0


def test_c4_on_k4_inclusion_exclusion(backend):
    c4 = cycle_pattern(4)
    vh = vertex_homs(c4, K4G).counts
    center = vertex_homs(path_pattern(3), K4G).counts[1]
    expected = vh.sum(axis=0) - 2 * center
    got = orbit_homs(c4, K4G).counts[0]
    assert np.array_equal(got, expected)
    assert np.array_equal(got, oracle_orbit_homs(c4, K4G)[0])


def test_orbit_homs_refuses_hard_pattern():
    with pytest.raises(DichotomyViolation):
        orbit_homs(path_pattern(7), K4G)


def test_hom_total_and_tsv():
    t = orbit_homs(path_pattern(3), K3G)
    assert t.hom_total == 12
    lines = t.to_tsv().splitlines()
    assert lines[0] == "vertex\torbit_rep\tcount"
    assert len(lines) == 1 + 3 * 2
    assert [tuple(map(int, l.split("\t")[:2])) for l in lines[1:]] == [(v, r) for v in range(3) for r in (0, 1)]
    labelled = t.to_tsv(labels=[10, 20, 30]).splitlines()
    assert labelled[1].startswith("10\t0\t")


def test_isolated_vertices_count_zero(backend):
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2)])
    t = orbit_homs(named_pattern("paw"), g)
    assert not t.counts[:, 3:].any()


def test_overflow_is_reported():
    # star pattern with 4 leaves on a star graph: the hub count is deg ** 4 = 2 ** 64
    d = 2**16
    g = Graph.from_edges(d + 1, [(0, i) for i in range(1, d + 1)])
    with pytest.raises(ArithmeticOverflow):
        vertex_homs(star_pattern(4), g)


# -- invariants on the corpus ----------------------------------------------


@pytest.mark.parametrize("name", CORPUS_NAMES)
def test_corpus_invariants(name, rng, backend):
    h = named_pattern(name)
    budget = 10**12
    for _ in range(2):
        g = random_graph(rng, 9, 18)
        vh = vertex_homs(h, g).counts
        hom = oracle_hom(h, g, budget=budget)
        assert all(int(row.sum()) == hom for row in vh)  # column-sum law
        assert np.array_equal(vh, oracle_vertex_homs(h, g, budget=budget))
        t = orbit_homs(h, g)
        assert t.hom_total == hom
        assert np.array_equal(t.counts, oracle_orbit_homs(h, g, budget=budget))
        for i, orb in enumerate(t.orbits.orbits):
            sub = vh[list(orb)]
            assert np.all(sub.max(axis=0) <= t.counts[i])
            assert np.all(t.counts[i] <= sub.sum(axis=0))
        og = degeneracy_orientation(g)
        assert sum(int(vertex_homs_for_orientation(p, og)[0].sum()) for p in acyclic_orientations(h)) == hom


@pytest.mark.parametrize("name", ["C4", "P5", "diamond", "P6", "K2"])
def test_merge_bijection(name, rng, backend):
    h = named_pattern(name)
    g = random_graph(rng, 8, 15)
    for orb in automorphism_orbits(h).orbits:
        for S in orbit_independent_sets(h, orb):
            m = merge_pattern(h, S)
            got = vertex_homs(m.base, g).counts[m.merged_vertex]
            ref = [oracle_all_vertices_hom(h, g, S, v) for v in range(g.n)]
            assert got.tolist() == ref


@given(graphs(max_n=8))
def test_orbit_homs_property(g):
    for name in ["P4", "C4", "paw"]:
        h = named_pattern(name)
        t1 = orbit_homs(h, g)
        assert np.array_equal(t1.counts, oracle_orbit_homs(h, g))
        assert t1.to_tsv() == orbit_homs(h, g, threads=3).to_tsv()


@pytest.mark.parametrize("name", ["C5", "P6", "diamond"])
def test_wide_key_fallback_matches_radix_path(name, rng, monkeypatch):
    h = named_pattern(name)
    g = random_graph(rng, 18, 50)
    expected = orbit_homs(h, g).counts
    monkeypatch.setattr(engine, "_RADIX_LIMIT", 1)
    assert np.array_equal(orbit_homs(h, g).counts, expected)


def test_evaluator_releases_everything():
    h = named_pattern("C5")
    og = degeneracy_orientation(random_graph(np.random.default_rng(3), 20, 45))
    roots = set()
    for p in acyclic_orientations(h):
        plan = orientation_plan(p)
        roots.update(plan.root_sigs[x] for x, _ in plan.schedule)
    ev = engine._Evaluator(og, roots=list(roots))
    for r in roots:
        ev.root(r)
    assert ev._cache == {}
    assert all(v == 0 for v in ev._uses.values())


def test_shared_structure_is_deduplicated():
    h = named_pattern("C5")
    rootings = 0
    roots = set()
    for p in acyclic_orientations(h):
        plan = orientation_plan(p)
        rootings += len(plan.schedule)
        roots.update(plan.root_sigs[x] for x, _ in plan.schedule)
    assert len(roots) < rootings
