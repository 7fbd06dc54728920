"""Ground truth by exhaustive enumeration.

Every homomorphism ``V(H) -> V(G)`` is materialized (pattern vertices are
placed in a connected order so that partial maps violating an edge are
dropped early) and the counts are tallied straight from their definitions.
Nothing here uses orientations, decompositions or inclusion-exclusion.
"""

from collections import Counter
from functools import lru_cache

import numpy as np

from .errors import BudgetExceeded
from .graph import Graph, OrientedGraph
from .pattern import DagPattern, Pattern, automorphism_orbits

DEFAULT_BUDGET = 10**8
_CHUNK = 64


def _check_budget(n, k, budget):
    if n**k > budget:
        raise BudgetExceeded(f"{n}^{k} candidate maps exceed the oracle budget {budget}")


@lru_cache(maxsize=None)
def _placement_order(k, pairs):
    """Connected vertex order that closes cycles early.

    Subset DP minimizing the sum over prefixes of ``4 ** (|prefix| - |E(prefix)|)``,
    a rough proxy for the number of partial maps alive at each step.
    """
    adj = [0] * k
    for u, v in pairs:
        adj[u] |= 1 << v
        adj[v] |= 1 << u

    def inner_edges(mask):
        return sum(bin(adj[v] & mask).count("1") for v in range(k) if mask >> v & 1) // 2

    best = {0: (0, ())}
    for mask in range(1, 1 << k):
        size = bin(mask).count("1")
        weight = 4 ** (size - inner_edges(mask))
        options = []
        for v in range(k):
            if not mask >> v & 1:
                continue
            rest = mask & ~(1 << v)
            if rest and not adj[v] & rest:
                continue
            if rest in best:
                cost, order = best[rest]
                options.append((cost + weight, order + (v,)))
        if options:
            best[mask] = min(options)
    full = (1 << k) - 1
    if full in best:
        return list(best[full][1])
    return list(range(k))


class _Arcs:
    """Arc set of a (di)graph with CSR out/in lists and sorted arc codes."""

    def __init__(self, n, src, dst):
        self.n = n
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        self.codes = src * max(n, 1) + dst
        self.out_ptr = np.concatenate([[0], np.cumsum(np.bincount(src, minlength=n))]).astype(np.int64)
        self.out_idx = dst
        order = np.lexsort((src, dst))
        self.in_ptr = np.concatenate([[0], np.cumsum(np.bincount(dst[order], minlength=n))]).astype(np.int64)
        self.in_idx = src[order]

    def has(self, a, b):
        q = a * max(self.n, 1) + b
        pos = np.searchsorted(self.codes, q)
        hit = pos < self.codes.size
        hit[hit] = self.codes[pos[hit]] == q[hit]
        return hit


def _expand(rows, anchor, ptr, idx):
    start = ptr[anchor]
    deg = ptr[anchor + 1] - start
    which = np.repeat(np.arange(rows.shape[0]), deg)
    offs = np.arange(which.size) - np.repeat(np.cumsum(deg) - deg, deg)
    return which, idx[np.repeat(start, deg) + offs]


def _enumerate(k, arcs_pattern, arcs: _Arcs, directed):
    """Yield chunks of homomorphisms as ``(rows, k)`` arrays (column = pattern vertex)."""
    n = arcs.n
    if n == 0:
        return
    pairs = list(arcs_pattern)
    order = _placement_order(k, tuple(pairs))
    for lo in range(0, n, _CHUNK):
        starts = np.arange(lo, min(n, lo + _CHUNK), dtype=np.int64)
        rows = np.full((starts.size, k), -1, dtype=np.int64)
        rows[:, order[0]] = starts
        placed = {order[0]}
        for t in order[1:]:
            # (placed vertex, True if the arc points from it to t)
            cons = [(u, True) for u, v in pairs if v == t and u in placed]
            cons += [(v, False) for u, v in pairs if u == t and v in placed]
            if not cons:
                which = np.repeat(np.arange(rows.shape[0]), n)
                cand = np.tile(np.arange(n, dtype=np.int64), rows.shape[0])
            else:
                u, forward = cons[0]
                if forward or not directed:
                    which, cand = _expand(rows, rows[:, u], arcs.out_ptr, arcs.out_idx)
                else:
                    which, cand = _expand(rows, rows[:, u], arcs.in_ptr, arcs.in_idx)
            keep = np.ones(which.size, dtype=bool)
            for u, forward in cons[1:]:
                other = rows[which, u]
                keep &= arcs.has(other, cand) if (forward or not directed) else arcs.has(cand, other)
            rows = rows[which[keep]]
            rows[:, t] = cand[keep]
            placed.add(t)
            if rows.shape[0] == 0:
                break
        if rows.shape[0]:
            yield rows


def _graph_arcs(g: Graph) -> _Arcs:
    src = np.repeat(np.arange(g.n, dtype=np.int64), g.degrees())
    return _Arcs(g.n, src, g.indices.astype(np.int64))


def homomorphism_chunks(h: Pattern, g: Graph, budget=DEFAULT_BUDGET):
    _check_budget(g.n, h.k, budget)
    return _enumerate(h.k, h.edges, _graph_arcs(g), directed=False)


def oracle_hom(h: Pattern, g: Graph, budget=DEFAULT_BUDGET) -> int:
    """Number of edge-preserving maps from ``h`` to ``g``."""
    return sum(int(rows.shape[0]) for rows in homomorphism_chunks(h, g, budget))


def oracle_dag_hom(p: DagPattern, g: OrientedGraph, budget=DEFAULT_BUDGET) -> int:
    """Number of arc-preserving maps from the oriented pattern ``p`` to ``g``."""
    _check_budget(g.n, p.k, budget)
    arcs = g.arc_array()
    a = _Arcs(g.n, arcs[:, 0].copy(), arcs[:, 1].copy())
    return sum(int(rows.shape[0]) for rows in _enumerate(p.k, p.arcs, a, directed=True))


def oracle_vertex_homs(h: Pattern, g: Graph, budget=DEFAULT_BUDGET) -> np.ndarray:
    """``counts[x, v]``: homomorphisms sending pattern vertex ``x`` to ``v``."""
    counts = np.zeros((h.k, g.n), dtype=np.int64)
    for rows in homomorphism_chunks(h, g, budget):
        for x in range(h.k):
            counts[x] += np.bincount(rows[:, x], minlength=g.n)
    return counts


def oracle_orbit_homs(h: Pattern, g: Graph, budget=DEFAULT_BUDGET) -> np.ndarray:
    """``counts[i, v]``: homomorphisms sending some vertex of orbit ``i`` to ``v``.

    Each homomorphism counts once per vertex it touches within the orbit.
    """
    orbits = automorphism_orbits(h).orbits
    counts = np.zeros((len(orbits), g.n), dtype=np.int64)
    for rows in homomorphism_chunks(h, g, budget):
        for i, orb in enumerate(orbits):
            for j, x in enumerate(orb):
                img = rows[:, x]
                first = np.ones(img.size, dtype=bool)
                for y in orb[:j]:
                    first &= rows[:, y] != img
                counts[i] += np.bincount(img[first], minlength=g.n)
    return counts


def oracle_signature_histogram(h: Pattern, g: Graph, psi, v: int, budget=DEFAULT_BUDGET) -> dict:
    """Map each nonempty signature ``{x in psi : phi(x) = v}`` to its number of homomorphisms."""
    psi = tuple(sorted(psi))
    hist = Counter()
    for rows in homomorphism_chunks(h, g, budget):
        hits = rows[:, list(psi)] == v
        for pattern_row, count in zip(*np.unique(hits, axis=0, return_counts=True)):
            S = tuple(x for x, hit in zip(psi, pattern_row) if hit)
            if S:
                hist[S] += int(count)
    return dict(hist)


def oracle_all_vertices_hom(h: Pattern, g: Graph, S, v: int, budget=DEFAULT_BUDGET) -> int:
    """Homomorphisms sending every vertex of ``S`` to ``v``."""
    total = 0
    for rows in homomorphism_chunks(h, g, budget):
        total += int(np.all(rows[:, list(S)] == v, axis=1).sum())
    return total
