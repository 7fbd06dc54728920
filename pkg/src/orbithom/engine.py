"""Per-vertex homomorphism and orbit counts on degeneracy-oriented graphs.

Pipeline for a pattern ``H`` and graph ``G``:

1. orient ``G`` along a degeneracy order (out-degree <= kappa);
2. for every acyclic orientation ``P`` of ``H`` take a width-one DAG-tree
   decomposition over its sources, enumerate the homomorphisms of each
   source's reach set, and combine them bottom-up into extension counts;
   summing extension counts grouped by the image of a pattern vertex gives
   that vertex's per-graph-vertex count;
3. for orbit counts, combine the per-vertex counts of every merged pattern
   ``H_S`` (``S`` an independent subset of the orbit) with signs
   ``(-1) ** (|S| + 1)``.

Bag homomorphism tables are numpy row matrices ("keys"), one column per
pattern vertex in a fixed topological order. Child tables are reduced to
the vertices shared with the parent and looked up by integer codes.
"""

import logging
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import kernels
from .decomposition import DagTreeDecomposition, reach, width1_decomposition
from .errors import ArithmeticOverflow, DichotomyViolation
from .graph import Graph, OrientedGraph, degeneracy_orientation
from .pattern import (
    DagPattern,
    OrbitPartition,
    Pattern,
    acyclic_orientations,
    automorphism_orbits,
    find_isomorphism,
    isomorphism_classes,
    licl,
    lipco,
    merge_pattern,
    orbit_independent_sets,
)

log = logging.getLogger(__name__)

_RADIX_LIMIT = 2**62


# ---------------------------------------------------------------------------
# pattern-side plans


@dataclass(frozen=True)
class BagPlan:
    source: int
    columns: tuple  # pattern vertices, topological order, columns[0] == source
    parent_col: tuple
    extra_ptr: tuple
    extra_cols: tuple

    def col(self, v: int) -> int:
        return self.columns.index(v)

    @property
    def shape(self) -> tuple:
        """Bags with equal shapes have identical row tables on any graph."""
        return (self.parent_col, self.extra_ptr, self.extra_cols)


@dataclass(frozen=True)
class OrientationPlan:
    """Everything graph-independent about counting one orientation.

    A message ``child -> parent`` is fully described by its signature: the
    child's bag shape, the child columns it is keyed on, and the signatures
    of the messages flowing into the child from its other neighbors, each
    with the child columns it is looked up on. A root signature is the same
    without the key columns. Equal signatures give equal tables on every
    graph, so orientations and merged patterns that share structure share
    work.
    """

    dag: DagPattern
    tree: DagTreeDecomposition
    bags: tuple  # BagPlan per tree node
    shared: dict  # (child, parent) -> (columns in child, columns in parent)
    message_sigs: dict  # (child, parent) -> signature
    root_sigs: tuple  # per node
    schedule: tuple  # (node, ((column, pattern vertex), ...)) in rooting order


@lru_cache(maxsize=None)
def bag_plan(p: DagPattern, s: int) -> BagPlan:
    verts = reach(p, [s])
    columns = tuple(p.topological_order(verts))
    col_of = {v: i for i, v in enumerate(columns)}
    parent_col = [0]
    extra_ptr = [0, 0]
    extra_cols = []
    for v in columns[1:]:
        ins = sorted(col_of[u] for u in p.in_neighbors(v) if u in col_of)
        parent_col.append(ins[0])
        extra_cols.extend(ins[1:])
        extra_ptr.append(len(extra_cols))
    return BagPlan(s, columns, tuple(parent_col), tuple(extra_ptr), tuple(extra_cols))


def orientation_plan(p: DagPattern) -> OrientationPlan:
    """Plan for ``p`` over its first width-one decomposition."""
    tree = width1_decomposition(p)
    return _plan(p, tree.bags, tree.edges)


@lru_cache(maxsize=None)
def _plan(p: DagPattern, tree_bags, tree_edges) -> OrientationPlan:
    tree = DagTreeDecomposition(tree_bags, tree_edges)
    bags = tuple(bag_plan(p, min(b)) for b in tree_bags)
    shared = {}
    for a, b in tree.edges:
        common = sorted(set(bags[a].columns) & set(bags[b].columns))
        ca = tuple(bags[a].col(v) for v in common)
        cb = tuple(bags[b].col(v) for v in common)
        shared[(a, b)] = (ca, cb)
        shared[(b, a)] = (cb, ca)

    message_sigs = {}

    def incoming(node, exclude):
        return tuple(sorted(
            (message_sig(nb, node), shared[(nb, node)][1]) for nb in tree.neighbors(node) if nb != exclude
        ))

    def message_sig(child, parent):
        if (child, parent) not in message_sigs:
            message_sigs[(child, parent)] = (bags[child].shape, shared[(child, parent)][0], incoming(child, parent))
        return message_sigs[(child, parent)]

    root_sigs = tuple((bags[x].shape, incoming(x, -1)) for x in range(len(bags)))
    # each pattern vertex is read off the first rooting whose bag reaches it
    schedule = []
    updated = set()
    for x, bp in enumerate(bags):
        pending = tuple((j, h) for j, h in enumerate(bp.columns) if h not in updated)
        if pending:
            schedule.append((x, pending))
            updated.update(h for _, h in pending)
    return OrientationPlan(p, tree, bags, shared, message_sigs, root_sigs, tuple(schedule))


# ---------------------------------------------------------------------------
# keyed tables


def _radix_ok(w: int, n: int) -> bool:
    return max(n, 1) ** w <= _RADIX_LIMIT


@dataclass
class _Message:
    """Extension counts summed per restriction key.

    Keys are radix codes of the shared columns when they fit in int64;
    otherwise the distinct restricted rows are kept and matched by
    ``np.unique`` at lookup time.
    """

    index: kernels.KeyIndex  # keyed by radix code, or by row id into ``rows``
    rows: np.ndarray  # distinct restricted keys (non-radix mode only)

    @classmethod
    def build(cls, rows, cols, values, n):
        if _radix_ok(len(cols), n):
            return cls(kernels.KeyIndex.from_rows(rows, cols, n, values), None)
        keep = values > 0
        keys = rows[keep][:, list(cols)]
        uniq, ids = np.unique(keys, axis=0, return_inverse=True)
        return cls(kernels.KeyIndex(ids.reshape(-1).astype(np.int64), values[keep]), uniq)

    def multiply_into(self, ext, rows, cols, n):
        if self.rows is None:
            return self.index.multiply_rows(ext, rows, cols, n)
        query = rows[:, list(cols)]
        u = self.rows.shape[0]
        joint, inv = np.unique(np.concatenate([self.rows, query]), axis=0, return_inverse=True)
        inv = inv.reshape(-1).astype(np.int64)
        # translate joint ids back to message row ids; unknown rows get -2
        to_msg = np.full(joint.shape[0], -2, dtype=np.int64)
        to_msg[inv[:u]] = np.arange(u, dtype=np.int64)
        return self.index.multiply(ext, to_msg[inv[u:]])


def _enumerate(shape, g: OrientedGraph) -> np.ndarray:
    rows = kernels.enumerate_rows(g.indptr, g.indices, g.n, *shape)
    rows.flags.writeable = False
    return rows


class _Evaluator:
    """Bag tables and messages by signature, each computed at most once.

    With ``roots`` given, every table and message is released as soon as
    its last consumer among those root signatures has fetched it. Safe to
    use from several threads: a message only waits on strictly smaller
    signatures, so the per-key locks cannot deadlock.
    """

    def __init__(self, g: OrientedGraph, roots=None):
        self.g = g
        self._cache = {}
        self._locks = {}
        self._guard = threading.Lock()
        self._uses = None if roots is None else self._count_uses(roots)

    @staticmethod
    def _count_uses(roots) -> Counter:
        uses = Counter()
        seen = set()

        def consume(shape, incoming):
            uses[("rows", shape)] += 1
            for sig, _ in incoming:
                uses[("msg", sig)] += 1
                if sig not in seen:
                    seen.add(sig)
                    consume(sig[0], sig[2])

        for shape, incoming in set(roots):
            consume(shape, incoming)
        return uses

    def _get(self, key, build):
        with self._guard:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            value = self._cache.get(key)
            if value is None:
                value = build()
                self._cache[key] = value
            if self._uses is not None:
                self._uses[key] -= 1
                if self._uses[key] == 0:
                    del self._cache[key]
        return value

    def rows(self, shape) -> np.ndarray:
        return self._get(("rows", shape), lambda: _enumerate(shape, self.g))

    def message(self, sig) -> _Message:
        def build():
            shape, key_cols, incoming = sig
            rows = self.rows(shape)
            return _Message.build(rows, key_cols, self._ext(rows, incoming), self.g.n)

        return self._get(("msg", sig), build)

    def _ext(self, rows, incoming) -> np.ndarray:
        ext = np.ones(rows.shape[0], dtype=np.int64)
        for sig, cols in incoming:
            ext = self.message(sig).multiply_into(ext, rows, cols, self.g.n)
        return ext

    def root(self, root_sig):
        """``(rows, ext)``: bag maps of the root and their extension counts over the whole pattern."""
        shape, incoming = root_sig
        rows = self.rows(shape)
        return rows, self._ext(rows, incoming)


def _count_orientations(units, ks, og: OrientedGraph, threads: int, wanted=None) -> list:
    """Sum of per-vertex tables over ``units`` = [(target index, DagPattern), ...].

    ``ks[i]`` is the vertex count of target ``i``; ``wanted[i]``, when given,
    limits target ``i`` to those pattern vertices (other rows stay zero).
    Each distinct (root signature, column) count vector is computed once and
    added to every target vertex that needs it.
    """
    targets = {}  # root signature -> column -> [(target, pattern vertex)]
    for i, p in units:
        plan = orientation_plan(p)
        for node, pending in plan.schedule:
            for j, h in pending:
                if wanted is None or h in wanted[i]:
                    cols = targets.setdefault(plan.root_sigs[node], {})
                    cols.setdefault(j, []).append((i, h))
    ev = _Evaluator(og, roots=list(targets))
    out = [np.zeros((k, og.n), dtype=np.int64) for k in ks]
    lock = threading.Lock()

    def work(root_sig):
        rows, ext = ev.root(root_sig)
        for j, dests in targets[root_sig].items():
            col = np.zeros(og.n, dtype=np.int64)
            kernels.scatter_add(col, rows[:, j], ext)
            # counts are nonnegative, so the order of these exact additions
            # (and hence thread scheduling) cannot change the result
            with lock:
                for i, h in dests:
                    out[i][h] = kernels.checked_add(out[i][h], col)

    _map_units(work, list(targets), threads)
    return out


# ---------------------------------------------------------------------------
# public operations


def enumerate_bag_homomorphisms(p: DagPattern, B, g: OrientedGraph):
    """Homomorphisms of the pattern induced by ``Reach(B)`` for a singleton bag.

    Returns ``(columns, rows)``: ``rows[i, j]`` is the image of pattern
    vertex ``columns[j]``.
    """
    (s,) = tuple(B)
    bp = bag_plan(p, s)
    rows = kernels.enumerate_rows(g.indptr, g.indices, g.n, bp.parent_col, bp.extra_ptr, bp.extra_cols)
    return bp.columns, rows


@dataclass
class ExtensionDictionary:
    bag: int  # source vertex of the root bag
    columns: tuple
    keys: np.ndarray
    values: np.ndarray

    def as_dict(self) -> dict:
        return {tuple(r): int(c) for r, c in zip(self.keys.tolist(), self.values.tolist())}

    def __len__(self):
        return self.keys.shape[0]


def build_extension_dictionary(p: DagPattern, t: DagTreeDecomposition, g: OrientedGraph) -> ExtensionDictionary:
    """Extension counts over the whole pattern for every map of the root bag.

    Maps with zero extensions are omitted.
    """
    if t.width != 1:
        raise ValueError("only width-one decompositions are supported")
    if any(len(b) != 1 for b in t.bags):
        raise ValueError("bags must be singletons")
    plan = _plan(p, t.bags, t.edges)
    rows, ext = _Evaluator(g).root(plan.root_sigs[t.root])
    keep = ext > 0
    bp = plan.bags[t.root]
    return ExtensionDictionary(bp.source, bp.columns, rows[keep], ext[keep])


def vertex_homs_for_orientation(p: DagPattern, g: OrientedGraph) -> np.ndarray:
    """``counts[h, v]``: homomorphisms of ``p`` into ``g`` mapping ``h`` to ``v``.

    Roots the decomposition at each bag in turn; a pattern vertex is filled
    from the first rooting whose bag reaches it.
    """
    (counts,) = _count_orientations([(0, p)], [p.k], g, threads=1)
    return counts


@dataclass
class VertexHomTable:
    pattern: Pattern
    counts: np.ndarray  # (k, n)

    def total(self) -> int:
        """Hom(H, G) read off the first pattern vertex's column sum."""
        return _exact_sum(self.counts[0])


@dataclass
class OrbitHomTable:
    pattern: Pattern
    orbits: OrbitPartition
    counts: np.ndarray  # (number of orbits, n)
    hom_total: Optional[int] = None  # Hom(H, G), when known

    def column(self, psi) -> np.ndarray:
        return self.counts[_orbit_index(self.orbits, psi)]

    def to_tsv(self, labels=None) -> str:
        reps = self.orbits.representatives
        n = self.counts.shape[1]
        vertex = np.arange(n) if labels is None else np.asarray(labels)
        lines = ["vertex\torbit_rep\tcount"]
        for v in range(n):
            for i, rep in enumerate(reps):
                lines.append(f"{vertex[v]}\t{rep}\t{self.counts[i, v]}")
        return "\n".join(lines) + "\n"


def _exact_sum(arr) -> int:
    total = sum(int(x) for x in arr.tolist())
    if total > kernels.INT64_MAX:
        raise ArithmeticOverflow(f"aggregate {total} exceeds the int64 accumulator")
    return total


def _orbit_index(orbits: OrbitPartition, psi) -> int:
    if isinstance(psi, (int, np.integer)):
        return orbits.orbit_of[int(psi)]
    return orbits.orbits.index(tuple(sorted(psi)))


def _map_units(fn, units, threads):
    if threads <= 1 or len(units) <= 1:
        return [fn(u) for u in units]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, units))


def _vertex_counts_many(patterns, og: OrientedGraph, threads: int, wanted=None) -> list:
    """Per-vertex tables for several patterns, summed over all their orientations."""
    units = [(i, p) for i, h in enumerate(patterns) for p in acyclic_orientations(h)]
    return _count_orientations(units, [h.k for h in patterns], og, threads, wanted)


def vertex_homs(h: Pattern, g: Graph, threads: int = 1, oriented: OrientedGraph = None) -> VertexHomTable:
    """Per-vertex counts of ``h`` in ``g``; requires LICL(h) <= 5."""
    if licl(h) > 5:
        raise DichotomyViolation(f"LICL(H) = {licl(h)} > 5; per-vertex counting is not near-linear")
    og = degeneracy_orientation(g) if oriented is None else oriented
    (counts,) = _vertex_counts_many([h], og, threads)
    return VertexHomTable(h, counts)


@dataclass(frozen=True)
class OrbitTerm:
    pattern: int  # index into OrbitPlan.patterns
    vertex: int  # merged vertex, in that pattern's labels
    coefficient: int  # signed number of independent sets in this class


@dataclass(frozen=True)
class OrbitPlan:
    orbits: OrbitPartition
    patterns: tuple  # pairwise non-isomorphic merged patterns
    terms: tuple  # per orbit, a tuple of OrbitTerm


@lru_cache(maxsize=None)
def orbit_plan(h: Pattern) -> OrbitPlan:
    """Inclusion-exclusion terms for every orbit, deduplicated up to isomorphism."""
    part = automorphism_orbits(h)
    patterns = []
    terms = []
    for orb in part.orbits:
        merged = [merge_pattern(h, S) for S in orbit_independent_sets(h, orb)]
        classes = isomorphism_classes(
            [m.base for m in merged], [m.sign for m in merged], [m.merged_vertex for m in merged]
        )
        orbit_terms = []
        for cls in classes:
            if cls.tally == 0:
                continue
            rep = merged[cls.representative]
            for idx, q in enumerate(patterns):
                sigma = find_isomorphism(rep.base, q)
                if sigma is not None:
                    orbit_terms.append(OrbitTerm(idx, sigma[rep.merged_vertex], cls.tally))
                    break
            else:
                patterns.append(rep.base)
                orbit_terms.append(OrbitTerm(len(patterns) - 1, rep.merged_vertex, cls.tally))
        terms.append(tuple(orbit_terms))
    return OrbitPlan(part, tuple(patterns), tuple(terms))


def orbit_homs(h: Pattern, g: Graph, threads: int = 1, oriented: OrientedGraph = None) -> OrbitHomTable:
    """Orbit counts of ``h`` in ``g``; requires LIPCO(h) <= 5."""
    if lipco(h) > 5:
        raise DichotomyViolation(f"LIPCO(H) = {lipco(h)} > 5; orbit counting is conjecturally not near-linear")
    og = degeneracy_orientation(g) if oriented is None else oriented
    plan = orbit_plan(h)
    wanted = [set() for _ in plan.patterns]
    for orbit_terms in plan.terms:
        for term in orbit_terms:
            wanted[term.pattern].add(term.vertex)
    tables = _vertex_counts_many(plan.patterns, og, threads, wanted)
    counts = np.zeros((len(plan.orbits), og.n), dtype=np.int64)
    for i, orbit_terms in enumerate(plan.terms):
        acc = np.zeros(og.n, dtype=np.int64)
        for term in orbit_terms:
            acc = kernels.checked_add(acc, kernels.checked_mul(tables[term.pattern][term.vertex], term.coefficient))
        if np.any(acc < 0):
            raise AssertionError("inclusion-exclusion produced a negative orbit count")
        counts[i] = acc
    # H itself is among the merged patterns (any singleton set) and every
    # row of a vertex table sums to the hom count, so Hom(H, G) comes for free
    own = next(i for i, q in enumerate(plan.patterns) if find_isomorphism(h, q) is not None)
    total = _exact_sum(tables[own][min(wanted[own])])
    return OrbitHomTable(h, plan.orbits, counts, total)


def aggregate(t: OrbitHomTable, psi) -> int:
    """Orbit counts of ``psi`` summed over all graph vertices."""
    return _exact_sum(t.column(psi))
