"""Small-pattern combinatorics.

Everything here is exhaustive search over a pattern with at most ``K_MAX``
vertices: automorphisms, orbits, induced cycles and paths, independent
subsets of orbits, vertex merging, acyclic orientations and isomorphism.
"""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Optional

from .errors import InvalidMergeSet, InvalidPattern, PatternTooLarge
from .graph import parse_edge_list

log = logging.getLogger(__name__)

DEFAULT_K_MAX = 8
K_MAX = DEFAULT_K_MAX

LINEAR = "LINEAR"
HARD = "CONJECTURALLY-HARD"


def set_k_max(value: int) -> None:
    global K_MAX
    if value < 1:
        raise ValueError("K_MAX must be positive")
    if value > DEFAULT_K_MAX:
        log.warning("K_MAX=%d: pattern searches scale with k! and may become slow", value)
    K_MAX = value


@dataclass(frozen=True)
class Pattern:
    """Connected simple pattern on vertices ``0..k-1``.

    ``edges`` is a sorted tuple of pairs ``(u, v)`` with ``u < v``.
    """

    k: int
    edges: tuple

    def __post_init__(self):
        if self.k < 1:
            raise InvalidPattern("pattern needs at least one vertex")
        if self.k > K_MAX:
            raise PatternTooLarge(f"pattern has {self.k} vertices, K_MAX is {K_MAX}")
        for u, v in self.edges:
            if not (0 <= u < v < self.k):
                raise InvalidPattern(f"bad edge {(u, v)}")
        if len(set(self.edges)) != len(self.edges):
            raise InvalidPattern("duplicate edges")
        if not self._connected():
            raise InvalidPattern("pattern must be connected")

    @classmethod
    def from_edges(cls, edges, k: Optional[int] = None) -> "Pattern":
        norm = sorted({(min(u, v), max(u, v)) for u, v in edges})
        if any(u == v for u, v in norm):
            raise InvalidPattern("self-loops are not allowed")
        if k is None:
            k = max((v for _, v in norm), default=0) + 1
        return cls(k, tuple(norm))

    @cached_property
    def adj(self) -> tuple:
        """Neighbor bitmask per vertex."""
        masks = [0] * self.k
        for u, v in self.edges:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return tuple(masks)

    def neighbors(self, v: int) -> list:
        return _bits(self.adj[v])

    def degree(self, v: int) -> int:
        return bin(self.adj[v]).count("1")

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def _connected(self) -> bool:
        adj = [0] * self.k
        for u, v in self.edges:
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        seen, frontier = 1, 1
        while frontier:
            nxt = 0
            for v in _bits(frontier):
                nxt |= adj[v]
            frontier = nxt & ~seen
            seen |= nxt
        return seen == (1 << self.k) - 1

    def to_text(self) -> str:
        lines = [f"n {self.k}"] + [f"{u} {v}" for u, v in self.edges]
        return "\n".join(lines) + "\n"


def _bits(mask: int) -> list:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def load_pattern(text: str) -> Pattern:
    declared, edges = parse_edge_list(text)
    k = declared
    if k is None:
        k = max((max(e) for e in edges), default=0) + 1
    return Pattern.from_edges(edges, k=k)


def read_pattern(path) -> Pattern:
    return load_pattern(Path(path).read_text())


# ---------------------------------------------------------------------------
# named patterns


def path_pattern(k: int) -> Pattern:
    """Path on ``k`` vertices (length ``k - 1``)."""
    return Pattern.from_edges([(i, i + 1) for i in range(k - 1)], k=k)


def cycle_pattern(k: int) -> Pattern:
    return Pattern.from_edges([(i, (i + 1) % k) for i in range(k)], k=k)


def clique_pattern(k: int) -> Pattern:
    return Pattern.from_edges(itertools.combinations(range(k), 2), k=k)


def star_pattern(leaves: int) -> Pattern:
    return Pattern.from_edges([(0, i) for i in range(1, leaves + 1)], k=leaves + 1)


NAMED = {
    "K2": lambda: clique_pattern(2),
    "K3": lambda: clique_pattern(3),
    "K4": lambda: clique_pattern(4),
    "P3": lambda: path_pattern(3),
    "P4": lambda: path_pattern(4),
    "P5": lambda: path_pattern(5),
    "P6": lambda: path_pattern(6),
    "P7": lambda: path_pattern(7),
    "C4": lambda: cycle_pattern(4),
    "C5": lambda: cycle_pattern(5),
    "C6": lambda: cycle_pattern(6),
    "paw": lambda: Pattern.from_edges([(0, 1), (0, 2), (1, 2), (2, 3)]),
    "diamond": lambda: Pattern.from_edges([(0, 1), (0, 2), (0, 3), (1, 2), (2, 3)]),
    # 7-path whose last two vertices close a triangle with a new vertex 7
    "P7+triangle": lambda: Pattern.from_edges([(i, i + 1) for i in range(6)] + [(5, 7), (6, 7)]),
}


def named_pattern(name: str) -> Pattern:
    try:
        return NAMED[name]()
    except KeyError:
        raise KeyError(f"unknown pattern {name!r}; known: {', '.join(NAMED)}") from None


# ---------------------------------------------------------------------------
# automorphisms and orbits


@dataclass(frozen=True)
class OrbitPartition:
    orbits: tuple  # tuple of sorted vertex tuples, ordered by representative
    orbit_of: tuple  # vertex -> orbit index

    @property
    def representatives(self) -> tuple:
        return tuple(o[0] for o in self.orbits)

    def __len__(self):
        return len(self.orbits)


def _check_size(h: Pattern) -> None:
    if h.k > K_MAX:
        raise PatternTooLarge(f"pattern has {h.k} vertices, K_MAX is {K_MAX}")


@lru_cache(maxsize=None)
def automorphisms(h: Pattern) -> tuple:
    """All edge-preserving vertex permutations, as tuples ``sigma[v]``.

    Backtracking over the k! bijections, pruning partial maps that already
    break adjacency or degree.
    """
    _check_size(h)
    k = h.k
    deg = [h.degree(v) for v in range(k)]
    sigma = [-1] * k
    used = [False] * k
    out = []

    def extend(i):
        if i == k:
            out.append(tuple(sigma))
            return
        for c in range(k):
            if used[c] or deg[c] != deg[i]:
                continue
            if any(h.has_edge(i, j) != h.has_edge(c, sigma[j]) for j in range(i)):
                continue
            sigma[i] = c
            used[c] = True
            extend(i + 1)
            used[c] = False
        sigma[i] = -1

    extend(0)
    return tuple(out)


@lru_cache(maxsize=None)
def automorphism_orbits(h: Pattern) -> OrbitPartition:
    parent = list(range(h.k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for sigma in automorphisms(h):
        for v, w in enumerate(sigma):
            a, b = find(v), find(w)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups = {}
    for v in range(h.k):
        groups.setdefault(find(v), []).append(v)
    orbits = tuple(sorted(tuple(g) for g in groups.values()))
    orbit_of = [0] * h.k
    for i, orb in enumerate(orbits):
        degs = {h.degree(v) for v in orb}
        assert len(degs) == 1, "orbit with unequal degrees"
        for v in orb:
            orbit_of[v] = i
    return OrbitPartition(orbits, tuple(orbit_of))


# ---------------------------------------------------------------------------
# induced cycles and paths


def _induced_search(h: Pattern, start: int, on_path, on_cycle) -> None:
    """Enumerate induced paths starting at ``start``.

    ``on_path(end, length)`` fires for every induced path start..end with
    length >= 1; ``on_cycle(length)`` fires for every chordless cycle through
    ``start``.
    """
    adj = h.adj

    def dfs(last, length, on_path_mask, blocked):
        for y in _bits(adj[last] & ~on_path_mask & ~blocked):
            if length >= 1 and adj[start] >> y & 1:
                on_cycle(length + 2)
                continue
            on_path(y, length + 1)
            dfs(y, length + 1, on_path_mask | 1 << y,
                blocked | adj[last] if length >= 1 else blocked)

    dfs(start, 0, 1 << start, 0)


@lru_cache(maxsize=None)
def licl(h: Pattern) -> int:
    """Length of the longest chordless cycle; 0 for forests."""
    best = 0

    def cyc(length):
        nonlocal best
        best = max(best, length)

    for s in range(h.k):
        _induced_search(h, s, lambda y, length: None, cyc)
    return best


@lru_cache(maxsize=None)
def lipco(h: Pattern) -> int:
    """Longest induced path between two vertices of one orbit.

    A path from a vertex back to itself is a chordless cycle through it.
    Lengths count edges; 0 when no such path exists.
    """
    orbit_of = automorphism_orbits(h).orbit_of
    best = 0
    for s in range(h.k):
        def path(y, length, s=s):
            nonlocal best
            if orbit_of[y] == orbit_of[s]:
                best = max(best, length)

        def cyc(length):
            nonlocal best
            best = max(best, length)

        _induced_search(h, s, path, cyc)
    return best


def verdict(h: Pattern) -> str:
    return LINEAR if lipco(h) <= 5 else HARD


# ---------------------------------------------------------------------------
# independent subsets of orbits and merged patterns


def is_independent(h: Pattern, vertices) -> bool:
    mask = 0
    for v in vertices:
        mask |= 1 << v
    return all(not (h.adj[v] & mask) for v in vertices)


def orbit_independent_sets(h: Pattern, psi) -> list:
    """Nonempty independent subsets of ``psi``, by size then lexicographic."""
    psi = sorted(psi)
    out = []
    for size in range(1, len(psi) + 1):
        for combo in itertools.combinations(psi, size):
            if is_independent(h, combo):
                out.append(combo)
    return out


@dataclass(frozen=True)
class MergedPattern:
    base: Pattern
    merged_vertex: int
    source_set: tuple
    sign: int
    relabel: tuple  # original vertex -> vertex of ``base``


def merge_pattern(h: Pattern, S) -> MergedPattern:
    """Contract the independent set ``S`` into one vertex.

    Survivors keep their relative order; the merged vertex takes the slot
    of ``min(S)``. Sign is ``(-1) ** (|S| + 1)``.
    """
    S = tuple(sorted(set(S)))
    if not S:
        raise InvalidMergeSet("merge set is empty")
    if any(not (0 <= v < h.k) for v in S):
        raise InvalidMergeSet(f"merge set {S} has vertices outside the pattern")
    if not is_independent(h, S):
        raise InvalidMergeSet(f"merge set {S} is not independent")
    keep = [v for v in range(h.k) if v not in S[1:]]
    new_id = {v: i for i, v in enumerate(keep)}
    hs = new_id[S[0]]
    relabel = tuple(hs if v in S else new_id[v] for v in range(h.k))
    edges = {tuple(sorted((relabel[u], relabel[v]))) for u, v in h.edges}
    base = Pattern.from_edges(edges, k=len(keep))
    return MergedPattern(base, hs, S, -1 if len(S) % 2 == 0 else 1, relabel)


# ---------------------------------------------------------------------------
# acyclic orientations


@dataclass(frozen=True)
class DagPattern:
    """Acyclic orientation of ``base``; ``arcs`` is a sorted tuple of (tail, head)."""

    base: Pattern
    arcs: tuple

    def __post_init__(self):
        arcs = tuple(sorted(tuple(a) for a in self.arcs))
        object.__setattr__(self, "arcs", arcs)
        if sorted(tuple(sorted(a)) for a in arcs) != list(self.base.edges):
            raise InvalidPattern("arcs must orient every pattern edge exactly once")
        self.topological_order()

    @property
    def k(self) -> int:
        return self.base.k

    @cached_property
    def out_mask(self) -> tuple:
        masks = [0] * self.k
        for u, v in self.arcs:
            masks[u] |= 1 << v
        return tuple(masks)

    @cached_property
    def in_mask(self) -> tuple:
        masks = [0] * self.k
        for u, v in self.arcs:
            masks[v] |= 1 << u
        return tuple(masks)

    def out_neighbors(self, v: int) -> list:
        return _bits(self.out_mask[v])

    def in_neighbors(self, v: int) -> list:
        return _bits(self.in_mask[v])

    def topological_order(self, subset=None) -> list:
        """Kahn's algorithm with smallest-id tie-break, optionally on an induced subset."""
        members = set(range(self.k)) if subset is None else set(subset)
        indeg = {v: sum(1 for u in self.in_neighbors(v) if u in members) for v in members}
        ready = sorted(v for v, d in indeg.items() if d == 0)
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for w in self.out_neighbors(v):
                if w in members:
                    indeg[w] -= 1
                    if indeg[w] == 0:
                        ready.append(w)
                        ready.sort()
        if len(order) != len(members):
            raise InvalidPattern("orientation has a directed cycle")
        return order


@lru_cache(maxsize=None)
def acyclic_orientations(h: Pattern) -> tuple:
    """Every acyclic orientation exactly once.

    Each vertex order orients edges from earlier to later; distinct
    direction bit vectors are kept, sorted by bit vector.
    """
    _check_size(h)
    masks = {}
    for order in itertools.permutations(range(h.k)):
        pos = [0] * h.k
        for i, v in enumerate(order):
            pos[v] = i
        bits = 0
        for j, (u, v) in enumerate(h.edges):
            if pos[u] > pos[v]:
                bits |= 1 << j
        if bits not in masks:
            masks[bits] = tuple(
                sorted((v, u) if bits >> j & 1 else (u, v) for j, (u, v) in enumerate(h.edges))
            )
    return tuple(DagPattern(h, masks[b]) for b in sorted(masks))


# ---------------------------------------------------------------------------
# isomorphism


def find_isomorphism(a: Pattern, b: Pattern, root_a=None, root_b=None):
    """A bijection ``a -> b`` preserving edges (and ``root_a -> root_b``), or None."""
    if a.k != b.k or len(a.edges) != len(b.edges):
        return None
    if sorted(a.degree(v) for v in range(a.k)) != sorted(b.degree(v) for v in range(b.k)):
        return None
    k = a.k
    sigma = [-1] * k
    used = [False] * k
    order = list(range(k))
    if root_a is not None:
        order.remove(root_a)
        order.insert(0, root_a)

    def extend(i):
        if i == k:
            return True
        x = order[i]
        cands = [root_b] if (i == 0 and root_a is not None) else range(k)
        for c in cands:
            if used[c] or a.degree(x) != b.degree(c):
                continue
            if any(a.has_edge(x, order[j]) != b.has_edge(c, sigma[order[j]]) for j in range(i)):
                continue
            sigma[x] = c
            used[c] = True
            if extend(i + 1):
                return True
            used[c] = False
        sigma[x] = -1
        return False

    return tuple(sigma) if extend(0) else None


@dataclass
class IsoClass:
    representative: int  # index into the input list
    members: list
    tally: int  # sum of member signs


def isomorphism_classes(patterns, signs=None, roots=None) -> list:
    """Group patterns up to isomorphism (rooted when ``roots`` is given).

    ``tally`` of a class is the sum of its members' signs (default +1).
    """
    patterns = list(patterns)
    signs = [1] * len(patterns) if signs is None else list(signs)
    classes = []
    for i, p in enumerate(patterns):
        for cls in classes:
            rep = patterns[cls.representative]
            ra = None if roots is None else roots[i]
            rb = None if roots is None else roots[cls.representative]
            if find_isomorphism(p, rep, ra, rb) is not None:
                cls.members.append(i)
                cls.tally += signs[i]
                break
        else:
            classes.append(IsoClass(i, [i], signs[i]))
    return classes


# ---------------------------------------------------------------------------
# report


def analyze(h: Pattern) -> dict:
    """Machine-readable analysis: orbits, LICL, LIPCO, merged patterns, verdict."""
    part = automorphism_orbits(h)
    inventory = []
    for orb in part.orbits:
        entries = []
        for S in orbit_independent_sets(h, orb):
            mp = merge_pattern(h, S)
            entries.append({
                "set": list(S),
                "sign": mp.sign,
                "merged_vertex": mp.merged_vertex,
                "k": mp.base.k,
                "edges": [list(e) for e in mp.base.edges],
                "licl": licl(mp.base),
            })
        inventory.append({"representative": orb[0], "orbit": list(orb), "merged": entries})
    lp = lipco(h)
    return {
        "k": h.k,
        "edges": [list(e) for e in h.edges],
        "orbits": [list(o) for o in part.orbits],
        "licl": licl(h),
        "lipco": lp,
        "verdict": LINEAR if lp <= 5 else HARD,
        "independent_sets": inventory,
    }
