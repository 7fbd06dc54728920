"""Sources, reachability and width-one DAG-tree decompositions of oriented patterns."""

import heapq
import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import NoWidthOneDecomposition
from .pattern import DagPattern


def sources(p: DagPattern) -> tuple:
    """Vertices with no incoming arc, ascending."""
    return tuple(v for v in range(p.k) if p.in_mask[v] == 0)


def reach(p: DagPattern, B) -> frozenset:
    """Vertices reachable from any vertex of ``B`` (including ``B`` itself)."""
    seen = set()
    stack = list(B)
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(p.out_neighbors(v))
    return frozenset(seen)


@dataclass(frozen=True)
class DagTreeDecomposition:
    """Tree over bags of sources.

    ``edges`` are undirected tree edges between node indices; ``parent`` is
    derived from ``root`` (``-1`` at the root).
    """

    bags: tuple  # tuple of frozensets
    edges: tuple
    root: int = 0
    parent: tuple = field(init=False)

    def __post_init__(self):
        parent = [-1] * len(self.bags)
        seen = {self.root}
        stack = [self.root]
        while stack:
            x = stack.pop()
            for y in self.neighbors(x):
                if y not in seen:
                    seen.add(y)
                    parent[y] = x
                    stack.append(y)
        if len(seen) != len(self.bags):
            raise ValueError("decomposition edges do not form a tree")
        object.__setattr__(self, "parent", tuple(parent))

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags)

    def neighbors(self, x: int) -> list:
        out = [b for a, b in self.edges if a == x] + [a for a, b in self.edges if b == x]
        return sorted(out)

    def children(self, x: int) -> list:
        return [y for y in range(len(self.bags)) if self.parent[y] == x]

    def rerooted(self, root: int) -> "DagTreeDecomposition":
        return DagTreeDecomposition(self.bags, self.edges, root)

    def path(self, a: int, b: int) -> list:
        """Nodes on the tree path from ``a`` to ``b`` inclusive."""
        up_a = [a]
        while self.parent[up_a[-1]] != -1:
            up_a.append(self.parent[up_a[-1]])
        up_b = [b]
        while self.parent[up_b[-1]] != -1:
            up_b.append(self.parent[up_b[-1]])
        common = set(up_a) & set(up_b)
        meet = next(x for x in up_a if x in common)
        left = up_a[: up_a.index(meet) + 1]
        right = up_b[: up_b.index(meet)]
        return left + right[::-1]

    def render(self) -> str:
        lines = []

        def walk(x, depth):
            lines.append("  " * depth + "{" + ",".join(map(str, sorted(self.bags[x]))) + "}")
            for c in self.children(x):
                walk(c, depth + 1)

        walk(self.root, 0)
        return "\n".join(lines)


def _prufer_edges(seq, n):
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((min(leaf, x), max(leaf, x)))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    a, b = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append((min(a, b), max(a, b)))
    return tuple(sorted(edges))


def _subtrees_connected(edges, reaches, k) -> bool:
    # separator property <=> for each pattern vertex, the nodes whose reach
    # contains it induce a connected subtree
    for v in range(k):
        holders = {i for i, r in enumerate(reaches) if v in r}
        if len(holders) <= 1:
            continue
        inner = sum(1 for a, b in edges if a in holders and b in holders)
        if inner != len(holders) - 1:
            return False
    return True


@lru_cache(maxsize=None)
def width1_decomposition(p: DagPattern) -> DagTreeDecomposition:
    """First tree (Prüfer order) on singleton source bags with the separator property.

    Raises :class:`NoWidthOneDecomposition` when no such tree exists.
    """
    S = sources(p)
    bags = tuple(frozenset([s]) for s in S)
    reaches = [reach(p, b) for b in bags]
    s = len(S)
    if s == 1:
        return DagTreeDecomposition(bags, ())
    candidates = [((0, 1),)] if s == 2 else (
        _prufer_edges(seq, s) for seq in itertools.product(range(s), repeat=s - 2)
    )
    for edges in candidates:
        if _subtrees_connected(edges, reaches, p.k):
            return DagTreeDecomposition(bags, tuple(edges))
    raise NoWidthOneDecomposition(f"no width-1 DAG-tree decomposition for arcs {p.arcs}")


def verify_separator(t: DagTreeDecomposition, p: DagPattern) -> bool:
    """Check bag containment, coverage and the reach separator property by brute force."""
    S = set(sources(p))
    if any(not b <= S for b in t.bags):
        return False
    if set().union(*t.bags) != S:
        return False
    reaches = [reach(p, b) for b in t.bags]
    nodes = range(len(t.bags))
    for b1, b2 in itertools.combinations(nodes, 2):
        shared = reaches[b1] & reaches[b2]
        for b in t.path(b1, b2):
            if not shared <= reaches[b]:
                return False
    return True


def down_sets(t: DagTreeDecomposition, p: DagPattern) -> list:
    """Per node: vertices reachable from the node's bag or any descendant bag."""
    out = [None] * len(t.bags)

    def visit(x):
        acc = set(reach(p, t.bags[x]))
        for c in t.children(x):
            acc |= visit(c)
        out[x] = frozenset(acc)
        return acc

    visit(t.root)
    return out
