"""Sparse undirected graphs, degeneracy orderings and acyclic orientations."""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import kernels
from .errors import ParseError


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph in CSR form.

    ``indices[indptr[v]:indptr[v + 1]]`` are the sorted neighbors of ``v``.
    ``labels`` maps dense ids back to external ids when the graph was
    loaded with relabeling.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    labels: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return int(self.indices.size // 2)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge_array(self) -> np.ndarray:
        """Edges as an ``(m, 2)`` array with ``u < v``, sorted."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees())
        keep = src < self.indices
        return np.stack([src[keep], self.indices[keep]], axis=1)

    @classmethod
    def from_edges(cls, n, edges, labels=None) -> "Graph":
        """Build from an iterable or ``(m, 2)`` array of vertex pairs.

        Duplicate edges (in either direction) collapse; self-loops raise.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError(f"edge endpoint outside [0, {n})")
        if np.any(e[:, 0] == e[:, 1]):
            raise ParseError("self_loop", "self-loops are not allowed")
        both = np.concatenate([e, e[:, ::-1]]) if e.size else e
        if both.size:
            both = np.unique(both, axis=0)
        indptr = np.zeros(n + 1, dtype=np.int64)
        if both.size:
            np.cumsum(np.bincount(both[:, 0], minlength=n), out=indptr[1:])
        indices = np.ascontiguousarray(both[:, 1]) if both.size else np.zeros(0, np.int64)
        return cls(int(n), indptr, indices, labels)


@dataclass(frozen=True)
class DegeneracyOrdering:
    order: np.ndarray
    kappa: int

    def positions(self) -> np.ndarray:
        pos = np.empty(self.order.size, dtype=np.int64)
        pos[self.order] = np.arange(self.order.size, dtype=np.int64)
        return pos


@dataclass(frozen=True, eq=False)
class OrientedGraph:
    """DAG in CSR form; out-neighbor lists are sorted."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    max_outdegree: int

    def out_neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def arc_array(self) -> np.ndarray:
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        return np.stack([src, self.indices], axis=1)


def parse_edge_list(text: str):
    """Parse the edge-list format shared by graphs and patterns.

    Returns ``(declared_n, edges)`` where ``declared_n`` comes from an
    optional leading ``n <count>`` line (``None`` when absent).
    """
    declared = None
    edges = []
    seen_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "n":
            if seen_data or declared is not None or len(tokens) != 2:
                raise ParseError("syntax", "header 'n <count>' must be the first data line", lineno)
            declared = _parse_id(tokens[1], lineno)
            seen_data = True
            continue
        seen_data = True
        if len(tokens) != 2:
            raise ParseError("syntax", f"expected two vertex ids, got {raw.strip()!r}", lineno)
        u = _parse_id(tokens[0], lineno)
        v = _parse_id(tokens[1], lineno)
        if u == v:
            raise ParseError("self_loop", f"self-loop on vertex {u}", lineno)
        edges.append((u, v))
    return declared, edges


def _parse_id(token, lineno):
    if not token.isdigit():
        raise ParseError("syntax", f"not a nonnegative integer: {token!r}", lineno)
    return int(token)


def load_graph(text: str, relabel: bool = False) -> Graph:
    """Parse an edge-list document into a validated :class:`Graph`.

    With ``relabel=True`` the distinct ids are mapped to ``0..n-1`` in
    increasing order and ``Graph.labels`` holds the original ids.
    """
    declared, edges = parse_edge_list(text)
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if relabel:
        labels, inv = np.unique(e, return_inverse=True)
        return Graph.from_edges(labels.size, inv.reshape(-1, 2), labels=labels)
    n = int(e.max()) + 1 if e.size else 0
    if declared is not None:
        if declared < n:
            raise ParseError("syntax", f"header declares {declared} vertices but id {n - 1} appears")
        n = declared
    return Graph.from_edges(n, e)


def read_graph(path, relabel: bool = False) -> Graph:
    return load_graph(Path(path).read_text(), relabel=relabel)


def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{u} {v}" for u, v in g.edge_array().tolist())
    return "\n".join(lines) + "\n"


def degeneracy_order(g: Graph) -> DegeneracyOrdering:
    """Matula-Beck min-degree peeling; ties go to the smallest vertex id."""
    order, kappa = kernels.peel(g.indptr, g.indices, g.n)
    return DegeneracyOrdering(order, kappa)


def orient_acyclic(g: Graph, o: DegeneracyOrdering) -> OrientedGraph:
    """Direct every edge from the earlier to the later peeled endpoint."""
    pos = o.positions()
    src = np.repeat(np.arange(g.n, dtype=np.int64), g.degrees())
    keep = pos[src] < pos[g.indices]
    out_deg = np.bincount(src[keep], minlength=g.n)
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(out_deg, out=indptr[1:])
    indices = np.ascontiguousarray(g.indices[keep])
    d = int(out_deg.max()) if g.n else 0
    return OrientedGraph(g.n, indptr, indices, d)


def degeneracy_orientation(g: Graph) -> OrientedGraph:
    return orient_acyclic(g, degeneracy_order(g))


def random_degenerate_graph(n: int, kappa: int, seed: int) -> Graph:
    """Random graph with degeneracy at most ``kappa``.

    Every vertex ``v > 0`` links to a uniform earlier vertex (a random
    spanning tree) plus up to ``kappa - 1`` further uniform earlier vertices,
    so each vertex has at most ``kappa`` earlier neighbors.
    """
    if kappa < 1:
        raise ValueError("kappa must be at least 1")
    rng = np.random.default_rng(seed)
    if n < 2:
        return Graph.from_edges(n, [])
    v = np.arange(1, n, dtype=np.int64)
    parent = (rng.random(n - 1) * v).astype(np.int64)
    parts = [np.stack([parent, v], axis=1)]
    if kappa > 1:
        extra = rng.integers(0, kappa, size=n - 1)
        targets = (rng.random((n - 1, kappa - 1)) * v[:, None]).astype(np.int64)
        slot = np.arange(kappa - 1)[None, :] < extra[:, None]
        vv = np.broadcast_to(v[:, None], targets.shape)
        parts.append(np.stack([targets[slot], vv[slot]], axis=1))
    return Graph.from_edges(n, np.concatenate(parts))
