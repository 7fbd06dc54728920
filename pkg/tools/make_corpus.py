"""Regenerate corpus/: every named pattern on a few seeded random graphs.

Expected TSVs come from the brute-force oracle, never from the engine.
"""

from pathlib import Path

import numpy as np

from orbithom.engine import OrbitHomTable
from orbithom.graph import Graph, format_edge_list
from orbithom.oracle import DEFAULT_BUDGET, oracle_orbit_homs
from orbithom.pattern import automorphism_orbits, named_pattern

NAMES = ["K2", "P3", "P4", "P5", "P6", "K3", "K4", "C4", "C5", "paw", "diamond", "P7+triangle"]
OUT = Path(__file__).resolve().parent.parent / "corpus"


def random_graph(rng, n, m):
    pairs = np.array([(u, v) for u in range(n) for v in range(u + 1, n)])
    pick = rng.choice(len(pairs), size=min(m, len(pairs)), replace=False)
    return Graph.from_edges(n, pairs[pick])


def main():
    rng = np.random.default_rng(20240607)
    OUT.mkdir(exist_ok=True)
    for name in NAMES:
        h = named_pattern(name)
        slug = name.replace("+", "_")
        for j in range(2):
            # keep n ** k within the default oracle budget so verify checks everything
            cap = max(n for n in range(2, 25) if n**h.k <= DEFAULT_BUDGET)
            n = int(rng.integers(min(8, cap), cap + 1))
            m = int(rng.integers(n, min(3 * n, n * (n - 1) // 2) + 1))
            g = random_graph(rng, n, m)
            stem = OUT / f"{slug}_{j}"
            stem.with_suffix(".pattern").write_text(h.to_text())
            stem.with_suffix(".graph").write_text(format_edge_list(g))
            table = OrbitHomTable(h, automorphism_orbits(h), oracle_orbit_homs(h, g, budget=DEFAULT_BUDGET))
            (OUT / f"{slug}_{j}.expected.tsv").write_text(table.to_tsv())


if __name__ == "__main__":
    main()
