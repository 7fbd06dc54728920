"""Exact per-vertex orbit homomorphism counts for small patterns in sparse graphs."""

from .decomposition import DagTreeDecomposition, reach, sources, verify_separator, width1_decomposition
from .engine import (
    OrbitHomTable,
    VertexHomTable,
    aggregate,
    build_extension_dictionary,
    enumerate_bag_homomorphisms,
    orbit_homs,
    vertex_homs,
)
from .errors import (
    ArithmeticOverflow,
    BudgetExceeded,
    DichotomyViolation,
    InvalidMergeSet,
    InvalidPattern,
    NoWidthOneDecomposition,
    OrbitHomError,
    ParseError,
    PatternTooLarge,
)
from .graph import (
    DegeneracyOrdering,
    Graph,
    OrientedGraph,
    degeneracy_order,
    degeneracy_orientation,
    load_graph,
    orient_acyclic,
    random_degenerate_graph,
    read_graph,
)
from .oracle import oracle_hom, oracle_orbit_homs, oracle_vertex_homs
from .pattern import (
    DagPattern,
    Pattern,
    acyclic_orientations,
    analyze,
    automorphism_orbits,
    licl,
    lipco,
    load_pattern,
    merge_pattern,
    named_pattern,
    orbit_independent_sets,
    read_pattern,
    verdict,
)

__version__ = "0.1.0"
