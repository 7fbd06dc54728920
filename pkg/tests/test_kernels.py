import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import graphs
from orbithom import kernels
from orbithom.engine import bag_plan, orbit_homs
from orbithom.errors import ArithmeticOverflow
from orbithom.graph import degeneracy_orientation, random_degenerate_graph
from orbithom.pattern import acyclic_orientations, named_pattern

needs_numba = pytest.mark.skipif("numba" not in kernels.available_backends(), reason="numba unavailable")


def both(fn):
    out = {}
    for be in kernels.available_backends():
        with kernels.use_backend(be):
            out[be] = fn()
    return list(out.values())


@given(graphs(max_n=15))
def test_peel_parity(g):
    results = both(lambda: kernels.peel(g.indptr, g.indices, g.n))
    for order, kappa in results[1:]:
        assert np.array_equal(order, results[0][0]) and kappa == results[0][1]


@pytest.mark.parametrize("name", ["P4", "C4", "C5", "diamond", "K4", "P7+triangle"])
def test_enumerate_parity(name):
    og = degeneracy_orientation(random_degenerate_graph(300, 3, seed=4))
    for p in acyclic_orientations(named_pattern(name))[:12]:
        for s in range(p.k):
            if p.in_mask[s]:
                continue
            bp = bag_plan(p, s)
            args = (og.indptr, og.indices, og.n, bp.parent_col, bp.extra_ptr, bp.extra_cols)
            rows = both(lambda: kernels.enumerate_rows(*args))
            for r in rows[1:]:
                assert np.array_equal(r, rows[0])


def test_enumerate_grows_buffer():
    # far more rows than vertices forces the numba buffer to grow
    og = degeneracy_orientation(random_degenerate_graph(50, 6, seed=1))
    p = next(p for p in acyclic_orientations(named_pattern("P5")) if p.arcs == ((0, 1), (1, 2), (2, 3), (3, 4)))
    bp = bag_plan(p, 0)
    args = (og.indptr, og.indices, og.n, bp.parent_col, bp.extra_ptr, bp.extra_cols)
    rows = both(lambda: kernels.enumerate_rows(*args))
    assert rows[0].shape[0] > 1024
    for r in rows[1:]:
        assert np.array_equal(r, rows[0])


@given(
    st.lists(st.tuples(st.integers(0, 40), st.integers(0, 1000)), max_size=60),
    st.lists(st.integers(-3, 45), max_size=40),
)
def test_key_index_parity(pairs, queries):
    codes = np.array([c for c, _ in pairs], dtype=np.int64)
    values = np.array([v for _, v in pairs], dtype=np.int64)
    q = np.array(queries, dtype=np.int64)
    ext = np.arange(1, q.size + 1, dtype=np.int64)
    ref = {}
    for c, v in pairs:
        ref[c] = ref.get(c, 0) + v
    expected = np.array([ref.get(x, 0) * e for x, e in zip(queries, ext.tolist())], dtype=np.int64)
    for out in both(lambda: kernels.KeyIndex(codes, values).multiply(ext, q)):
        assert np.array_equal(out, expected)
    for idx in both(lambda: kernels.KeyIndex(codes, values)):
        assert len(idx) == len(ref)


def test_group_sum_sorted():
    uniq, sums = kernels.group_sum(np.array([5, 1, 5, 3, 1]), np.array([1, 2, 3, 4, 5]))
    assert uniq.tolist() == [1, 3, 5] and sums.tolist() == [7, 4, 4]


@pytest.mark.parametrize("be", kernels.available_backends())
def test_overflow_detection(be):
    big = np.array([2**62, 2**62], dtype=np.int64)
    with kernels.use_backend(be):
        with pytest.raises(ArithmeticOverflow):
            kernels.KeyIndex(np.array([7, 7]), big)
        idx = kernels.KeyIndex(np.array([7]), np.array([2**40]))
        with pytest.raises(ArithmeticOverflow):
            idx.multiply(np.array([2**30], dtype=np.int64), np.array([7]))
        acc = np.array([2**62], dtype=np.int64)
        with pytest.raises(ArithmeticOverflow):
            kernels.scatter_add(acc, np.array([0, 0]), big)
        # near the limit but exact: must not be flagged
        acc = np.array([2**62], dtype=np.int64)
        kernels.scatter_add(acc, np.array([0]), np.array([2**62 - 1]))
        assert acc[0] == 2**63 - 1


def test_checked_helpers():
    with pytest.raises(ArithmeticOverflow):
        kernels.checked_mul(np.array([2**32]), np.array([2**31]))
    with pytest.raises(ArithmeticOverflow):
        kernels.checked_add(np.array([2**62]), np.array([2**62]))
    assert kernels.checked_add(np.array([-5]), np.array([3])).tolist() == [-2]
    assert kernels.checked_mul(np.array([2**31]), -3).tolist() == [-3 * 2**31]


def test_backend_switching():
    old = kernels.get_backend()
    with kernels.use_backend("numpy"):
        assert kernels.get_backend() == "numpy"
    assert kernels.get_backend() == old
    with pytest.raises(ValueError):
        kernels.set_backend("cuda")


@needs_numba
def test_orbit_counts_parity_large():
    g = random_degenerate_graph(3000, 3, seed=11)
    h = named_pattern("C5")
    a, b = both(lambda: orbit_homs(h, g).counts)
    assert np.array_equal(a, b)


def test_env_flag_disables_numba():
    env = dict(os.environ, ORBITHOM_DISABLE_NUMBA="1")
    code = "from orbithom import kernels; print(kernels.get_backend(), kernels.available_backends())"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy ('numpy',)"
