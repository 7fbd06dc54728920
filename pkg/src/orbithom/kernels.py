"""Hot loops of the counting pipeline.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy one.
Both return identical arrays (same values, same row order); only the
internal layout of :class:`KeyIndex` differs (hash table vs. sorted keys). The active
backend is ``"numba"`` when numba imports and ``ORBITHOM_DISABLE_NUMBA`` is
unset, otherwise ``"numpy"``; :func:`use_backend` switches it temporarily.

All counts are int64. Kernels that add or multiply counts detect overflow
exactly and the dispatchers raise :class:`ArithmeticOverflow`. The numba
checks compare against ``INT64_MAX`` up front and assume nonnegative counts.
"""

import heapq
from contextlib import contextmanager

import numpy as np

from ._accel import HAVE_NUMBA, njit, prefetch_row
from .errors import ArithmeticOverflow

INT64_MAX = np.iinfo(np.int64).max
_I64_MAX = np.int64(INT64_MAX)
# float shadows above this value get an exact re-check
_SHADOW_LIMIT = float(2**62)

_backend = "numba" if HAVE_NUMBA else "numpy"


def get_backend():
    return _backend


def set_backend(name):
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is unavailable")
    _backend = name


@contextmanager
def use_backend(name):
    old = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(old)


def available_backends():
    return ("numba", "numpy") if HAVE_NUMBA else ("numpy",)


# ---------------------------------------------------------------------------
# degeneracy peeling


@njit(cache=True, nogil=True)
def _peel_nb(ptr, idx, n):
    deg = np.empty(n, np.int64)
    for v in range(n):
        deg[v] = ptr[v + 1] - ptr[v]
    removed = np.zeros(n, np.bool_)
    order = np.empty(n, np.int64)
    # keys encode (degree, id); stale entries are skipped on pop
    heap = [deg[v] * n + v for v in range(n)]
    heapq.heapify(heap)
    kappa = 0
    pos = 0
    while pos < n:
        key = heapq.heappop(heap)
        d = key // n
        v = key - d * n
        if removed[v] or deg[v] != d:
            continue
        removed[v] = True
        order[pos] = v
        pos += 1
        if d > kappa:
            kappa = d
        for j in range(ptr[v], ptr[v + 1]):
            u = idx[j]
            if not removed[u]:
                deg[u] -= 1
                heapq.heappush(heap, deg[u] * n + u)
    return order, kappa


def _peel_np(ptr, idx, n):
    deg = np.diff(ptr).tolist()
    removed = [False] * n
    order = []
    heap = [(d, v) for v, d in enumerate(deg)]
    heapq.heapify(heap)
    kappa = 0
    idx_list = idx.tolist()
    ptr_list = ptr.tolist()
    while len(order) < n:
        d, v = heapq.heappop(heap)
        if removed[v] or deg[v] != d:
            continue
        removed[v] = True
        order.append(v)
        kappa = max(kappa, d)
        for u in idx_list[ptr_list[v]:ptr_list[v + 1]]:
            if not removed[u]:
                deg[u] -= 1
                heapq.heappush(heap, (deg[u], u))
    return np.asarray(order, dtype=np.int64), kappa


def peel(ptr, idx, n):
    """Min-degree peeling order (smallest id breaks ties) and the degeneracy."""
    if n == 0:
        return np.zeros(0, np.int64), 0
    if _backend == "numba":
        order, kappa = _peel_nb(ptr, idx, np.int64(n))
        return order, int(kappa)
    return _peel_np(ptr, idx, n)


# ---------------------------------------------------------------------------
# enumeration of homomorphisms of a single-source DAG into an oriented graph
#
# Column 0 is the source; column i > 0 is placed among the out-neighbors of
# column parent_col[i], and must also be an out-neighbor of every column in
# extra_cols[extra_ptr[i]:extra_ptr[i + 1]].


@njit(cache=True, nogil=True, inline="always")
def _has_arc(out_ptr, out_idx, a, b):
    lo = out_ptr[a]
    hi = out_ptr[a + 1]
    while lo < hi:
        mid = (lo + hi) >> 1
        x = out_idx[mid]
        if x < b:
            lo = mid + 1
        elif x > b:
            hi = mid
        else:
            return True
    return False


@njit(cache=True, nogil=True)
def _enumerate_nb(out_ptr, out_idx, n, parent_col, extra_ptr, extra_cols, out, count, state, cur, pos):
    # Resumable DFS. ``state`` = (next start vertex, level); ``cur``/``pos``
    # hold the partial map and per-level cursors. Returns the row count; if
    # ``out`` fills up, the state is saved and the caller grows ``out``.
    r = parent_col.shape[0]
    cap = out.shape[0]
    v = state[0]
    level = state[1]
    while v < n:
        if level == 0:
            if r == 1:
                if count == cap:
                    break
                out[count, 0] = v
                count += 1
                v += 1
                continue
            cur[0] = v
            level = 1
            pos[1] = out_ptr[v]
        while level >= 1:
            if level == r - 1 and count == cap:
                state[0] = v
                state[1] = level
                return count
            a = cur[parent_col[level]]
            end = out_ptr[a + 1]
            found = False
            while pos[level] < end:
                c = out_idx[pos[level]]
                pos[level] += 1
                ok = True
                for e in range(extra_ptr[level], extra_ptr[level + 1]):
                    if not _has_arc(out_ptr, out_idx, cur[extra_cols[e]], c):
                        ok = False
                        break
                if ok:
                    cur[level] = c
                    found = True
                    break
            if not found:
                level -= 1
                continue
            if level == r - 1:
                for j in range(r):
                    out[count, j] = cur[j]
                count += 1
            else:
                level += 1
                pos[level] = out_ptr[cur[parent_col[level]]]
        v += 1
    state[0] = v
    state[1] = 0
    return count


def _enumerate_nb_driver(out_ptr, out_idx, n, parent_col, extra_ptr, extra_cols):
    r = parent_col.shape[0]
    # buffers come from numpy so large ones get transparent huge pages
    out = np.empty((max(2 * n, 1024), r), row_dtype(n))
    state = np.zeros(2, np.int64)
    cur = np.zeros(r, np.int64)
    pos = np.zeros(r, np.int64)
    count = 0
    while True:
        count = _enumerate_nb(out_ptr, out_idx, n, parent_col, extra_ptr, extra_cols, out, count, state, cur, pos)
        if state[0] >= n:
            break
        bigger = np.empty((2 * out.shape[0], r), out.dtype)
        bigger[:count] = out[:count]
        out = bigger
    if count < out.shape[0] // 2:
        return out[:count].copy()
    return out[:count]


def _arc_mask(out_ptr, out_idx, a, b):
    """Vectorized test for arcs a[i] -> b[i] (out lists are sorted)."""
    if a.size == 0 or out_idx.size == 0:
        return np.zeros(a.size, dtype=bool)
    lo = out_ptr[a].copy()
    hi = out_ptr[a + 1].copy()
    # lockstep binary search; out-degrees are small
    active = lo < hi
    while active.any():
        mid = (lo + hi) >> 1
        x = np.where(active, out_idx[np.minimum(mid, out_idx.size - 1)], 0)
        less = active & (x < b)
        lo = np.where(less, mid + 1, lo)
        hi = np.where(active & ~less, mid, hi)
        active = lo < hi
    inside = lo < out_ptr[a + 1]
    hit = np.zeros(a.size, dtype=bool)
    hit[inside] = out_idx[lo[inside]] == b[inside]
    return hit


def _enumerate_np(out_ptr, out_idx, n, parent_col, extra_ptr, extra_cols):
    r = parent_col.shape[0]
    cols = [np.arange(n, dtype=np.int64)]
    for level in range(1, r):
        anchor = cols[parent_col[level]]
        start = out_ptr[anchor]
        deg = out_ptr[anchor + 1] - start
        rows = np.repeat(np.arange(anchor.size, dtype=np.int64), deg)
        # offset of each expanded entry inside its anchor's out-list
        first = np.repeat(np.cumsum(deg) - deg, deg)
        cand = out_idx[np.repeat(start, deg) + np.arange(rows.size, dtype=np.int64) - first]
        keep = np.ones(rows.size, dtype=bool)
        for e in range(extra_ptr[level], extra_ptr[level + 1]):
            src = cols[extra_cols[e]][rows]
            keep &= _arc_mask(out_ptr, out_idx, src, cand)
        rows = rows[keep]
        cols = [c[rows] for c in cols]
        cols.append(cand[keep])
    dtype = row_dtype(n)
    return np.stack(cols, axis=1).astype(dtype) if cols[0].size else np.empty((0, r), dtype)


def row_dtype(n):
    """Narrowest dtype for vertex ids below ``n`` (int32 halves row-table traffic)."""
    return np.int32 if n <= np.iinfo(np.int32).max else np.int64


def enumerate_rows(out_ptr, out_idx, n, parent_col, extra_ptr, extra_cols):
    """All homomorphisms of a single-source DAG plan, one row per map (dtype :func:`row_dtype`)."""
    parent_col = np.asarray(parent_col, dtype=np.int64)
    extra_ptr = np.asarray(extra_ptr, dtype=np.int64)
    extra_cols = np.asarray(extra_cols, dtype=np.int64)
    if _backend == "numba":
        return _enumerate_nb_driver(out_ptr, out_idx, np.int64(n), parent_col, extra_ptr, extra_cols)
    return _enumerate_np(out_ptr, out_idx, n, parent_col, extra_ptr, extra_cols)


# ---------------------------------------------------------------------------
# checked integer reductions


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
# probes issued ahead of use in the hash loops
_PREFETCH = 16


@njit(cache=True, nogil=True, inline="always")
def _slot(code, shift):
    return np.int64((np.uint64(code) * _GOLDEN) >> shift)


def _empty_table(m):
    # allocated by numpy (not inside numba) so large tables get transparent
    # huge pages; random probes then stay within TLB reach
    cap = 2
    while cap < 2 * m:
        cap *= 2
    table = np.empty((cap, 2), dtype=np.int64)
    table[:, 0] = -1
    return table


@njit(cache=True, nogil=True)
def _hash_fill_nb(table, codes, values, skip_zero):
    # table[h] = (key, sum); interleaving keeps each probe to one cache line
    cap = table.shape[0]
    bits = 0
    while (1 << bits) < cap:
        bits += 1
    mask = cap - 1
    shift = np.uint64(64 - bits)
    m = codes.shape[0]
    for i in range(min(_PREFETCH, m)):
        prefetch_row(table, _slot(codes[i], shift))
    for i in range(m):
        if i + _PREFETCH < m:
            prefetch_row(table, _slot(codes[i + _PREFETCH], shift))
        if skip_zero and values[i] == 0:
            continue
        c = codes[i]
        h = _slot(c, shift)
        while table[h, 0] != -1 and table[h, 0] != c:
            h = (h + 1) & mask
        if table[h, 0] == -1:
            table[h, 0] = c
            table[h, 1] = values[i]
        else:
            # explicit bound: LLVM may fold post-hoc wraparound tests away
            if values[i] > _I64_MAX - table[h, 1]:
                return False
            table[h, 1] += values[i]
    return True


@njit(cache=True, nogil=True)
def _hash_lookup_multiply_nb(ext, query, table):
    m = ext.shape[0]
    cap = table.shape[0]
    mask = cap - 1
    bits = 0
    while (1 << bits) < cap:
        bits += 1
    shift = np.uint64(64 - bits)
    out = np.empty(m, np.int64)
    for i in range(min(_PREFETCH, m)):
        prefetch_row(table, _slot(query[i], shift))
    for i in range(m):
        if i + _PREFETCH < m:
            prefetch_row(table, _slot(query[i + _PREFETCH], shift))
        c = query[i]
        h = _slot(c, shift)
        while table[h, 0] != -1 and table[h, 0] != c:
            h = (h + 1) & mask
        if table[h, 0] == -1:
            out[i] = 0
            continue
        a = ext[i]
        b = table[h, 1]
        if a != 0 and b > _I64_MAX // a:
            return out, False
        out[i] = a * b
    return out, True


@njit(cache=True, nogil=True, inline="always")
def _row_code(rows, i, cols, n):
    c = np.int64(0)
    for j in range(cols.shape[0]):
        c = c * n + rows[i, cols[j]]
    return c


@njit(cache=True, nogil=True)
def _radix_codes_nb(rows, cols, n):
    out = np.empty(rows.shape[0], np.int64)
    for i in range(rows.shape[0]):
        out[i] = _row_code(rows, i, cols, n)
    return out


@njit(cache=True, nogil=True)
def _hash_lookup_rows_nb(ext, rows, cols, n, table):
    m = ext.shape[0]
    cap = table.shape[0]
    mask = cap - 1
    bits = 0
    while (1 << bits) < cap:
        bits += 1
    shift = np.uint64(64 - bits)
    out = np.empty(m, np.int64)
    for i in range(min(_PREFETCH, m)):
        prefetch_row(table, _slot(_row_code(rows, i, cols, n), shift))
    for i in range(m):
        if i + _PREFETCH < m:
            prefetch_row(table, _slot(_row_code(rows, i + _PREFETCH, cols, n), shift))
        a = ext[i]
        if a == 0:
            out[i] = 0
            continue
        c = _row_code(rows, i, cols, n)
        h = _slot(c, shift)
        while table[h, 0] != -1 and table[h, 0] != c:
            h = (h + 1) & mask
        if table[h, 0] == -1:
            out[i] = 0
            continue
        b = table[h, 1]
        if b > _I64_MAX // a:
            return out, False
        out[i] = a * b
    return out, True


def radix_codes(rows, cols, n):
    """``sum_j rows[:, cols[j]] * n ** (w - 1 - j)``; caller ensures ``n ** w`` fits."""
    cols = np.asarray(cols, dtype=np.int64)
    if _backend == "numba":
        return _radix_codes_nb(rows, cols, np.int64(max(n, 1)))
    codes = np.zeros(rows.shape[0], dtype=np.int64)
    for c in cols:
        codes *= max(n, 1)
        codes += rows[:, c]
    return codes


def _exact_group_sums(values, starts, ends, groups):
    out = []
    for gi in groups:
        s = sum(int(x) for x in values[starts[gi]:ends[gi]])
        if s > INT64_MAX:
            raise ArithmeticOverflow(f"count sum {s} exceeds the int64 accumulator")
        out.append(s)
    return out


def group_sum(codes, values):
    """Distinct ``codes`` (sorted) and the sum of ``values`` for each."""
    if codes.size == 0:
        return codes[:0].copy(), values[:0].copy()
    order = np.argsort(codes, kind="stable")
    sc = codes[order]
    sv = values[order]
    starts = np.flatnonzero(np.r_[True, sc[1:] != sc[:-1]])
    uniq = sc[starts]
    sums = np.add.reduceat(sv, starts)
    shadow = np.add.reduceat(sv.astype(np.float64), starts)
    risky = np.flatnonzero(shadow > _SHADOW_LIMIT)
    if risky.size:
        ends = np.r_[starts[1:], sc.size]
        sums[risky] = _exact_group_sums(sv, starts, ends, risky)
    return uniq, sums


class KeyIndex:
    """Sum of values per nonnegative int64 key, built for repeated lookups.

    The numba backend stores an open-addressing hash table of
    ``(key, sum)`` pairs (empty slots hold key ``-1``); the numpy backend
    stores sorted distinct keys and searches them.
    """

    __slots__ = ("hashed", "table", "keys", "sums")

    def __init__(self, codes, values):
        codes = np.ascontiguousarray(codes, dtype=np.int64)
        values = np.ascontiguousarray(values, dtype=np.int64)
        self.hashed = _backend == "numba"
        if self.hashed:
            self.table = _empty_table(codes.size)
            if not _hash_fill_nb(self.table, codes, values, False):
                raise ArithmeticOverflow("count sum exceeds the int64 accumulator")
        else:
            self.keys, self.sums = group_sum(codes, values)

    @classmethod
    def from_rows(cls, rows, cols, n, values):
        """Index keyed by the radix code of ``rows[:, cols]``; zero values are skipped."""
        values = np.ascontiguousarray(values, dtype=np.int64)
        if _backend != "numba":
            keep = values != 0
            return cls(radix_codes(rows[keep], cols, n), values[keep])
        self = cls.__new__(cls)
        self.hashed = True
        codes = _radix_codes_nb(rows, np.asarray(cols, dtype=np.int64), np.int64(max(n, 1)))
        self.table = _empty_table(int(np.count_nonzero(values)))
        if not _hash_fill_nb(self.table, codes, values, True):
            raise ArithmeticOverflow("count sum exceeds the int64 accumulator")
        return self

    def multiply_rows(self, ext, rows, cols, n):
        """Like :meth:`multiply` with the query codes taken from ``rows[:, cols]``."""
        if ext.size == 0:
            return ext.copy()
        if not self.hashed:
            return self.multiply(ext, radix_codes(rows, cols, n))
        out, ok = _hash_lookup_rows_nb(
            ext, rows, np.asarray(cols, dtype=np.int64), np.int64(max(n, 1)), self.table
        )
        if not ok:
            raise ArithmeticOverflow("count product exceeds the int64 accumulator")
        return out

    def __len__(self):
        return int(np.count_nonzero(self.table[:, 0] != -1)) if self.hashed else self.keys.size

    def get(self, query):
        """Sums for each query key (0 when absent)."""
        ones = np.ones(np.shape(query), dtype=np.int64)
        return self.multiply(ones, np.asarray(query, dtype=np.int64))

    def multiply(self, ext, query):
        """``ext[i]`` times the sum stored under ``query[i]``, with overflow check."""
        if ext.size == 0:
            return ext.copy()
        query = np.ascontiguousarray(query, dtype=np.int64)
        if self.hashed:
            out, ok = _hash_lookup_multiply_nb(ext, query, self.table)
            if not ok:
                raise ArithmeticOverflow("count product exceeds the int64 accumulator")
            return out
        pos = np.searchsorted(self.keys, query)
        hit = pos < self.keys.size
        hit[hit] = self.keys[pos[hit]] == query[hit]
        factor = np.zeros(ext.size, dtype=np.int64)
        factor[hit] = self.sums[pos[hit]]
        with np.errstate(over="ignore"):
            return _checked_mul_np(ext, factor)


def _checked_mul_np(a, b):
    prod = a * b
    nz = a != 0
    bad = nz & (prod // np.where(nz, a, 1) != b)
    if bad.any():
        raise ArithmeticOverflow("count product exceeds the int64 accumulator")
    return prod


@njit(cache=True, nogil=True)
def _scatter_add_nb(acc, idx, values):
    for i in range(idx.shape[0]):
        j = idx[i]
        if values[i] > _I64_MAX - acc[j]:
            return False
        acc[j] += values[i]
    return True


def _scatter_add_np(acc, idx, values):
    shadow = acc.astype(np.float64)
    np.add.at(shadow, idx, values.astype(np.float64))
    risky = np.flatnonzero(shadow > _SHADOW_LIMIT)
    for j in risky:
        s = int(acc[j]) + sum(int(x) for x in values[idx == j])
        if s > INT64_MAX:
            raise ArithmeticOverflow(f"count sum {s} exceeds the int64 accumulator")
    np.add.at(acc, idx, values)


def scatter_add(acc, idx, values):
    """``acc[idx[i]] += values[i]`` in place, with overflow detection."""
    if idx.size == 0:
        return
    if _backend == "numba":
        if not _scatter_add_nb(acc, idx, values):
            raise ArithmeticOverflow("count sum exceeds the int64 accumulator")
        return
    _scatter_add_np(acc, idx, values)


def checked_mul(a, b):
    """Elementwise product of nonnegative int64 arrays (or scalars) with overflow check."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    with np.errstate(over="ignore"):
        return _checked_mul_np(*np.broadcast_arrays(a, b))


def checked_add(a, b):
    """Elementwise sum of int64 arrays (either sign) with overflow check."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    with np.errstate(over="ignore"):
        s = a + b
    # overflow iff both operands share a sign the result does not
    bad = ((a ^ s) & (b ^ s)) < 0
    if np.any(bad):
        raise ArithmeticOverflow("count sum exceeds the int64 accumulator")
    return s
