"""Pure-Python H1 reduction kernel (fallback for the compiled extension).

Same contract as the compiled `_reduction` module: enumerate triangles up
to the filtration cutoff, process their boundary columns in
(filtration value, vertex lexicographic) order, and pair each nonzero
reduced column's lowest edge with the triangle's filtration value.

Columns are kept as Python integer bitmasks over edge indices, so the
Z/2 column addition is a single big-int XOR and the column low is
bit_length() - 1.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _enumerate_triangles(n, edge_i, edge_j, edge_length, eidx, t_cap):
    """Triangles (a < b < c) with all edges <= t_cap, with filtration values."""
    length = np.full((n, n), np.inf)
    length[edge_i, edge_j] = edge_length
    length[edge_j, edge_i] = edge_length
    adj = length <= t_cap
    vertex = np.arange(n)

    tri_a, tri_b, tri_c, tri_f = [], [], [], []
    short = edge_length <= t_cap
    for a, b, ab in zip(edge_i[short], edge_j[short], edge_length[short]):
        cs = np.nonzero(adj[a] & adj[b] & (vertex > b))[0]
        if cs.size == 0:
            continue
        filt = np.maximum(ab, np.maximum(length[a, cs], length[b, cs]))
        tri_a.append(np.full(cs.shape, a, dtype=np.int64))
        tri_b.append(np.full(cs.shape, b, dtype=np.int64))
        tri_c.append(cs.astype(np.int64))
        tri_f.append(filt)
    if not tri_a:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty, np.empty(0)
    a = np.concatenate(tri_a)
    b = np.concatenate(tri_b)
    c = np.concatenate(tri_c)
    f = np.concatenate(tri_f)
    order = np.lexsort((c, b, a, f))
    return a[order], b[order], c[order], f[order]


def reduce_h1(n, edge_i, edge_j, edge_length, eidx, t_cap):
    """Pair positive edges with killing triangles.

    Returns (paired_edge_indices, death_values) as int64/float64 arrays.
    """
    tri_a, tri_b, tri_c, tri_f = _enumerate_triangles(
        n, edge_i, edge_j, edge_length, eidx, t_cap
    )
    killer: dict[int, int] = {}  # low edge -> stored reduced column bitmask
    paired: list[int] = []
    deaths: list[float] = []
    for a, b, c, filt in zip(tri_a, tri_b, tri_c, tri_f):
        col = (
            (1 << int(eidx[a, b]))
            | (1 << int(eidx[a, c]))
            | (1 << int(eidx[b, c]))
        )
        while col:
            low = col.bit_length() - 1
            other = killer.get(low)
            if other is None:
                killer[low] = col
                paired.append(low)
                deaths.append(float(filt))
                break
            col ^= other
    return (
        np.asarray(paired, dtype=np.int64),
        np.asarray(deaths, dtype=np.float64),
    )
