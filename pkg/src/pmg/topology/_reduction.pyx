# distutils: language = c++
# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled H1 reduction kernel.

Mirrors _reduction_py: enumerate triangles up to the cutoff, sort by
(filtration value, vertex lexicographic), reduce each boundary column
against previously stored columns, and pair the final low edge with the
triangle's filtration value.

The working column lives in a bitset over edge indices with a running
popcount. During a walk the low strictly decreases (a stored column's
maximal entry is its pairing low, so an addition cancels the current low
and only introduces smaller edges), so the next low is found by scanning
downward, and emptiness is detected from the popcount without scanning.
Touched words are recorded and zeroed afterwards, keeping each column's
cost proportional to the work actually done on it.
"""

import numpy as np

from libc.stdint cimport int64_t, uint64_t
from libcpp.vector cimport vector
from libcpp.pair cimport pair
from libcpp.algorithm cimport sort

ctypedef int64_t i64
ctypedef pair[double, i64] tri_t

BACKEND = "compiled"


def reduce_h1(int n, edge_i, edge_j, edge_length, eidx, double t_cap):
    """Pair positive edges with killing triangles; see _reduction_py."""
    cdef i64[::1] ei = np.ascontiguousarray(edge_i, dtype=np.int64)
    cdef i64[::1] ej = np.ascontiguousarray(edge_j, dtype=np.int64)
    cdef double[::1] elen = np.ascontiguousarray(edge_length, dtype=np.float64)
    cdef i64[:, ::1] eix = np.ascontiguousarray(eidx, dtype=np.int64)
    cdef i64 n_edges = elen.shape[0]

    cdef double INF = float("inf")
    length_mat_np = np.full((n, n), INF)
    cdef double[:, ::1] length_mat = length_mat_np
    cdef i64 e, a, b
    for e in range(n_edges):
        a = ei[e]; b = ej[e]
        length_mat[a, b] = elen[e]
        length_mat[b, a] = elen[e]

    # --- enumerate triangles a < b < c with all edges <= t_cap ---
    cdef vector[tri_t] tris
    cdef i64 c, rank
    cdef double ab, ac, bc, filt
    cdef i64 nn = n
    with nogil:
        for e in range(n_edges):
            ab = elen[e]
            if ab > t_cap:
                continue
            a = ei[e]; b = ej[e]
            for c in range(b + 1, nn):
                ac = length_mat[a, c]
                if ac > t_cap:
                    continue
                bc = length_mat[b, c]
                if bc > t_cap:
                    continue
                filt = ab
                if ac > filt: filt = ac
                if bc > filt: filt = bc
                rank = (a * nn + b) * nn + c
                tris.push_back(tri_t(filt, rank))
        sort(tris.begin(), tris.end())

    # --- reduce triangle columns in filtration order ---
    cdef i64 n_words = (n_edges >> 6) + 1
    bits_np = np.zeros(n_words, dtype=np.uint64)
    cdef uint64_t[::1] bits = bits_np
    cdef vector[i64] dirty  # word indices touched by the current column

    cdef vector[vector[i64]] stored
    cdef vector[i64] killer_col = vector[i64](n_edges, -1)
    cdef vector[i64] paired
    cdef vector[double] deaths
    cdef vector[i64] extracted
    cdef i64 t_idx, low, other, e1, e2, e3, swap, cnt, w, pos
    cdef uint64_t word
    cdef size_t ti, si
    cdef bint raw
    with nogil:
        for ti in range(tris.size()):
            filt = tris[ti].first
            rank = tris[ti].second
            c = rank % nn
            b = (rank // nn) % nn
            a = rank // (nn * nn)
            e1 = eix[a, b]; e2 = eix[a, c]; e3 = eix[b, c]
            if e1 > e2: swap = e1; e1 = e2; e2 = swap
            if e2 > e3: swap = e2; e2 = e3; e3 = swap
            if e1 > e2: swap = e1; e1 = e2; e2 = swap
            # load the raw boundary into the bitset
            bits[e1 >> 6] ^= (<uint64_t> 1) << (e1 & 63)
            bits[e2 >> 6] ^= (<uint64_t> 1) << (e2 & 63)
            bits[e3 >> 6] ^= (<uint64_t> 1) << (e3 & 63)
            dirty.push_back(e1 >> 6); dirty.push_back(e2 >> 6); dirty.push_back(e3 >> 6)
            cnt = 3
            low = e3
            raw = True
            while True:
                # find the current low at or below `low`
                w = low >> 6
                word = bits[w] & ((<uint64_t> 0xFFFFFFFFFFFFFFFF) >> (63 - (low & 63)))
                while word == 0:
                    w -= 1
                    word = bits[w]
                low = (w << 6) + 63
                word = bits[w]
                while not (word >> (low & 63)) & 1:
                    low -= 1
                other = killer_col[low]
                if other < 0:
                    killer_col[low] = <i64> stored.size()
                    if raw:
                        extracted.clear()
                        extracted.push_back(e1); extracted.push_back(e2); extracted.push_back(e3)
                    else:
                        # collect the set bits (ascending) up to `low`
                        extracted.clear()
                        for pos in range(n_edges):
                            if (bits[pos >> 6] >> (pos & 63)) & 1:
                                extracted.push_back(pos)
                                if <i64> extracted.size() == cnt:
                                    break
                    stored.push_back(extracted)
                    paired.push_back(low)
                    deaths.push_back(filt)
                    break
                # add the stored column (its max entry is `low`, so the
                # low strictly decreases)
                raw = False
                for si in range(stored[other].size()):
                    pos = stored[other][si]
                    w = pos >> 6
                    if (bits[w] >> (pos & 63)) & 1:
                        cnt -= 1
                    else:
                        cnt += 1
                    bits[w] ^= (<uint64_t> 1) << (pos & 63)
                    dirty.push_back(w)
                if cnt == 0:
                    break
                low -= 1
            # zero out the touched words for the next column
            for si in range(dirty.size()):
                bits[dirty[si]] = 0
            dirty.clear()

    paired_np = np.empty(paired.size(), dtype=np.int64)
    deaths_np = np.empty(deaths.size(), dtype=np.float64)
    cdef i64[::1] pv = paired_np
    cdef double[::1] dv = deaths_np
    for ti in range(paired.size()):
        pv[ti] = paired[ti]
        dv[ti] = deaths[ti]
    return paired_np, deaths_np
