# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled tree kernels (hot lane).

Scalar twin of the numpy fallback in pure.py: every split-gain value is
produced by the same sequence of IEEE-754 operations, so both lanes grow
bit-identical trees. Keep the arithmetic in the two files in sync.
"""

import numpy as np

cimport cython
cimport numpy as cnp

cnp.import_array()

IMPLEMENTATION = "compiled"


cdef void _sort_pair(double* v, unsigned char* y, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    # In-place quicksort of (value, label) pairs by value; tie order among
    # equal values is irrelevant because candidates sit between distinct
    # values only.
    cdef Py_ssize_t i, j
    cdef double pivot, tv
    cdef unsigned char ty
    while lo < hi:
        if hi - lo < 16:
            for i in range(lo + 1, hi + 1):
                tv = v[i]
                ty = y[i]
                j = i - 1
                while j >= lo and v[j] > tv:
                    v[j + 1] = v[j]
                    y[j + 1] = y[j]
                    j -= 1
                v[j + 1] = tv
                y[j + 1] = ty
            return
        pivot = v[lo + (hi - lo) // 2]
        i = lo
        j = hi
        while i <= j:
            while v[i] < pivot:
                i += 1
            while v[j] > pivot:
                j -= 1
            if i <= j:
                tv = v[i]; v[i] = v[j]; v[j] = tv
                ty = y[i]; y[i] = y[j]; y[j] = ty
                i += 1
                j -= 1
        if j - lo < hi - i:
            _sort_pair(v, y, lo, j)
            lo = i
        else:
            _sort_pair(v, y, i, hi)
            hi = j


def best_split(const double[:, ::1] values, const unsigned char[::1] ypos,
               Py_ssize_t min_samples_leaf, double node_weight):
    """Best (feature, threshold) for one node by weighted Gini decrease.

    Same contract and tie-breaking as pure.best_split.
    """
    cdef Py_ssize_t n = values.shape[0]
    cdef Py_ssize_t m = values.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double total_pos = 0.0
    cdef double nt = <double> n
    cdef double pt1, pt0, g_node
    cdef double best_gain = -1.0
    cdef Py_ssize_t best_feature = -1
    cdef double best_threshold = 0.0
    cdef double nl, nr, pos_l, pos_r, pl1, pl0, pr1, pr0
    cdef double g_left, g_right, child, gain, feat_best_gain, feat_best_threshold
    cdef bint feat_found

    for i in range(n):
        total_pos += <double> ypos[i]
    pt1 = total_pos / nt
    pt0 = (nt - total_pos) / nt
    g_node = 1.0 - pt1 * pt1 - pt0 * pt0

    if n < 2 * min_samples_leaf:
        return best_gain, best_feature, best_threshold

    v_arr = np.empty(n, dtype=np.float64)
    y_arr = np.empty(n, dtype=np.uint8)
    cdef double[::1] v = v_arr
    cdef unsigned char[::1] ys = y_arr
    cdef double pos_prefix

    for j in range(m):
        for i in range(n):
            v[i] = values[i, j]
            ys[i] = ypos[i]
        with nogil:
            _sort_pair(&v[0], &ys[0], 0, n - 1)

        feat_found = False
        feat_best_gain = -1.0
        feat_best_threshold = 0.0
        pos_prefix = 0.0
        for k in range(1, n):
            pos_prefix += <double> ys[k - 1]
            if v[k - 1] == v[k]:
                continue
            if k < min_samples_leaf or n - k < min_samples_leaf:
                continue
            nl = <double> k
            nr = nt - nl
            pos_l = pos_prefix
            pos_r = total_pos - pos_l
            pl1 = pos_l / nl
            pl0 = (nl - pos_l) / nl
            pr1 = pos_r / nr
            pr0 = (nr - pos_r) / nr
            g_left = 1.0 - pl1 * pl1 - pl0 * pl0
            g_right = 1.0 - pr1 * pr1 - pr0 * pr0
            child = (nl / nt) * g_left + (nr / nt) * g_right
            gain = node_weight * (g_node - child)
            if not feat_found or gain > feat_best_gain:
                feat_found = True
                feat_best_gain = gain
                feat_best_threshold = (v[k - 1] + v[k]) / 2.0
                if feat_best_threshold == v[k]:
                    # Midpoint of adjacent doubles can round up; keep the
                    # partition consistent with the gain counts.
                    feat_best_threshold = v[k - 1]
        if feat_found and feat_best_gain > best_gain:
            best_gain = feat_best_gain
            best_feature = j
            best_threshold = feat_best_threshold
    return best_gain, best_feature, best_threshold


def route_rows(const cnp.int32_t[::1] feature, const double[::1] threshold,
               const cnp.int32_t[::1] left, const cnp.int32_t[::1] right,
               const double[:, ::1] X):
    """Route rows of X to leaf node indices (same contract as pure lane)."""
    cdef Py_ssize_t n = X.shape[0]
    out_arr = np.zeros(n, dtype=np.int32)
    cdef cnp.int32_t[::1] out = out_arr
    cdef Py_ssize_t i
    cdef cnp.int32_t node
    with nogil:
        for i in range(n):
            node = 0
            while feature[node] >= 0:
                if X[i, feature[node]] <= threshold[node]:
                    node = left[node]
                else:
                    node = right[node]
            out[i] = node
    return out_arr
