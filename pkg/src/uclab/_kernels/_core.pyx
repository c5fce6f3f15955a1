# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see _pykernels.py for the reference semantics."""

from libc.math cimport log2, log1p

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef double LN2 = 0.6931471805599453


cdef inline double _bent(double p) noexcept nogil:
    cdef double lp, lq
    if p <= 0.0 or p >= 1.0:
        return 0.0
    if p > 0.5:
        lp = log1p(p - 1.0) / LN2
    else:
        lp = log2(p)
    lq = log1p(-p) / LN2
    return -(p * lp + (1.0 - p) * lq)


def binary_entropy_many(p):
    """Elementwise -p log2 p - (1-p) log2(1-p), with 0 log 0 = 0."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.ascontiguousarray(
        p, dtype=np.float64
    ).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(arr)
    cdef Py_ssize_t i, m = arr.shape[0]
    with nogil:
        for i in range(m):
            out[i] = _bent(arr[i])
    return out.reshape(np.shape(p))


def entropy_sum(masses):
    """-sum m log2 m over positive entries, in bits."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] arr = np.ascontiguousarray(
        masses, dtype=np.float64
    ).ravel()
    cdef double acc = 0.0
    cdef double v
    cdef Py_ssize_t i, m = arr.shape[0]
    with nogil:
        for i in range(m):
            v = arr[i]
            if v > 0.0:
                acc -= v * log2(v)
    return acc


def instance_stats(q, p, double threshold):
    """One pass over a weighted bit-law; see _pykernels.instance_stats."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] qa = np.ascontiguousarray(
        q, dtype=np.float64
    )
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pa = np.ascontiguousarray(
        p, dtype=np.float64
    )
    cdef Py_ssize_t i, j, m = qa.shape[0]
    if pa.shape[0] != m:
        raise ValueError("q and p must have equal length")
    cdef double mean_p = 0.0, pr0 = 0.0, pr1 = 0.0
    cdef double h_mass0 = 0.0, h_mass1 = 0.0
    cdef double t00 = 0.0, t01 = 0.0, t11 = 0.0, total = 0.0
    cdef double pi, pj, qi, a, b, h, w
    cdef bint low_i, low_j
    with nogil:
        for i in range(m):
            qi = qa[i]
            pi = pa[i]
            low_i = pi <= threshold
            mean_p += qi * pi
            h = qi * _bent(pi)
            if low_i:
                pr0 += qi
                h_mass0 += h
            else:
                pr1 += qi
                h_mass1 += h
            # diagonal pair (i, i)
            h = qi * qi * _bent(pi + pi * (1.0 - pi))
            total += h
            if low_i:
                t00 += h
            else:
                t11 += h
            # off-diagonal pairs counted once, weighted twice
            for j in range(i + 1, m):
                pj = pa[j]
                if pi >= pj:
                    a = pi
                    b = pj
                else:
                    a = pj
                    b = pi
                w = 2.0 * qi * qa[j]
                h = w * _bent(a + b * (1.0 - a))
                total += h
                low_j = pj <= threshold
                if low_i and low_j:
                    t00 += h
                elif low_i or low_j:
                    t01 += h
                else:
                    t11 += h
    return (mean_p, pr0, pr1, h_mass0, h_mass1, t00, t01, t11, total)


def subset_union_square(table, int n):
    """Law of the union of two iid subset draws, via the lattice transform."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.array(
        table, dtype=np.float64, copy=True
    ).ravel()
    cdef Py_ssize_t size = 1 << n
    if t.shape[0] != size:
        raise ValueError("table length must be 2**n")
    cdef Py_ssize_t i, mask, step
    with nogil:
        for i in range(n):
            step = 1 << i
            for mask in range(size):
                if mask & step:
                    t[mask] += t[mask ^ step]
        for mask in range(size):
            t[mask] *= t[mask]
        for i in range(n):
            step = 1 << i
            for mask in range(size):
                if mask & step:
                    t[mask] -= t[mask ^ step]
    return t
