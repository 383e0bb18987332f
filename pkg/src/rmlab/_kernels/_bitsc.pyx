# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled bit kernels.

Same contract as the numpy fallback (_pybits): GF(2) rows packed MSB-first
into uint8, padding bits zero.  Coset and weight scans walk Gray-code order
so each step XORs a single basis row; score sums accumulate over bytes left
to right, matching the fallback bit-for-bit.
"""
from libc.math cimport fabs, INFINITY
from libc.stdint cimport int64_t, uint8_t, uint64_t

import numpy as np

BACKEND_NAME = "cython"

_PC_TABLE = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)
cdef const uint8_t[::1] _PC = _PC_TABLE


cdef inline int _ctz(uint64_t x) noexcept:
    cdef int c = 0
    while not (x & 1):
        x >>= 1
        c += 1
    return c


cdef inline int64_t _popcount_word(const uint8_t[::1] word) noexcept:
    cdef Py_ssize_t b
    cdef int64_t w = 0
    for b in range(word.shape[0]):
        w += _PC[word[b]]
    return w


cdef inline double _score_word(const uint8_t[::1] word,
                               const double[:, ::1] table) noexcept:
    cdef Py_ssize_t b
    cdef double s = 0.0
    for b in range(word.shape[0]):
        s += table[b, word[b]]
    return s


def xor_select_rows(const uint8_t[:, ::1] rows, const uint8_t[::1] select):
    cdef Py_ssize_t nrows = rows.shape[0], nbytes = rows.shape[1]
    out_arr = np.zeros(nbytes, dtype=np.uint8)
    cdef uint8_t[::1] out = out_arr
    cdef Py_ssize_t i, b
    for i in range(nrows):
        if select[i]:
            for b in range(nbytes):
                out[b] ^= rows[i, b]
    return out_arr


def popcount_rows(const uint8_t[:, ::1] a):
    cdef Py_ssize_t nrows = a.shape[0]
    out_arr = np.empty(nrows, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(nrows):
        out[i] = _popcount_word(a[i])
    return out_arr


def score_rows(const uint8_t[:, ::1] a, const double[:, ::1] table):
    cdef Py_ssize_t nrows = a.shape[0]
    out_arr = np.empty(nrows, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    for i in range(nrows):
        out[i] = _score_word(a[i], table)
    return out_arr


def weight_histogram(const uint8_t[:, ::1] basis, Py_ssize_t ncols,
                     const uint8_t[::1] offset):
    cdef Py_ssize_t k = basis.shape[0], nbytes = basis.shape[1]
    if k >= 62:
        raise ValueError("span too large to enumerate")
    hist_arr = np.zeros(ncols + 1, dtype=np.int64)
    cdef int64_t[::1] hist = hist_arr
    cur_arr = np.asarray(offset).copy()
    cdef uint8_t[::1] cur = cur_arr
    cdef uint64_t g, total = (<uint64_t> 1) << k
    cdef Py_ssize_t b
    cdef int j
    hist[_popcount_word(cur)] += 1
    for g in range(1, total):
        j = _ctz(g)
        for b in range(nbytes):
            cur[b] ^= basis[j, b]
        hist[_popcount_word(cur)] += 1
    return hist_arr


def coset_scan(const uint8_t[:, ::1] basis, const uint8_t[::1] offset,
               const double[:, ::1] table, double rel_slack,
               double abs_slack, Py_ssize_t max_keep):
    cdef Py_ssize_t k = basis.shape[0], nbytes = basis.shape[1]
    if k >= 62:
        raise ValueError("span too large to enumerate")
    cur_arr = np.asarray(offset).copy()
    cdef uint8_t[::1] cur = cur_arr
    cdef uint64_t g, total = (<uint64_t> 1) << k
    cdef Py_ssize_t b
    cdef int j
    cdef double s, best = INFINITY

    s = _score_word(cur, table)
    if s < best:
        best = s
    for g in range(1, total):
        j = _ctz(g)
        for b in range(nbytes):
            cur[b] ^= basis[j, b]
        s = _score_word(cur, table)
        if s < best:
            best = s

    cdef double thresh = best + rel_slack * (1.0 + fabs(best)) + abs_slack
    masks_arr = np.empty(max_keep, dtype=np.int64)
    cdef int64_t[::1] masks = masks_arr
    cdef Py_ssize_t kept = 0
    cdef int64_t near = 0

    cur_arr[:] = np.asarray(offset)
    s = _score_word(cur, table)
    if s <= thresh:
        if kept < max_keep:
            masks[kept] = 0
            kept += 1
        near += 1
    for g in range(1, total):
        j = _ctz(g)
        for b in range(nbytes):
            cur[b] ^= basis[j, b]
        s = _score_word(cur, table)
        if s <= thresh:
            if kept < max_keep:
                masks[kept] = <int64_t> (g ^ (g >> 1))
                kept += 1
            near += 1
    return best, np.sort(masks_arr[:kept]), int(near)


def syndrome_zero_count(const uint8_t[:, ::1] rows,
                        const int64_t[:, ::1] supports):
    cdef Py_ssize_t ntrials = supports.shape[0], w = supports.shape[1]
    cdef Py_ssize_t nbytes = rows.shape[1]
    acc_arr = np.zeros(nbytes, dtype=np.uint8)
    cdef uint8_t[::1] acc = acc_arr
    cdef Py_ssize_t t, i, b
    cdef int64_t row, count = 0
    cdef bint zero
    for t in range(ntrials):
        for b in range(nbytes):
            acc[b] = 0
        for i in range(w):
            row = supports[t, i]
            for b in range(nbytes):
                acc[b] ^= rows[row, b]
        zero = True
        for b in range(nbytes):
            if acc[b] != 0:
                zero = False
                break
        if zero:
            count += 1
    return int(count)
