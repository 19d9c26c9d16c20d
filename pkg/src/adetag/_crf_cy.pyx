# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled CRF dynamic-programming kernels (hot path of training/decoding).

Mirrors _crf_py exactly: same functions, same semantics, float64 log-domain
arrays that may contain -inf.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()


cdef inline double _lse1(double[:] a) nogil:
    cdef double m = -INFINITY
    cdef double s = 0.0
    cdef Py_ssize_t i
    for i in range(a.shape[0]):
        if a[i] > m:
            m = a[i]
    if m == -INFINITY:
        return -INFINITY
    for i in range(a.shape[0]):
        s += exp(a[i] - m)
    return m + log(s)


def forward_logz(double[:, :] e, double[:, :] trans, double[:] start, double[:] stop):
    """Log-partition by the forward recursion (left to right)."""
    cdef Py_ssize_t L = e.shape[0], K = e.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] alpha = np.empty(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nxt = np.empty(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tmp = np.empty(K)
    cdef double[:] al = alpha, nx = nxt, tp = tmp
    cdef Py_ssize_t t, i, j
    for j in range(K):
        al[j] = start[j] + e[0, j]
    for t in range(1, L):
        for j in range(K):
            for i in range(K):
                tp[i] = al[i] + trans[i, j]
            nx[j] = e[t, j] + _lse1(tp)
        for j in range(K):
            al[j] = nx[j]
    for j in range(K):
        tp[j] = al[j] + stop[j]
    return _lse1(tp)


def backward_logz(double[:, :] e, double[:, :] trans, double[:] start, double[:] stop):
    """Log-partition by the backward recursion (right to left)."""
    cdef Py_ssize_t L = e.shape[0], K = e.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] beta = np.empty(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] nxt = np.empty(K)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tmp = np.empty(K)
    cdef double[:] bt = beta, nx = nxt, tp = tmp
    cdef Py_ssize_t t, i, j
    for i in range(K):
        bt[i] = stop[i]
    for t in range(L - 2, -1, -1):
        for i in range(K):
            for j in range(K):
                tp[j] = trans[i, j] + e[t + 1, j] + bt[j]
            nx[i] = _lse1(tp)
        for i in range(K):
            bt[i] = nx[i]
    for i in range(K):
        tp[i] = start[i] + e[0, i] + bt[i]
    return _lse1(tp)


def forward_backward(double[:, :] e, double[:, :] trans, double[:] start, double[:] stop):
    """Posterior marginals, expected pairwise transition counts and logZ."""
    cdef Py_ssize_t L = e.shape[0], K = e.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] alpha = np.empty((L, K))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] beta = np.empty((L, K))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] marginals = np.empty((L, K))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pairwise = np.zeros((K, K))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tmp = np.empty(K)
    cdef double[:, :] al = alpha, bt = beta, mg = marginals, pw = pairwise
    cdef double[:] tp = tmp
    cdef double logz, v
    cdef Py_ssize_t t, i, j
    for j in range(K):
        al[0, j] = start[j] + e[0, j]
    for t in range(1, L):
        for j in range(K):
            for i in range(K):
                tp[i] = al[t - 1, i] + trans[i, j]
            al[t, j] = e[t, j] + _lse1(tp)
    for i in range(K):
        bt[L - 1, i] = stop[i]
    for t in range(L - 2, -1, -1):
        for i in range(K):
            for j in range(K):
                tp[j] = trans[i, j] + e[t + 1, j] + bt[t + 1, j]
            bt[t, i] = _lse1(tp)
    for j in range(K):
        tp[j] = al[L - 1, j] + stop[j]
    logz = _lse1(tp)
    for t in range(L):
        for j in range(K):
            mg[t, j] = exp(al[t, j] + bt[t, j] - logz)
    for t in range(L - 1):
        for i in range(K):
            for j in range(K):
                v = al[t, i] + trans[i, j] + e[t + 1, j] + bt[t + 1, j] - logz
                if v == -INFINITY:
                    continue
                pw[i, j] += exp(v)
    return marginals, pairwise, logz


def viterbi(double[:, :] e, double[:, :] trans, double[:] start, double[:] stop):
    """Best path and score; ties go to the lexicographically smallest
    label-index sequence."""
    cdef Py_ssize_t L = e.shape[0], K = e.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] best = np.empty((L, K))
    cdef cnp.ndarray[cnp.int64_t, ndim=1] path = np.empty(L, dtype=np.int64)
    cdef double[:, :] bs = best
    cdef long long[:] pt = path
    cdef double m, v, score
    cdef Py_ssize_t t, i, j, arg
    for j in range(K):
        bs[L - 1, j] = e[L - 1, j] + stop[j]
    for t in range(L - 2, -1, -1):
        for i in range(K):
            m = -INFINITY
            for j in range(K):
                v = trans[i, j] + bs[t + 1, j]
                if v > m:
                    m = v
            bs[t, i] = e[t, i] + m
    m = -INFINITY
    arg = 0
    for j in range(K):
        v = start[j] + bs[0, j]
        if v > m:
            m = v
            arg = j
    pt[0] = arg
    score = m
    for t in range(1, L):
        m = -INFINITY
        arg = 0
        for j in range(K):
            v = trans[pt[t - 1], j] + bs[t, j]
            if v > m:
                m = v
                arg = j
        pt[t] = arg
    return path, score
