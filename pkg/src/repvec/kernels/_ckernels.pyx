# Compiled kernel backend. Mirrors _pykernels semantics: float64 in and out,
# zero diagonals, argmin ties toward the smaller index.

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, INFINITY

cnp.import_array()

BACKEND_NAME = "cython"

DBL_EPS = float(np.finfo(np.float64).eps)


def pairwise_sq_dists(x):
    x = np.ascontiguousarray(x, dtype=np.float64)
    return _pairwise_sq_dists(x)


cdef cnp.ndarray _pairwise_sq_dists(double[:, ::1] x):
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - x[j, k]
                acc += diff * diff
            o[i, j] = acc
            o[j, i] = acc
    return out


def binary_search_perplexity(sqd, double perplexity, double tol=1e-5, int max_steps=100):
    sqd = np.ascontiguousarray(sqd, dtype=np.float64)
    return _binary_search_perplexity(sqd, perplexity, tol, max_steps)


cdef cnp.ndarray _binary_search_perplexity(double[:, ::1] sqd, double perplexity,
                                           double tol, int max_steps):
    cdef Py_ssize_t n = sqd.shape[0]
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] p = out
    cdef Py_ssize_t i, j
    cdef int step
    cdef double beta, beta_min, beta_max, dmin, total, weighted, h, realized, diff, w
    for i in range(n):
        dmin = INFINITY
        for j in range(n):
            if j != i and sqd[i, j] < dmin:
                dmin = sqd[i, j]
        beta = 1.0
        beta_min = -INFINITY
        beta_max = INFINITY
        for step in range(max_steps):
            total = 0.0
            weighted = 0.0
            for j in range(n):
                if j == i:
                    continue
                w = exp(-(sqd[i, j] - dmin) * beta)
                p[i, j] = w
                total += w
                weighted += (sqd[i, j] - dmin) * w
            if total <= 0.0:
                realized = 1.0
            else:
                h = log(total) + beta * weighted / total
                realized = exp(h)
            diff = realized - perplexity
            if fabs(diff) <= tol:
                break
            if diff > 0.0:
                beta_min = beta
                if beta_max == INFINITY:
                    beta = beta * 2.0
                else:
                    beta = (beta + beta_max) / 2.0
            else:
                beta_max = beta
                if beta_min == -INFINITY:
                    beta = beta / 2.0
                else:
                    beta = (beta + beta_min) / 2.0
        total = 0.0
        for j in range(n):
            if j != i:
                total += p[i, j]
        if total <= 0.0:
            for j in range(n):
                if j != i:
                    p[i, j] = 1.0
            total = n - 1.0
        for j in range(n):
            if j != i:
                p[i, j] /= total
    return out


def kl_grad(p_grad, y, p_kl):
    p_grad = np.ascontiguousarray(p_grad, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    p_kl = np.ascontiguousarray(p_kl, dtype=np.float64)
    return _kl_grad(p_grad, y, p_kl)


cdef tuple _kl_grad(double[:, ::1] p_grad, double[:, ::1] y, double[:, ::1] p_kl):
    cdef Py_ssize_t n = y.shape[0], m = y.shape[1]
    cdef cnp.ndarray[double, ndim=2] w_arr = np.zeros((n, n), dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2] grad_arr = np.zeros((n, m), dtype=np.float64)
    cdef double[:, ::1] w = w_arr
    cdef double[:, ::1] grad = grad_arr
    cdef Py_ssize_t i, j, k
    cdef double acc, diff, total, q, kl, eps, pq
    eps = DBL_EPS

    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(m):
                diff = y[i, k] - y[j, k]
                acc += diff * diff
            acc = 1.0 / (1.0 + acc)
            w[i, j] = acc
            w[j, i] = acc
            total += 2.0 * acc

    kl = 0.0
    for i in range(n):
        for j in range(n):
            if j == i:
                continue
            q = w[i, j] / total
            if p_kl[i, j] > 0.0:
                kl += p_kl[i, j] * log(
                    (p_kl[i, j] if p_kl[i, j] > eps else eps)
                    / (q if q > eps else eps)
                )
            pq = (p_grad[i, j] - q) * w[i, j]
            for k in range(m):
                grad[i, k] += 4.0 * pq * (y[i, k] - y[j, k])
    return kl, grad_arr


def assign_points(x, centroids):
    x = np.ascontiguousarray(x, dtype=np.float64)
    centroids = np.ascontiguousarray(centroids, dtype=np.float64)
    return _assign_points(x, centroids)


cdef tuple _assign_points(double[:, ::1] x, double[:, ::1] c):
    cdef Py_ssize_t n = x.shape[0], k = c.shape[0], d = x.shape[1]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels_arr = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] dists_arr = np.zeros(n, dtype=np.float64)
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef double[::1] dists = dists_arr
    cdef Py_ssize_t i, j, q
    cdef double best, acc, diff
    for i in range(n):
        best = INFINITY
        for j in range(k):
            acc = 0.0
            for q in range(d):
                diff = x[i, q] - c[j, q]
                acc += diff * diff
            if acc < best:
                best = acc
                labels[i] = j
        dists[i] = best
    return labels_arr, dists_arr
