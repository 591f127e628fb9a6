"""Numba-compiled versions of the hot kernels.

Same contracts as numpy_impl; the subset scan walks a Gray code so each
subset update costs O(n) integer operations.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND = "numba"


@njit(cache=True)
def power_iterate(B, defl, v0, tol, max_iter):
    n = B.shape[0]
    k = defl.shape[0]
    v = v0.copy()
    theta = 0.0
    resid = 1e308
    it = 0
    for it in range(1, max_iter + 1):
        w = B @ v
        for j in range(k):
            c = 0.0
            for i in range(n):
                c += defl[j, i] * w[i]
            for i in range(n):
                w[i] -= c * defl[j, i]
        theta = 0.0
        for i in range(n):
            theta += v[i] * w[i]
        rr = 0.0
        for i in range(n):
            d = w[i] - theta * v[i]
            rr += d * d
        resid = np.sqrt(rr)
        if resid <= tol:
            return theta, v, it, resid
        norm = 0.0
        for i in range(n):
            norm += w[i] * w[i]
        norm = np.sqrt(norm)
        if norm == 0.0:
            return theta, v, it, resid
        for i in range(n):
            v[i] = w[i] / norm
    return theta, v, it, resid


@njit(cache=True)
def cheeger_scan(W):
    n = W.shape[0]
    rowsum = np.zeros(n, dtype=np.int64)
    for x in range(n):
        acc = 0
        for y in range(n):
            acc += W[x, y]
        rowsum[x] = acc
    in_set = np.zeros(n, dtype=np.bool_)
    col_in = np.zeros(n, dtype=np.int64)  # mass entering v from the set
    row_in = np.zeros(n, dtype=np.int64)  # mass leaving v into the set
    boundary = 0
    size = 0
    mask = 0
    best_b = -1
    best_w = 1
    best_s = 0
    best_mask = 0
    total = 1 << (n - 1)
    for i in range(1, total):
        u = 0
        ii = i
        while ii & 1 == 0:
            u += 1
            ii >>= 1
        if in_set[u]:
            for v in range(n):
                col_in[v] -= W[u, v]
                row_in[v] -= W[v, u]
            boundary += col_in[u] - (rowsum[u] - row_in[u] - W[u, u])
            in_set[u] = False
            size -= 1
        else:
            boundary += (rowsum[u] - row_in[u] - W[u, u]) - col_in[u]
            for v in range(n):
                col_in[v] += W[u, v]
                row_in[v] += W[v, u]
            in_set[u] = True
            size += 1
        mask ^= 1 << u
        weight = size * (n - size)
        lhs = boundary * best_w
        rhs = best_b * weight
        if best_b < 0 or lhs < rhs or (
            lhs == rhs and ((size, mask) < (best_s, best_mask))
        ):
            best_b = boundary
            best_w = weight
            best_s = size
            best_mask = mask
    return best_b, best_s, best_mask
