"""Pure-numpy reference implementations of the hot kernels."""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"

_CHUNK_BITS = 14


def power_iterate(B, defl, v0, tol, max_iter):
    """Power iteration on symmetric B with per-step deflation.

    defl holds orthonormal rows to project away every iteration (the
    constant direction plus any already-found eigenvectors). Returns
    (theta, v, iterations, residual) where theta is the Rayleigh quotient
    of the unit vector v and residual = ||Bv - theta v|| after projection.
    """
    v = v0.copy()
    theta = 0.0
    resid = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        w = B @ v
        if defl.shape[0]:
            w -= defl.T @ (defl @ w)
        theta = float(v @ w)
        r = w - theta * v
        resid = float(np.sqrt(r @ r))
        if resid <= tol:
            return theta, v, it, resid
        norm = float(np.sqrt(w @ w))
        if norm == 0.0:
            return theta, v, it, resid
        v = w / norm
    return theta, v, it, resid


def cheeger_scan(W):
    """Exact integer scan over subset classes, minimizing B(Y)/(|Y|(n-|Y|)).

    W is the integer-scaled doubly stochastic matrix. Enumerates every
    proper nonempty subset not containing point n-1 (its complement covers
    the rest at equal quotient) in chunks, with exact integer comparison of
    the near-minimal candidates. Ties prefer smaller size, then smaller
    bitmask, so every backend returns the identical certificate.
    """
    n = W.shape[0]
    total = 1 << (n - 1)
    cols = np.arange(n, dtype=np.int64)
    ones = np.int64(1)
    best = None  # (B, weight, size, mask) with exact int comparison
    for start in range(1, total, 1 << _CHUNK_BITS):
        stop = min(start + (1 << _CHUNK_BITS), total)
        masks = np.arange(start, stop, dtype=np.int64)
        member = ((masks[:, None] >> cols[None, :]) & ones).astype(np.int64)
        sizes = member.sum(axis=1)
        boundary = ((member @ W) * (1 - member)).sum(axis=1)
        weights = sizes * (n - sizes)
        quotient = boundary.astype(np.float64) / weights.astype(np.float64)
        q_min = quotient.min()
        band = q_min * (1.0 + 1e-9) + 1e-300
        for idx in np.nonzero(quotient <= band)[0]:
            cand = (
                int(boundary[idx]),
                int(weights[idx]),
                int(sizes[idx]),
                int(masks[idx]),
            )
            if best is None or _better(cand, best):
                best = cand
    return best[0], best[2], best[3]


def _better(cand, best):
    bc, wc, sc, mc = cand
    bb, wb, sb, mb = best
    lhs, rhs = bc * wb, bb * wc
    if lhs != rhs:
        return lhs < rhs
    return (sc, mc) < (sb, mb)
