"""Compiled inner loops for the Monte Carlo harness.

Arithmetic mirrors the reference step functions in ``mcusum`` and ``glr`` so a
recorded sequence yields the same stop time through either path.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def mcusum_scan(Z, S, h, pair_j, J, target):
    """Advance MCUSUM statistics ``S`` (in place) over increment rows ``Z``.

    Returns ``(row, d)`` of the first stop whose decision matches ``target``
    (any decision when ``target <= 0``), or ``(-1, 0)``.  Stops with another
    decision reset ``S`` to zero, which starts the next renewal copy.
    """
    n, P = Z.shape
    mins = np.empty(J + 1)
    for r in range(n):
        for p in range(P):
            s = S[p]
            if s < 0.0:
                s = 0.0
            S[p] = s + Z[r, p]
        for j in range(J + 1):
            mins[j] = np.inf
        for p in range(P):
            if S[p] < mins[pair_j[p]]:
                mins[pair_j[p]] = S[p]
        d = 0
        for j in range(1, J + 1):
            if mins[j] >= h:
                d = j
                break
        if d > 0:
            if target <= 0 or d == target:
                return r, d
            for p in range(P):
                S[p] = 0.0
    return -1, 0


@njit(cache=True, nogil=True)
def glr_scan(Y, start, copy_start, lower, upper, w, h, target):
    """Window-limited GLR over rows ``start..`` of ``Y``.

    Rows before ``start`` are history of the current copy, which begins at
    ``copy_start``.  ``lower``/``upper`` have shape ``(J + 1, N)``.  Returns
    ``(row, d, copy_start)``; ``row == -1`` when nothing matching ``target``
    fired, with ``copy_start`` updated for the caller's history buffer.
    """
    n, N = Y.shape
    C = lower.shape[0]
    J = C - 1
    acc = np.empty(N)
    dist2 = np.empty(C)
    best = np.empty(J + 1)
    for k in range(start, n):
        n0 = k - w + 1
        if n0 < copy_start:
            n0 = copy_start
        for j in range(J + 1):
            best[j] = -np.inf
        for c in range(N):
            acc[c] = 0.0
        for s in range(k, n0 - 1, -1):
            m = k - s + 1
            for c in range(N):
                acc[c] += Y[s, c]
            for q in range(C):
                tot = 0.0
                for c in range(N):
                    ybar = acc[c] / m
                    proj = ybar
                    if proj < lower[q, c]:
                        proj = lower[q, c]
                    elif proj > upper[q, c]:
                        proj = upper[q, c]
                    diff = ybar - proj
                    tot += diff * diff
                dist2[q] = tot
            for j in range(1, J + 1):
                t = np.inf
                for i in range(C):
                    if i != j:
                        v = 0.5 * m * (dist2[i] - dist2[j])
                        if v < t:
                            t = v
                if t > best[j]:
                    best[j] = t
        d = 0
        top = -np.inf
        for j in range(1, J + 1):
            if best[j] > top:
                top = best[j]
                d = j
        if top >= h:
            if target <= 0 or d == target:
                return k, d, copy_start
            copy_start = k + 1
    return -1, 0, copy_start
