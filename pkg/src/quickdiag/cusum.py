"""Scalar CUSUM statistic for a single pair of distributions.

The statistic is the maximum of the trailing partial sums of log-likelihood
ratios, ``S_k = max_{1<=n<=k} sum_{l=n}^k z_l``.  It is *not* floored at zero;
the recursion ``S_k = max(S_{k-1}, 0) + z_k`` with ``S_0 = 0`` reproduces it
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .distributions import DistPair, llr_increment


@dataclass(frozen=True)
class Censored:
    """Marker for a run that hit its sample cap without stopping."""

    cap: int


@dataclass(frozen=True)
class CusumState:
    s: float = 0.0
    k: int = 0


def cusum_update(state: CusumState, z: float) -> CusumState:
    if not math.isfinite(z):
        raise ValueError(f"non-finite increment {z!r}")
    return CusumState(max(state.s, 0.0) + z, state.k + 1)


def cusum_statistic_bruteforce(pair: DistPair | None, ys) -> float:
    """Max over start points of the trailing LLR sums.

    With ``pair=None`` the items of ``ys`` are taken as increments directly.
    """
    zs = list(ys) if pair is None else [llr_increment(pair, y) for y in ys]
    if not zs:
        raise ValueError("need at least one observation")
    best = -math.inf
    for n in range(len(zs)):
        best = max(best, math.fsum(zs[n:]))
    return best


def cusum_run(pair: DistPair | None, stream: Iterable, h: float, cap: int) -> int | Censored:
    """First ``k <= cap`` with ``S_k >= h``.

    ``stream`` yields observations, or raw increments when ``pair`` is None.
    """
    if h <= 0:
        raise ValueError("threshold must be positive")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    state = CusumState()
    for y in stream:
        z = y if pair is None else llr_increment(pair, y)
        state = cusum_update(state, float(z))
        if state.s >= h:
            return state.k
        if state.k >= cap:
            break
    return Censored(cap)
