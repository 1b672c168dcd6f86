"""Matrix CUSUM (MCUSUM) diagnosis.

For change types ``j = 1..J`` the procedure keeps one CUSUM statistic per
ordered pair ``(i, j)``, ``i != j`` (``i = 0`` is the no-change class).  The
type-``j`` rule fires once ``min_{i != j} S(v_ij) >= h``; the procedure stops at
the first rule to fire and decides that type.  Simultaneous firings resolve to
the smallest ``j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .cusum import Censored
from .distributions import Distribution, DistPair, _same_family, llr_increments


@dataclass(frozen=True)
class Diagnosis:
    T: int
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("decision must be a change type >= 1")


def expected_keys(J: int) -> list[tuple[int, int]]:
    return [(i, j) for j in range(1, J + 1) for i in range(J + 1) if i != j]


class UpsilonSet:
    """Complete family of pairs ``v_ij`` for ``0 <= i <= J``, ``1 <= j <= J``."""

    def __init__(self, pairs: Mapping[tuple[int, int], DistPair]):
        pairs = {(int(i), int(j)): p for (i, j), p in pairs.items()}
        if not pairs:
            raise ValueError("empty pair set")
        J = max(j for _, j in pairs)
        missing = set(expected_keys(J)) - set(pairs)
        extra = set(pairs) - set(expected_keys(J))
        if missing or extra:
            raise ValueError(f"incomplete pair set for J={J}: missing {sorted(missing)}, unexpected {sorted(extra)}")
        first = next(iter(pairs.values())).null_dist
        for p in pairs.values():
            _same_family(first, p.null_dist)
        self.J = J
        self.keys = expected_keys(J)
        self.pairs = {k: pairs[k] for k in self.keys}

    def __getitem__(self, key):
        return self.pairs[key]

    def __iter__(self):
        return iter(self.keys)

    def __len__(self):
        return len(self.keys)

    def __eq__(self, other):
        return isinstance(other, UpsilonSet) and self.pairs == other.pairs

    def __repr__(self):
        return f"UpsilonSet(J={self.J}, pairs={self.pairs!r})"

    def increments(self, ys) -> np.ndarray:
        """LLR increments for a block, shape ``(n, len(self))`` in key order."""
        return np.column_stack([llr_increments(self.pairs[k], ys) for k in self.keys])

    @property
    def index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        i = np.array([k[0] for k in self.keys], dtype=np.int64)
        j = np.array([k[1] for k in self.keys], dtype=np.int64)
        return i, j


def upsilon_from_distributions(nus: Sequence[Distribution]) -> UpsilonSet:
    """Pairs ``(nu_i, nu_j)`` built from one distribution per class."""
    J = len(nus) - 1
    if J < 1:
        raise ValueError("need a pre-change and at least one post-change distribution")
    return UpsilonSet({(i, j): DistPair(nus[i], nus[j]) for (i, j) in expected_keys(J)})


@dataclass
class McusumState:
    upsilon: UpsilonSet
    h: float
    stats: dict = field(default_factory=dict)
    k: int = 0
    stopped: bool = False

    def type_minima(self) -> dict[int, float]:
        out = {}
        for (i, j), s in self.stats.items():
            out[j] = min(out.get(j, np.inf), s)
        return out


def mcusum_new(upsilon: UpsilonSet, h: float) -> McusumState:
    if not isinstance(upsilon, UpsilonSet):
        upsilon = UpsilonSet(upsilon)
    if not h > 0:
        raise ValueError("threshold h must be positive")
    return McusumState(upsilon, float(h), {k: 0.0 for k in upsilon.keys})


def mcusum_step(state: McusumState, y) -> Diagnosis | None:
    if state.stopped:
        raise RuntimeError("procedure already stopped; start a new state")
    z = state.upsilon.increments(y)[0]
    return mcusum_step_increments(state, z)


def mcusum_step_increments(state: McusumState, z) -> Diagnosis | None:
    """Advance with precomputed increments ``z`` (one per pair, key order)."""
    if state.stopped:
        raise RuntimeError("procedure already stopped; start a new state")
    for key, zk in zip(state.upsilon.keys, z):
        state.stats[key] = max(state.stats[key], 0.0) + float(zk)
    state.k += 1
    minima = state.type_minima()
    for j in range(1, state.upsilon.J + 1):
        if minima[j] >= state.h:
            state.stopped = True
            return Diagnosis(state.k, j)
    return None


def mcusum_run(upsilon: UpsilonSet, h: float, stream: Iterable, cap: int) -> Diagnosis | Censored:
    state = mcusum_new(upsilon, h)
    for y in stream:
        if state.k >= cap:
            break
        out = mcusum_step(state, y)
        if out is not None:
            return out
    return Censored(cap)


def renewal_first_detection(
    upsilon: UpsilonSet, h: float, stream: Iterable, target_j: int, cap_total: int
) -> int | Censored:
    """Cumulative time of the first ``target_j`` decision over renewed copies.

    Each copy starts from zero statistics on the samples following the previous
    copy's stop, so no sample is shared between copies.
    """
    if not 1 <= target_j <= upsilon.J:
        raise ValueError(f"target type {target_j} outside 1..{upsilon.J}")
    it: Iterator = iter(stream)
    elapsed = 0
    state = mcusum_new(upsilon, h)
    for y in it:
        if elapsed >= cap_total:
            break
        elapsed += 1
        out = mcusum_step(state, y)
        if out is None:
            continue
        if out.d == target_j:
            return elapsed
        state = mcusum_new(upsilon, h)
    return Censored(cap_total)
