"""Window-limited GLR diagnosis over Gaussian mean boxes.

Each class ``c`` is an uncertainty set of ``N(theta, I)`` with ``theta`` in an
axis-aligned box.  For a segment ``y_n..y_k`` of length ``m`` with mean
``ybar`` the box-constrained MLE is the projection of ``ybar`` onto the box, and
the profile log-likelihood ratio of class ``j`` against class ``i`` is

    (m / 2) * (|ybar - theta_i|^2 - |ybar - theta_j|^2).

The type-``j`` statistic maximises, over start points ``n`` in the last ``w``
samples, the minimum of that ratio over every competing class ``i != j``
(including the no-change class 0).  The procedure stops at the first time some
type statistic reaches ``h`` and decides the type with the largest statistic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cusum import Censored
from .mcusum import Diagnosis


@dataclass(frozen=True, eq=False)
class BoxSet:
    """Box of Gaussian means; use ``-inf``/``inf`` (or None) for open sides."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.array([-np.inf if v is None else v for v in np.atleast_1d(self.lower)], dtype=float)
        hi = np.array([np.inf if v is None else v for v in np.atleast_1d(self.upper)], dtype=float)
        if lo.shape != hi.shape:
            raise ValueError("lower and upper bounds differ in length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("NaN bound")
        if np.any(lo > hi):
            raise ValueError(f"empty box: lower {lo.tolist()} exceeds upper {hi.tolist()}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, point, tol: float = 0.0) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def project(self, point) -> np.ndarray:
        return np.clip(np.asarray(point, dtype=float), self.lower, self.upper)

    def overlaps(self, other: "BoxSet") -> bool:
        return bool(np.all(self.lower <= other.upper) and np.all(other.lower <= self.upper))

    def __eq__(self, other):
        return (
            isinstance(other, BoxSet)
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )

    def __repr__(self):
        return f"BoxSet(lower={self.lower.tolist()}, upper={self.upper.tolist()})"


def clipped_mle(box: BoxSet, samples) -> np.ndarray:
    """Maximum-likelihood mean over ``box`` for identity-covariance samples."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 0:
        raise ValueError("empty window")
    return box.project(samples.mean(axis=0))


def segment_llr_terms(sets: Sequence[BoxSet], segment) -> np.ndarray:
    """Matrix ``L[i, j]`` of profile LLRs of class j against class i for one segment."""
    segment = np.atleast_2d(np.asarray(segment, dtype=float))
    m = segment.shape[0]
    ybar = segment.mean(axis=0)
    dist2 = np.array([np.sum((ybar - s.project(ybar)) ** 2) for s in sets])
    return 0.5 * m * (dist2[:, None] - dist2[None, :])


@dataclass
class GlrState:
    sets: list
    w: int
    h: float
    window: deque = field(default=None)
    k: int = 0
    stopped: bool = False

    def __post_init__(self):
        if self.w < 1:
            raise ValueError("window length must be >= 1")
        if len(self.sets) < 2:
            raise ValueError("need a pre-change set and at least one post-change set")
        if not self.h > 0:
            raise ValueError("threshold h must be positive")
        dims = {s.dim for s in self.sets}
        if len(dims) != 1:
            raise ValueError("all boxes must share one dimension")
        self.window = deque(maxlen=self.w)

    @property
    def J(self) -> int:
        return len(self.sets) - 1


def glr_new(sets: Sequence[BoxSet], w: int, h: float) -> GlrState:
    return GlrState(list(sets), int(w), float(h))


def glr_statistic(state: GlrState, j: int) -> float:
    """Type-``j`` GLR statistic at the current time (end of the window)."""
    if not 1 <= j <= state.J:
        raise ValueError(f"type {j} outside 1..{state.J}")
    if not state.window:
        raise ValueError("empty window")
    data = np.array(state.window)
    best = -np.inf
    for n in range(data.shape[0]):
        L = segment_llr_terms(state.sets, data[n:])
        best = max(best, min(L[i, j] for i in range(state.J + 1) if i != j))
    return float(best)


def glr_step(state: GlrState, y) -> Diagnosis | None:
    if state.stopped:
        raise RuntimeError("procedure already stopped; start a new state")
    state.window.append(np.asarray(y, dtype=float).reshape(-1))
    state.k += 1
    stats = [glr_statistic(state, j) for j in range(1, state.J + 1)]
    best = max(stats)
    if best >= state.h:
        state.stopped = True
        return Diagnosis(state.k, 1 + stats.index(best))
    return None


def glr_run(sets: Sequence[BoxSet], w: int, h: float, stream: Iterable, cap: int) -> Diagnosis | Censored:
    state = glr_new(sets, w, h)
    for y in stream:
        if state.k >= cap:
            break
        out = glr_step(state, y)
        if out is not None:
            return out
    return Censored(cap)
