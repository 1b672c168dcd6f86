"""Observation distributions used by the diagnosis procedures.

Two families are supported:

* :class:`GaussianId` -- multivariate Gaussian with identity covariance, the
  family of the Gaussian mean-box experiments.
* :class:`Categorical` -- a strictly positive distribution on ``{0, .., K-1}``.
  Expectations under it are finite sums, which makes exact oracles possible.

Every distribution exposes a vectorised ``log_pdf`` and a block sampler
``sample(rng, n)``.  Observations of a Gaussian are rows of a float array of
shape ``(n, N)``; observations of a categorical are integer symbols.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True, eq=False)
class GaussianId:
    """``N(mean, I)`` on ``R^N``."""

    mean: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        if mean.size == 0:
            raise ValueError("mean must have at least one component")
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean components must be finite")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)

    @property
    def dim(self) -> int:
        return self.mean.size

    def _check(self, ys) -> np.ndarray:
        ys = np.asarray(ys, dtype=float)
        if ys.ndim == 1:
            ys = ys[None, :]
        if ys.ndim != 2 or ys.shape[1] != self.dim:
            raise ValueError(f"observation dimension {ys.shape[-1]} != {self.dim}")
        return ys

    def log_pdf(self, ys) -> np.ndarray:
        ys = self._check(ys)
        diff = ys - self.mean
        return -0.5 * self.dim * LOG_2PI - 0.5 * np.einsum("ij,ij->i", diff, diff)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.mean + rng.standard_normal((n, self.dim))

    def __eq__(self, other):
        return isinstance(other, GaussianId) and np.array_equal(self.mean, other.mean)

    def __hash__(self):
        return hash(("gaussian", self.mean.tobytes()))

    def __repr__(self):
        return f"GaussianId(mean={self.mean.tolist()})"


@dataclass(frozen=True, eq=False)
class Categorical:
    """Strictly positive distribution on a finite alphabet."""

    probs: np.ndarray
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size < 1:
            raise ValueError("empty alphabet")
        if np.any(p <= 0.0) or not np.all(np.isfinite(p)):
            raise ValueError("categorical probabilities must be strictly positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        cdf = np.cumsum(p)
        cdf[-1] = 1.0
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "_cdf", cdf)

    @property
    def size(self) -> int:
        return self.probs.size

    def _check(self, ys) -> np.ndarray:
        ys = np.atleast_1d(np.asarray(ys))
        if ys.dtype.kind not in "iu" or np.any(ys < 0) or np.any(ys >= self.size):
            raise ValueError(f"symbols must be integers in [0, {self.size})")
        return ys.astype(np.intp)

    def log_pdf(self, ys) -> np.ndarray:
        return np.log(self.probs)[self._check(ys)]

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return np.searchsorted(self._cdf, rng.random(n), side="right").clip(max=self.size - 1)

    def __eq__(self, other):
        return isinstance(other, Categorical) and np.array_equal(self.probs, other.probs)

    def __hash__(self):
        return hash(("categorical", self.probs.tobytes()))

    def __repr__(self):
        return f"Categorical(probs={self.probs.tolist()})"


Distribution = Union[GaussianId, Categorical]


@dataclass(frozen=True)
class DistPair:
    """Ordered pair ``(null_dist, alt_dist)`` tested by one CUSUM statistic."""

    null_dist: Distribution
    alt_dist: Distribution

    def __post_init__(self):
        _same_family(self.null_dist, self.alt_dist)


def _same_family(p, q):
    if isinstance(p, GaussianId) and isinstance(q, GaussianId):
        if p.dim != q.dim:
            raise ValueError(f"dimension mismatch: {p.dim} vs {q.dim}")
    elif isinstance(p, Categorical) and isinstance(q, Categorical):
        if p.size != q.size:
            raise ValueError(f"alphabet mismatch: {p.size} vs {q.size}")
    elif type(p) is not type(q):
        raise ValueError(f"family mismatch: {type(p).__name__} vs {type(q).__name__}")


def log_density(d: Distribution, y) -> float:
    """Log-density (or log-mass) of a single observation."""
    return float(d.log_pdf(y)[0])


def sample(d: Distribution, rng: np.random.Generator):
    """Draw one observation from ``d``."""
    return d.sample(rng, 1)[0]


def kl_divergence(p: Distribution, q: Distribution) -> float:
    """Relative entropy ``D(p || q)``, exact."""
    _same_family(p, q)
    if isinstance(p, GaussianId):
        diff = p.mean - q.mean
        return 0.5 * float(diff @ diff)
    return float(np.sum(p.probs * (np.log(p.probs) - np.log(q.probs))))


def gaussian_llr_coefficients(pair: DistPair) -> tuple[np.ndarray, float]:
    """``(a, b)`` with ``llr(y) = a.y + b`` for a Gaussian pair."""
    t0, t1 = pair.null_dist.mean, pair.alt_dist.mean
    return t1 - t0, 0.5 * (float(t0 @ t0) - float(t1 @ t1))


def llr_increments(pair: DistPair, ys) -> np.ndarray:
    """Log-likelihood ratios ``log dv1/dv0`` for a block of observations.

    Gaussian pairs use the affine form, evaluated coordinate by coordinate so
    the result for a row never depends on the block it sits in.
    """
    v0, v1 = pair.null_dist, pair.alt_dist
    if isinstance(v0, GaussianId) and isinstance(v1, GaussianId):
        ys = v0._check(ys)
        a, b = gaussian_llr_coefficients(pair)
        out = np.full(ys.shape[0], b)
        for c in range(a.size):
            out += a[c] * ys[:, c]
        return out
    if isinstance(v0, Categorical) and isinstance(v1, Categorical):
        table = np.log(v1.probs) - np.log(v0.probs)
        return table[v0._check(ys)]
    return np.asarray(v1.log_pdf(ys), dtype=float) - np.asarray(v0.log_pdf(ys), dtype=float)


def llr_increment(pair: DistPair, y) -> float:
    """``log (dv1/dv0)(y)`` for one observation."""
    return float(llr_increments(pair, y if np.ndim(y) else np.atleast_1d(y))[0])


def lr_expectation(pair: DistPair, under: Distribution) -> float:
    """``E^under[dv1/dv0(Y)]`` in closed form.

    For Gaussians this is ``exp((t1 - t0).(mu - t0))``, reported as ``inf`` when
    the exponent overflows.
    """
    _same_family(pair.null_dist, under)
    if isinstance(under, GaussianId):
        t0, t1 = pair.null_dist.mean, pair.alt_dist.mean
        exponent = float((t1 - t0) @ (under.mean - t0))
        return math.exp(exponent) if exponent < 709.0 else math.inf
    ratio = pair.alt_dist.probs / pair.null_dist.probs
    return float(np.sum(under.probs * ratio))


def delta(nu: Distribution, pair: DistPair) -> float:
    """Drift ``D(nu || v0) - D(nu || v1)`` of the pair's LLR under ``nu``."""
    return kl_divergence(nu, pair.null_dist) - kl_divergence(nu, pair.alt_dist)


def run_rng(master_seed: int, run_index: int) -> np.random.Generator:
    """Independent generator for one Monte Carlo run.

    Derived from ``(master_seed, run_index)`` alone, so results never depend on
    which worker executes the run or in what order.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(run_index),))
    return np.random.Generator(np.random.PCG64(ss))
