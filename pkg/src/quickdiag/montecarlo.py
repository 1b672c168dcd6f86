"""Seeded Monte Carlo estimation of delays and false-alarm/false-isolation times.

Every run draws its observations from a generator derived from
``(master_seed, run_index)``; runs can therefore be executed by any number of
threads and aggregated in run order with bit-identical results.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .boundedness import UncertaintyModel, delta_star
from .distributions import Distribution, GaussianId, kl_divergence, run_rng
from .glr import BoxSet
from .mcusum import UpsilonSet, upsilon_from_distributions

log = logging.getLogger(__name__)

BLOCK = 512


@dataclass(frozen=True)
class Scenario:
    pre: Distribution
    post: Distribution | None = None
    change_time: int = 1
    true_type: int | None = None

    def __post_init__(self):
        if self.change_time < 1:
            raise ValueError("change time must be >= 1")
        if (self.post is None) != (self.true_type is None):
            raise ValueError("post-change distribution and true type go together")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    se: float
    runs: int
    censored: int
    cap: int
    misisolation: float | None = None

    @property
    def lower_bound(self) -> bool:
        """True when censored runs make ``mean`` a lower bound."""
        return self.censored > 0


@dataclass(frozen=True)
class RunResult:
    T: int
    d: int
    censored: bool


class ObservationSource:
    """Block sampler: ``change_time - 1`` draws from ``pre`` then ``post`` forever."""

    def __init__(self, rng, post: Distribution, pre: Distribution | None = None, change_time: int = 1):
        self.rng = rng
        self.post = post
        self.pre = pre
        self.pre_left = change_time - 1 if pre is not None else 0

    def next_block(self, n: int):
        if self.pre_left > 0:
            m = min(n, self.pre_left)
            self.pre_left -= m
            head = self.pre.sample(self.rng, m)
            if m == n:
                return head
            return np.concatenate([head, self.post.sample(self.rng, n - m)])
        return self.post.sample(self.rng, n)


# ---------------------------------------------------------------------------
# procedures


@dataclass(frozen=True)
class McusumProcedure:
    """MCUSUM with a fixed pair set and threshold."""

    upsilon: UpsilonSet
    h: float
    name: str = "mcusum"

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("threshold h must be positive")

    @property
    def J(self) -> int:
        return self.upsilon.J

    def with_h(self, h: float) -> "McusumProcedure":
        return McusumProcedure(self.upsilon, float(h), self.name)

    def run(self, source: ObservationSource, target: int, cap: int) -> RunResult:
        _, pair_j = self.upsilon.index_arrays
        S = np.zeros(len(self.upsilon))
        t = 0
        while t < cap:
            ys = source.next_block(min(BLOCK, cap - t))
            Z = np.ascontiguousarray(self.upsilon.increments(ys))
            row, d = _kernels.mcusum_scan(Z, S, self.h, pair_j, self.J, target)
            if row >= 0:
                return RunResult(t + row + 1, int(d), False)
            t += Z.shape[0]
        return RunResult(cap, 0, True)


@dataclass(frozen=True)
class GlrProcedure:
    """Window-limited GLR over Gaussian mean boxes (index 0 = pre-change)."""

    sets: tuple
    window: int
    h: float
    name: str = "glr"

    def __post_init__(self):
        object.__setattr__(self, "sets", tuple(self.sets))
        if self.window < 1:
            raise ValueError("window length must be >= 1")
        if not self.h > 0:
            raise ValueError("threshold h must be positive")

    @property
    def J(self) -> int:
        return len(self.sets) - 1

    def with_h(self, h: float) -> "GlrProcedure":
        return GlrProcedure(self.sets, self.window, float(h), self.name)

    def run(self, source: ObservationSource, target: int, cap: int) -> RunResult:
        lower = np.array([s.lower for s in self.sets])
        upper = np.array([s.upper for s in self.sets])
        N = lower.shape[1]
        w = self.window
        hist = np.empty((0, N))
        t = 0
        while t < cap:
            ys = source.next_block(min(BLOCK, cap - t))
            Y = np.ascontiguousarray(np.vstack([hist, ys]))
            start = hist.shape[0]
            row, d, cs = _kernels.glr_scan(Y, start, 0, lower, upper, w, self.h, target)
            if row >= 0:
                return RunResult(t + row - start + 1, int(d), False)
            t += ys.shape[0]
            hist = Y[max(cs, Y.shape[0] - (w - 1)):]
        return RunResult(cap, 0, True)


Procedure = McusumProcedure | GlrProcedure


# ---------------------------------------------------------------------------
# estimation


def _map_runs(fn: Callable[[int], RunResult], runs: int, threads: int) -> list[RunResult]:
    if threads <= 1:
        return [fn(r) for r in range(runs)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(runs)))


def _summarise(values: np.ndarray, censored: int, cap: int, misisolation=None) -> McEstimate:
    runs = values.size
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(runs))
    return McEstimate(mean, se, runs, int(censored), int(cap), misisolation)


def estimate_delay(
    procedure,
    scenario: Scenario,
    runs: int = 500,
    master_seed: int = 0,
    cap: int = 100_000,
    threads: int = 1,
) -> McEstimate:
    """Mean detection/isolation delay ``(T - change_time + 1)^+`` over seeded runs.

    ``misisolation`` is the fraction of stopped runs whose decision differs
    from the scenario's true type.
    """
    if runs < 2:
        raise ValueError("need at least 2 runs for a standard error")
    if scenario.post is None:
        raise ValueError("delay estimation needs a post-change distribution")

    def one(r):
        src = ObservationSource(run_rng(master_seed, r), scenario.post, scenario.pre, scenario.change_time)
        return procedure.run(src, 0, cap)

    results = _map_runs(one, runs, threads)
    T = np.array([res.T for res in results], dtype=float)
    delays = np.maximum(T - scenario.change_time + 1, 0.0)
    stopped = [res for res in results if not res.censored]
    wrong = sum(res.d != scenario.true_type for res in stopped)
    mis = wrong / len(stopped) if stopped else float("nan")
    return _summarise(delays, runs - len(stopped), cap, mis)


def estimate_false_metric(
    procedure,
    nus: Sequence[Distribution],
    i: int,
    target_j: int,
    runs: int = 500,
    master_seed: int = 0,
    cap_total: int = 200_000,
    threads: int = 1,
) -> McEstimate:
    """Mean time until a ``target_j`` decision when data are i.i.d. ``nus[i]``.

    Renewed copies of the procedure run back to back on one stream.  Censored
    runs contribute ``cap_total`` and flag the estimate as a lower bound.
    """
    if runs < 2:
        raise ValueError("need at least 2 runs for a standard error")
    if i == target_j:
        raise ValueError("false metric needs i != target_j")
    if not 1 <= target_j <= procedure.J:
        raise ValueError(f"target type {target_j} outside 1..{procedure.J}")
    dist = nus[i]

    def one(r):
        return procedure.run(ObservationSource(run_rng(master_seed, r), dist), target_j, cap_total)

    results = _map_runs(one, runs, threads)
    T = np.array([res.T for res in results], dtype=float)
    return _summarise(T, sum(res.censored for res in results), cap_total)


def false_metric_keys(J: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(J + 1) for j in range(1, J + 1) if i != j]


def false_metrics(procedure, nus, runs=500, master_seed=0, cap_total=200_000, threads=1) -> dict:
    """All components ``(i, j)``; the false metric F is the smallest mean."""
    return {
        (i, j): estimate_false_metric(procedure, nus, i, j, runs, master_seed, cap_total, threads)
        for (i, j) in false_metric_keys(procedure.J)
    }


@dataclass
class Calibration:
    h: float
    gamma: float
    F: McEstimate | None
    components: dict = field(default_factory=dict)
    evaluations: list = field(default_factory=list)
    status: str = "ok"
    warnings: list = field(default_factory=list)


def calibrate_threshold(
    procedure,
    nus: Sequence[Distribution],
    gamma: float,
    runs: int = 500,
    master_seed: int = 0,
    tolerance: float = 0.1,
    cap_total: int | None = None,
    max_evals: int = 24,
    threads: int = 1,
) -> Calibration:
    """Threshold whose estimated false metric lies within ``tolerance * gamma`` of ``gamma``.

    Starts from ``log gamma``, brackets, then bisects on ``h``.  Every
    evaluation reuses the same seed, so estimates at different ``h`` share
    their random numbers.
    """
    if not gamma > 1:
        raise ValueError("gamma must exceed 1")
    cap_total = int(cap_total or 20 * gamma)
    h0 = math.log(gamma)
    cal = Calibration(h0, gamma, None)

    def evaluate(h):
        comps = false_metrics(procedure.with_h(h), nus, runs, master_seed, cap_total, threads)
        key = min(comps, key=lambda k: comps[k].mean)
        cal.evaluations.append((h, comps[key].mean, comps[key].se))
        return comps, comps[key]

    def accept(h, comps, F):
        cal.h, cal.F, cal.components = h, F, comps
        if F.lower_bound:
            cal.warnings.append(f"false metric at h={h:.6g} is censored (lower bound)")
        return cal

    def close(F):
        return abs(F.mean - gamma) <= tolerance * gamma

    comps, F = evaluate(h0)
    if close(F):
        return accept(h0, comps, F)

    # bracket [lo, hi] with F(lo) < gamma < F(hi)
    lo = hi = None
    lo_eval = hi_eval = None
    step = 1.0
    if F.mean < gamma:
        lo, lo_eval = h0, (comps, F)
        h = h0
        while len(cal.evaluations) < max_evals:
            h += step
            step *= 2
            c, f = evaluate(h)
            if close(f):
                return accept(h, c, f)
            if f.mean > gamma:
                hi, hi_eval = h, (c, f)
                break
            lo, lo_eval = h, (c, f)
    else:
        hi, hi_eval = h0, (comps, F)
        h = h0
        while len(cal.evaluations) < max_evals:
            h = max(h - step, h / 4)
            step *= 2
            c, f = evaluate(h)
            if close(f):
                return accept(h, c, f)
            if f.mean < gamma:
                lo, lo_eval = h, (c, f)
                break
            hi, hi_eval = h, (c, f)

    if lo is None or hi is None:
        cal.status = "fallback"
        cal.warnings.append("Monte Carlo budget exhausted before bracketing gamma; using h = log gamma")
        cal.h, cal.F, cal.components = h0, F, comps
        log.warning(cal.warnings[-1])
        return cal

    while len(cal.evaluations) < max_evals:
        mid = 0.5 * (lo + hi)
        c, f = evaluate(mid)
        if close(f):
            return accept(mid, c, f)
        noise = 2.0 * (f.se + max(lo_eval[1].se, hi_eval[1].se))
        if f.mean < lo_eval[1].mean - noise or f.mean > hi_eval[1].mean + noise:
            cal.status = "non-monotone"
            cal.warnings.append(f"non-monotone false metric near h={mid:.6g}; returning widest bracketing h")
            log.warning(cal.warnings[-1])
            return accept(hi, *hi_eval)
        if f.mean < gamma:
            lo, lo_eval = mid, (c, f)
        else:
            hi, hi_eval = mid, (c, f)

    cal.status = "fallback"
    cal.warnings.append("Monte Carlo budget exhausted before reaching tolerance; using h = log gamma")
    log.warning(cal.warnings[-1])
    cal.h, cal.F, cal.components = h0, F, comps
    return cal


# ---------------------------------------------------------------------------
# robust versus oracle


def grid_distributions(lfds: Sequence[Distribution], change_type: int, mean) -> list[Distribution]:
    """LFDs with the ``change_type`` member replaced by ``N(mean, I)``."""
    nus = list(lfds)
    nus[change_type] = GaussianId(mean)
    return nus


def robustness_cost_bound(nus: Sequence[Distribution], pairs: UpsilonSet) -> float:
    """``min_{i != j} D(nu_j || nu_i) / Delta_*(nu, pairs)``: asymptotic cost of robustness."""
    J = len(nus) - 1
    kl_min = min(kl_divergence(nus[j], nus[i]) for (i, j) in false_metric_keys(J))
    return kl_min / delta_star(nus, pairs)


@dataclass(frozen=True)
class ComparisonRow:
    change_type: int
    mean: tuple
    robust: dict
    oracle: dict
    bound: float

    @property
    def W_robust(self) -> McEstimate:
        return max(self.robust.values(), key=lambda e: e.mean)

    @property
    def W_oracle(self) -> McEstimate:
        return max(self.oracle.values(), key=lambda e: e.mean)

    @property
    def ratio(self) -> float:
        return self.W_robust.mean / self.W_oracle.mean


def compare_robust_vs_oracle(
    model: UncertaintyModel,
    grid: Sequence[tuple[int, Sequence[float]]],
    h: float,
    runs: int = 500,
    master_seed: int = 0,
    cap: int = 100_000,
    threads: int = 1,
) -> list[ComparisonRow]:
    """Delays of the robust MCUSUM and the oracle MCUSUM at each grid point.

    A grid point ``(j, mean)`` sets the type-``j`` distribution to
    ``N(mean, I)`` and keeps every other class at its LFD.  Delays are
    estimated for every change type, so ``W`` (maximum over types) and the
    cost-of-robustness bound can be compared directly.
    """
    robust = McusumProcedure(model.candidate_pairs, h, "mcusum-robust")
    rows = []
    for change_type, mean in grid:
        nus = grid_distributions(model.lfds, change_type, mean)
        oracle = McusumProcedure(upsilon_from_distributions(nus), h, "mcusum-oracle")
        est_r, est_o = {}, {}
        for j in range(1, len(nus)):
            sc = Scenario(nus[0], nus[j], 1, j)
            est_r[j] = estimate_delay(robust, sc, runs, master_seed, cap, threads)
            est_o[j] = estimate_delay(oracle, sc, runs, master_seed, cap, threads)
        rows.append(
            ComparisonRow(change_type, tuple(float(x) for x in mean), est_r, est_o,
                          robustness_cost_bound(nus, model.candidate_pairs))
        )
    return rows
