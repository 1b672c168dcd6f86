"""Verifiers for weak and dual stochastic boundedness of Gaussian mean boxes.

For identity-covariance Gaussians both quantities the definitions optimise
over a box are affine in the mean:

* drift ``D(nu||v0) - D(nu||v1) = (t1 - t0).phi + (|t0|^2 - |t1|^2) / 2``
* LR-expectation exponent ``log E^nu[dv1/dv0] = (t1 - t0).(mu - t0)``

so every infimum/supremum is attained coordinate-wise at a box face (or is
unbounded), and is evaluated exactly by sign analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import DistPair, GaussianId, delta, gaussian_llr_coefficients, kl_divergence
from .glr import BoxSet
from .mcusum import UpsilonSet, expected_keys

# absolute slack for exact-arithmetic comparisons; tight cases meet with equality
TOL = 1e-12


@dataclass(frozen=True)
class Witness:
    condition: str
    point: tuple | None
    value: float
    bound: float
    relation: str  # "<=", ">=" or "=="
    passed: bool

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "point": None if self.point is None else [_num(x) for x in self.point],
            "value": _num(self.value),
            "bound": _num(self.bound),
            "relation": self.relation,
            "passed": self.passed,
        }


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


@dataclass
class Certificate:
    passed: bool
    witnesses: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @classmethod
    def of(cls, witnesses, warnings=()):
        witnesses = list(witnesses)
        return cls(all(w.passed for w in witnesses), witnesses, list(warnings))

    def failed(self) -> list[Witness]:
        return [w for w in self.witnesses if not w.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "witnesses": [w.to_dict() for w in self.witnesses],
            "warnings": list(self.warnings),
        }


def _compare(condition, point, value, bound, relation, tol=TOL) -> Witness:
    if relation == "<=":
        ok = value <= bound + tol
    elif relation == ">=":
        ok = value >= bound - tol
    else:
        ok = abs(value - bound) <= tol if math.isfinite(value) and math.isfinite(bound) else value == bound
    return Witness(condition, None if point is None else tuple(point), value, bound, relation, bool(ok))


# ---------------------------------------------------------------------------
# exact affine optimisation over boxes


def _minimise_linear(coef: np.ndarray, box: BoxSet) -> tuple[float, np.ndarray]:
    """``min_{x in box} coef.x`` and a minimiser (with infinite entries if unbounded)."""
    point = np.empty(coef.size)
    total = 0.0
    for c, a in enumerate(coef):
        lo, hi = box.lower[c], box.upper[c]
        if a > 0:
            x = lo
        elif a < 0:
            x = hi
        else:
            x = lo if math.isfinite(lo) else (hi if math.isfinite(hi) else 0.0)
        point[c] = x
        if a != 0:
            total += a * x
    return total, point


def delta_ij(nu_j: GaussianId, pair: DistPair) -> float:
    return delta(nu_j, pair)


def delta_star(nus: Sequence, upsilon: UpsilonSet) -> float:
    """``min_{(i, j)} D(nu_j || v0_ij) - D(nu_j || v1_ij)``."""
    if len(nus) != upsilon.J + 1:
        raise ValueError(f"need {upsilon.J + 1} distributions, got {len(nus)}")
    return min(delta(nus[j], upsilon[i, j]) for (i, j) in upsilon)


def inf_delta_over_box(box: BoxSet, pair: DistPair) -> tuple[float, np.ndarray]:
    """Infimum of the drift over ``N(phi, I)``, ``phi`` in ``box``, with its minimiser."""
    a, b = gaussian_llr_coefficients(pair)
    val, point = _minimise_linear(a, box)
    return val + b, point


def sup_lr_expectation_over_box(box: BoxSet, pair: DistPair) -> tuple[float, np.ndarray]:
    """Supremum of ``E^{N(mu, I)}[dv1/dv0]`` over ``mu`` in ``box``, with its maximiser."""
    a, _ = gaussian_llr_coefficients(pair)
    t0 = pair.null_dist.mean
    neg, point = _minimise_linear(-a, box)
    exponent = -neg - float(a @ t0)
    value = math.exp(exponent) if exponent < 709.0 else math.inf
    return value, point


def _distance_outside(box: BoxSet, point) -> float:
    p = np.asarray(point, dtype=float)
    return float(np.max(np.maximum(box.lower - p, 0.0) + np.maximum(p - box.upper, 0.0)))


def _membership(condition, box: BoxSet, dist: GaussianId) -> Witness:
    return _compare(condition, dist.mean, _distance_outside(box, dist.mean), 0.0, "<=")


# ---------------------------------------------------------------------------
# weak stochastic boundedness


def check_wsb(set_i: BoxSet, set_j: BoxSet, pair: DistPair, label: str = "") -> Certificate:
    """Is ``(set_i, set_j)`` weakly stochastically bounded by ``pair``?

    Checks membership of the pair in ``set_i x set_j``, the drift condition
    (infimum over ``set_j`` at least ``D(v1 || v0)``) and the LR-expectation
    condition (supremum over ``set_i`` at most 1).
    """
    tag = f"[{label}]" if label else ""
    inf_d, p1 = inf_delta_over_box(set_j, pair)
    sup_e, p2 = sup_lr_expectation_over_box(set_i, pair)
    return Certificate.of([
        _membership(f"member_null{tag}", set_i, pair.null_dist),
        _membership(f"member_alt{tag}", set_j, pair.alt_dist),
        _compare(f"WSB1{tag}", p1, inf_d, kl_divergence(pair.alt_dist, pair.null_dist), ">="),
        _compare(f"WSB2{tag}", p2, sup_e, 1.0, "<="),
    ])


# ---------------------------------------------------------------------------
# dual stochastic boundedness


@dataclass
class UncertaintyModel:
    sets: list
    candidate_pairs: UpsilonSet
    lfds: list

    def __post_init__(self):
        J = self.candidate_pairs.J
        if len(self.sets) != J + 1 or len(self.lfds) != J + 1:
            raise ValueError(f"need {J + 1} sets and LFDs for J={J}")

    @property
    def J(self) -> int:
        return self.candidate_pairs.J

    def disjointness_warnings(self) -> list[str]:
        out = []
        for a in range(len(self.sets)):
            for b in range(a + 1, len(self.sets)):
                if self.sets[a].overlaps(self.sets[b]):
                    out.append(f"uncertainty sets {a} and {b} overlap")
        return out

    def membership_witnesses(self) -> list[Witness]:
        ws = [_membership(f"member_lfd[{i}]", self.sets[i], nu) for i, nu in enumerate(self.lfds)]
        for (i, j) in self.candidate_pairs:
            pair = self.candidate_pairs[i, j]
            ws.append(_membership(f"member_null[{i},{j}]", self.sets[i], pair.null_dist))
            ws.append(_membership(f"member_alt[{i},{j}]", self.sets[j], pair.alt_dist))
        return ws


def _min_inf_delta(model: UncertaintyModel) -> tuple[float, tuple, tuple]:
    best = (math.inf, None, None)
    for (i, j) in model.candidate_pairs:
        val, point = inf_delta_over_box(model.sets[j], model.candidate_pairs[i, j])
        if val < best[0]:
            best = (val, (i, j), point)
    return best


def _min_lfd_kl(model: UncertaintyModel) -> float:
    return min(kl_divergence(model.lfds[j], model.lfds[i]) for (i, j) in expected_keys(model.J))


def check_dsb_via_wsb(model: UncertaintyModel) -> Certificate:
    """Sufficient route: pairwise WSB plus the two min-min conditions on the LFDs."""
    ws = model.membership_witnesses()
    for (i, j) in model.candidate_pairs:
        cert = check_wsb(model.sets[i], model.sets[j], model.candidate_pairs[i, j], f"{i},{j}")
        ws.extend(w for w in cert.witnesses if not w.condition.startswith("member"))
    inf_val, _, point = _min_inf_delta(model)
    dstar = delta_star(model.lfds, model.candidate_pairs)
    ws.append(_compare("pDSB1", point, inf_val, dstar, "=="))
    pair_kl = min(kl_divergence(p.alt_dist, p.null_dist) for p in model.candidate_pairs.pairs.values())
    ws.append(_compare("pDSB2", None, _min_lfd_kl(model), pair_kl, "<="))
    return Certificate.of(ws, model.disjointness_warnings())


def check_dsb_direct(model: UncertaintyModel) -> Certificate:
    """The three dual-boundedness inequalities evaluated directly."""
    ws = model.membership_witnesses()
    dstar = delta_star(model.lfds, model.candidate_pairs)
    inf_val, _, point = _min_inf_delta(model)
    ws.append(_compare("DSB1", point, dstar, inf_val, "<="))
    ws.append(_compare("DSB2", None, _min_lfd_kl(model), dstar, "<="))
    for (i, j) in model.candidate_pairs:
        val, p = sup_lr_expectation_over_box(model.sets[i], model.candidate_pairs[i, j])
        ws.append(_compare(f"DSB3[{i},{j}]", p, val, 1.0, "<="))
    return Certificate.of(ws, model.disjointness_warnings())


def verify_candidates(sets: Sequence[BoxSet], candidates) -> list[tuple[int, Certificate]]:
    """Direct DSB certificates for several ``(lfds, pairs)`` candidates; all passing ones are returned."""
    out = []
    for idx, (lfds, pairs) in enumerate(candidates):
        cert = check_dsb_direct(UncertaintyModel(list(sets), pairs, list(lfds)))
        if cert.passed:
            out.append((idx, cert))
    return out
