import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quickdiag.cusum import Censored
from quickdiag.distributions import run_rng
from quickdiag.glr import BoxSet, clipped_mle, glr_new, glr_run, glr_statistic, glr_step, segment_llr_terms
from quickdiag.mcusum import Diagnosis
from quickdiag.montecarlo import GlrProcedure, ObservationSource

from conftest import G


def push(state, ys):
    out = None
    for y in ys:
        out = glr_step(state, y)
    return out


class TestBoxSet:
    def test_projection(self, sets):
        assert np.array_equal(clipped_mle(sets[1], [[0.9, 0.3]]), [0.8, 0.4])
        assert np.array_equal(clipped_mle(sets[2], [[2.0, 1.2]]), [2.0, 1.5])
        assert np.array_equal(clipped_mle(sets[0], [[1.0, -1.0], [1.0, -3.0]]), [0.0, -2.0])

    def test_empty_window(self, sets):
        with pytest.raises(ValueError):
            clipped_mle(sets[1], np.empty((0, 2)))

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            BoxSet([1.0, 0.0], [0.0, 1.0])
        with pytest.raises(ValueError):
            BoxSet([math.nan, 0.0], [1.0, 1.0])

    def test_contains_and_overlap(self, sets):
        assert sets[1].contains([0.4, 0.8]) and not sets[1].contains([0.39, 0.5])
        assert not sets[0].overlaps(sets[1])
        assert BoxSet([None, None], [0.5, 0.5]).overlaps(sets[1])


class TestStatistic:
    def test_single_sample(self, sets):
        state = glr_new(sets, 10, 100.0)
        push(state, [[0.6, 0.6]])
        assert glr_statistic(state, 1) == pytest.approx(0.36, abs=1e-12)

    def test_segment_terms(self, sets):
        L = segment_llr_terms(sets, [[0.6, 0.6]])
        assert L[0, 1] == pytest.approx(0.36, abs=1e-12)
        assert L[2, 1] == pytest.approx(0.81, abs=1e-12)
        assert np.allclose(L, -L.T)

    def test_null_data_gives_nonpositive(self, sets):
        state = glr_new(sets, 5, 100.0)
        push(state, np.zeros((5, 2)))
        assert glr_statistic(state, 1) <= 0.0
        assert glr_statistic(state, 2) <= 0.0

    def test_window_is_limited(self, sets):
        state = glr_new(sets, 3, 1e9)
        push(state, [[5.0, 5.0]] * 10 + [[0.6, 0.6]] * 3)
        assert glr_statistic(state, 1) == pytest.approx(3 * 0.36, abs=1e-12)

    def test_bad_type(self, sets):
        state = glr_new(sets, 3, 1.0)
        with pytest.raises(ValueError):
            glr_statistic(state, 0)

    @given(st.floats(-3, 3), st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_translation_equivariance(self, shift, seed):
        """Shifting data and every box by the same vector leaves the statistic unchanged."""
        base = [BoxSet([None, None], [0.0, 0.0]), BoxSet([0.4, 0.4], [0.8, 0.8]), BoxSet([1.5, 1.5], [None, None])]
        moved = [BoxSet(s.lower + shift, s.upper + shift) for s in base]
        ys = np.random.default_rng(seed).normal(0.5, 1.0, size=(8, 2))
        a, b = glr_new(base, 8, 1e9), glr_new(moved, 8, 1e9)
        push(a, ys)
        push(b, ys + shift)
        for j in (1, 2):
            assert glr_statistic(a, j) == pytest.approx(glr_statistic(b, j), abs=1e-9)


class TestRun:
    def test_isolates_type_two(self, sets):
        proc = GlrProcedure(sets, 50, math.log(1e4))
        decisions = [proc.run(ObservationSource(run_rng(31, r), G(1.5)), 0, 10_000).d for r in range(500)]
        assert np.mean(np.array(decisions) == 2) >= 0.95

    def test_huge_threshold_is_censored(self, sets):
        ys = G(1.5).sample(run_rng(1, 1), 200)
        assert glr_run(sets, 20, 1e9, ys, 200) == Censored(200)

    def test_unit_window_stops(self, sets):
        ys = G(1.5).sample(run_rng(1, 2), 200)
        out = glr_run(sets, 1, 0.5, ys, 200)
        assert isinstance(out, Diagnosis)

    def test_stepping_stopped_state(self, sets):
        state = glr_new(sets, 1, 0.01)
        assert glr_step(state, [3.0, 3.0]) == Diagnosis(1, 2)
        with pytest.raises(RuntimeError):
            glr_step(state, [3.0, 3.0])

    def test_validation(self, sets):
        with pytest.raises(ValueError):
            glr_new(sets, 0, 1.0)
        with pytest.raises(ValueError):
            glr_new(sets, 5, 0.0)
        with pytest.raises(ValueError):
            glr_new(sets[:1], 5, 1.0)


class TestCompiledPath:
    @pytest.mark.parametrize("mean,w", [(0.4, 10), (0.8, 25), (1.5, 5), (0.0, 7)])
    def test_single_run(self, sets, mean, w):
        proc = GlrProcedure(sets, w, 4.0)
        for r in range(15):
            res = proc.run(ObservationSource(run_rng(8, r), G(mean)), 0, 1200)
            ref = glr_run(sets, w, 4.0, G(mean).sample(run_rng(8, r), 1200), 1200)
            if isinstance(ref, Censored):
                assert res.censored
            else:
                assert (res.T, res.d) == (ref.T, ref.d)

    def test_renewal_matches_reference(self, sets):
        """Copies restart on fresh data only; compare with a hand-rolled renewal loop."""
        h, w, cap = 2.0, 6, 3000
        proc = GlrProcedure(sets, w, h)
        for r in range(15):
            ys = G(0.0).sample(run_rng(9, r), cap)
            expected, state = cap, glr_new(sets, w, h)
            for k, y in enumerate(ys, start=1):
                out = glr_step(state, y)
                if out is None:
                    continue
                if out.d == 1:
                    expected = k
                    break
                state = glr_new(sets, w, h)
            res = proc.run(ObservationSource(run_rng(9, r), G(0.0)), 1, cap)
            assert res.T == expected

    def test_cost_linear_in_window(self, sets):
        def cost(w):
            proc = GlrProcedure(sets, w, 1e9)
            best = math.inf
            for _ in range(3):
                t0 = time.perf_counter()
                proc.run(ObservationSource(run_rng(0, 0), G(0.0)), 0, 4000)
                best = min(best, time.perf_counter() - t0)
            return best

        cost(10)  # compile
        ratio = cost(400) / cost(100)
        assert ratio < 8.0  # linear growth predicts ~4, quadratic ~16
