import numpy as np
import pytest
from numpy.testing import assert_allclose

from psamtrain.estimator import CAUSAL, NONCAUSAL, PilotPattern
from psamtrain.fading import GaussMarkov, Jakes
from psamtrain.grid import IsubGrid, default_p_axis
from psamtrain.mi import BinaryInput
from psamtrain.policy import (FramePlan, _allocate_data, _golden_max, _scan_then_golden,
                              _SlotCurves, attach_inputs, frame_rate, no_training_baseline,
                              optimize_all, optimize_policy_I, optimize_policy_II,
                              optimize_policy_III, optimize_policy_IV, percent_improvements)


def synthetic_grid(noise_var=1.0, p_points=40, v_points=21):
    """Concave in P, decreasing in v, positive without CSI."""
    p = default_p_axis(10.0, p_points)
    v = np.linspace(0, 1, v_points)
    z = 0.6 * (1 - np.exp(-p[:, None] * (1.1 - v[None, :]) / noise_var))
    return IsubGrid(p, v, z, noise_var, "nats")


def constant_grid(c, noise_var=1.0):
    p = default_p_axis(10.0, 10)
    z = np.full((len(p), 5), c)
    z[0] = 0.0
    return IsubGrid(p, np.linspace(0, 1, 5), z, noise_var, "nats")


GRID = synthetic_grid()
SEARCH = dict(k_max=3, t_max=25, grid=GRID)


@pytest.fixture(scope="module")
def all_causal():
    return optimize_all(GaussMarkov(0.98), 1.0, 1.0, GRID, k_max=3, t_max=25)


class TestFramePlan:
    def test_shape(self):
        with pytest.raises(ValueError):
            FramePlan(PilotPattern(5, 1), np.ones(3))

    def test_negative(self):
        with pytest.raises(ValueError):
            FramePlan(PilotPattern(4, 1), [1.0, -1.0, 1.0])

    def test_average_power(self):
        plan = FramePlan(PilotPattern(4, 1, CAUSAL, (2.0,)), [1.0, 0.5, 0.5])
        assert plan.average_power == 1.0
        assert_allclose(plan.frame_powers, [2, 1, 0.5, 0.5])


class TestFrameRate:
    def test_zero_data_power(self):
        plan = FramePlan(PilotPattern(6, 2), np.zeros(4))
        assert frame_rate(plan, GaussMarkov(0.9), 1.0, GRID) == 0.0

    def test_normalized_by_frame_length(self):
        plan = FramePlan(PilotPattern(4, 1), np.ones(3))
        assert frame_rate(plan, GaussMarkov(0.9), 1.0, constant_grid(0.3)) == pytest.approx(0.225)

    def test_noise_mismatch(self):
        with pytest.raises(ValueError):
            frame_rate(FramePlan(PilotPattern(4, 1), np.ones(3)), GaussMarkov(0.9), 0.5, GRID)

    def test_power_beyond_grid(self):
        with pytest.raises(ValueError):
            frame_rate(FramePlan(PilotPattern(4, 1), [1, 1, 11.0]), GaussMarkov(0.9), 1.0, GRID)


class TestBaseline:
    def test_zero_power(self):
        assert no_training_baseline(0.0, 1.0, GRID) == 0.0

    def test_reads_no_csi_column(self):
        assert no_training_baseline(1.0, 1.0, GRID) == pytest.approx(0.6 * (1 - np.exp(-0.1)),
                                                                     rel=1e-3)


class TestPolicyI:
    def test_ties_prefer_small_k_then_small_t(self):
        r = optimize_policy_I(GaussMarkov(0.9), 1.0, 1.0, k_max=3, t_max=10,
                              grid=constant_grid(0.0))
        assert (r.n_pilots, r.spacing) == (1, 2)

    def test_white_fading_training_useless(self):
        r = optimize_policy_I(GaussMarkov(0.0), 1.0, 1.0, **SEARCH)
        assert r.rate < r.baseline_rate
        assert not r.training_beneficial

    def test_all_powers_average(self, all_causal):
        r = all_causal["I"]
        assert np.all(r.plan.frame_powers == 1.0)

    def test_exhaustive_without_early_stop(self):
        model = GaussMarkov(0.98)
        r = optimize_policy_I(model, 1.0, 1.0, patience=None, **SEARCH)
        best = max(frame_rate(FramePlan(PilotPattern(T, k), np.ones(T - k)), model, 1.0, GRID)
                   for k in range(1, 4) for T in range(k + 1, 26))
        assert r.rate == pytest.approx(best, rel=1e-14)
        assert len(r.trace) == sum(25 - k for k in range(1, 4))

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            optimize_policy_I(GaussMarkov(0.9), 1.0, 1.0, k_max=5, t_max=5, grid=GRID)
        with pytest.raises(ValueError):
            optimize_policy_I(GaussMarkov(0.9), 0.0, 1.0, **SEARCH)
        with pytest.raises(ValueError):
            optimize_policy_I(GaussMarkov(0.9), 1.0, 0.5, **SEARCH)


class TestHigherPolicies:
    def test_ordering(self, all_causal):
        r = all_causal
        assert r["IV"].rate >= r["III"].rate >= r["II"].rate >= r["I"].rate - 1e-6

    def test_budget_tight(self, all_causal):
        for pid in ("II", "III", "IV"):
            assert abs(all_causal[pid].plan.average_power - 1.0) <= 1e-9

    def test_policy_ii_is_flat(self, all_causal):
        plan = all_causal["II"].plan
        assert np.ptp(plan.pilot_powers) == 0 and np.ptp(plan.data_powers) == 0

    def test_policy_ii_recomputes(self, all_causal):
        r = all_causal["II"]
        assert frame_rate(r.plan, GaussMarkov(0.98), 1.0, GRID) == pytest.approx(r.rate,
                                                                                 rel=1e-12)

    def test_policy_iii_favours_reliable_slots(self, all_causal):
        r = all_causal["III"]
        order = np.argsort(r.variances, kind="stable")
        assert np.all(np.diff(r.plan.data_powers[order]) <= 1e-6)

    def test_policy_iv_causal_single_pilot(self, all_causal):
        assert all_causal["IV"].n_pilots == 1

    def test_forced_four_pilots_causal(self):
        r = optimize_policy_IV(GaussMarkov(0.98), 1.0, 1.0, k_values=[4], t_max=25, grid=GRID)
        p = r.plan.pilot_powers
        assert r.n_pilots == 4
        assert p[-1] >= 0.99 * p.sum()

    def test_forced_four_pilots_noncausal(self):
        r = optimize_policy_IV(GaussMarkov(0.98), 1.0, 1.0, k_values=[4], t_max=25, grid=GRID,
                               mode=NONCAUSAL)
        p = r.plan.pilot_powers
        assert min(p[0], p[-1]) > max(p[1], p[2])
        assert abs(r.plan.average_power - 1.0) <= 1e-9

    def test_jakes_causal_takes_numerical_route(self):
        r = optimize_policy_IV(Jakes(100.0, 1e-4), 1.0, 1.0, k_max=2, t_max=20, grid=GRID)
        ii = optimize_policy_II(Jakes(100.0, 1e-4), 1.0, 1.0, k_max=2, t_max=20, grid=GRID)
        assert r.rate >= ii.rate - 1e-9

    def test_papr_cap(self):
        model = GaussMarkov(0.98)
        r2 = optimize_policy_II(model, 1.0, 1.0, papr_cap=1.5, **SEARCH)
        assert np.all(r2.plan.pilot_powers <= 1.5 + 1e-12)
        r4 = optimize_policy_IV(model, 1.0, 1.0, papr_cap=1.5, incumbent=r2, **SEARCH)
        assert np.all(r4.plan.pilot_powers <= 1.5 + 1e-12)
        assert r4.rate >= r2.rate - 1e-6
        with pytest.raises(ValueError):
            optimize_policy_II(model, 1.0, 1.0, papr_cap=0.0, **SEARCH)

    def test_deterministic(self, all_causal):
        again = optimize_policy_III(GaussMarkov(0.98), 1.0, 1.0, **SEARCH)
        assert again.rate == all_causal["III"].rate
        assert np.array_equal(again.plan.data_powers, all_causal["III"].plan.data_powers)

    def test_optimize_all_subset(self):
        out = optimize_all(GaussMarkov(0.98), 1.0, 1.0, GRID, k_max=2, t_max=15,
                           policies=("II",))
        assert list(out) == ["II"]
        assert optimize_all(GaussMarkov(0.98), 1.0, 1.0, GRID, policies=()) == {}


class TestHelpers:
    def test_allocation_matches_greedy_segments(self):
        # for concave piecewise-linear curves, filling segments by slope is exact
        rng = np.random.default_rng(0)
        v = rng.uniform(0, 1, size=12)
        curves = _SlotCurves(GRID, v)
        budget = 9.0
        P, total = _allocate_data(curves, budget, GRID.p_max)
        seg = []
        widths = np.diff(GRID.p_axis)
        for r in range(len(v)):
            for i, w in enumerate(widths):
                seg.append((curves.slopes[r, i], w))
        seg.sort(key=lambda s: -s[0])
        left, best = budget, 0.0
        for slope, w in seg:
            take = min(w, left)
            best += slope * take
            left -= take
            if left <= 0:
                break
        assert total == pytest.approx(best + curves(np.zeros(12)).sum(), abs=1e-7)
        assert P.sum() == pytest.approx(budget, abs=1e-12)

    def test_curves_equal_bilinear(self):
        from psamtrain.grid import interpolate
        v = np.array([0.0, 0.13, 0.5, 0.999])
        P = np.array([0.0, 0.7, 3.3, 10.0])
        assert_allclose(_SlotCurves(GRID, v)(P), interpolate(GRID, P, v), rtol=1e-13)

    def test_golden(self):
        x, fx = _golden_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, 1e-9)
        assert x == pytest.approx(0.3, abs=1e-8)

    def test_scan_finds_global(self):
        f = lambda x: np.sin(3 * x) + 0.5 * np.sin(11 * x)
        x, fx = _scan_then_golden(f, 3.0)
        xs = np.linspace(1e-6, 3, 200001)
        assert fx == pytest.approx(f(xs).max(), abs=1e-9)

    def test_percent_columns(self, all_causal):
        pct = percent_improvements(all_causal)
        assert pct["II"] == pytest.approx(100 * (all_causal["II"].rate / all_causal["I"].rate - 1))
        one = all_causal["I"].best_rate_for_k(1)
        assert pct["I"] == pytest.approx(100 * (all_causal["I"].rate / one - 1))

    def test_attach_inputs(self):
        r = optimize_policy_I(GaussMarkov(0.9), 1.0, 1.0, k_max=1, t_max=4, grid=GRID)
        attach_inputs(r, 1.0)
        assert len(r.per_slot_inputs) == r.spacing - r.n_pilots
        assert all(isinstance(i, BinaryInput) for i in r.per_slot_inputs)
        assert all(i.power == pytest.approx(1.0) for i in r.per_slot_inputs)
