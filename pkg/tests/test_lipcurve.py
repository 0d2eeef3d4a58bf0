"""Curve length, stalls, unit-speed reparameterization, right-ODE scheme."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from singtrace.lipcurve import (
    ContractViolationError,
    DegenerateCurveError,
    RefinementError,
    SampledCurve,
    arc_length,
    euler_right_ode,
    has_min_slope,
    reparam_by_length,
    solve_right_ode,
    solve_right_ode_interp,
    stall_interval,
)


def segment_curve(speed=1.0, n=11):
    t = np.linspace(0, 1, n)
    pts = np.stack([speed * t, np.zeros_like(t)], axis=1)
    return SampledCurve(params=t, points=pts)


def stalled_curve():
    """Moves on [0, 0.3], constant on [0.3, 0.5], moves on [0.5, 1]."""
    t = np.linspace(0, 1, 101)
    x = np.where(t < 0.3, t, np.where(t <= 0.5, 0.3, t - 0.2))
    return SampledCurve(params=t, points=np.stack([x, np.zeros_like(x)], axis=1))


class TestArcLength:
    def test_unit_segment(self):
        assert arc_length(segment_curve(), 0, 1) == pytest.approx(1.0)

    def test_zero_interval(self):
        c = segment_curve()
        for t in (0.0, 0.37, 1.0):
            assert arc_length(c, t, t) == 0.0

    def test_quarter_circle(self):
        # chord-sum convergence: error ~ (pi/2)^3 / (24 n^2)
        th = np.linspace(0, np.pi / 2, 10_001)
        c = SampledCurve(params=th, points=np.stack([np.cos(th), np.sin(th)], axis=1))
        assert arc_length(c, 0, np.pi / 2) == pytest.approx(np.pi / 2, abs=1e-6)

    def test_additivity(self):
        rng = np.random.default_rng(3)
        t = np.sort(rng.uniform(0, 1, 40))
        t[0], t[-1] = 0.0, 1.0
        t = np.unique(t)
        pts = rng.normal(size=(len(t), 2))
        c = SampledCurve(params=t, points=pts)
        for _ in range(100):
            t1, t2, t3 = np.sort(rng.uniform(0, 1, 3))
            total = arc_length(c, t1, t3)
            split = arc_length(c, t1, t2) + arc_length(c, t2, t3)
            assert abs(total - split) <= 1e-12 * (1 + total)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            arc_length(segment_curve(), -0.5, 0.5)
        with pytest.raises(ValueError):
            arc_length(segment_curve(), 0.5, 0.2)


class TestStallInterval:
    def test_moving_curve(self):
        si = stall_interval(segment_curve(), 0.4, 1e-10)
        assert si.tau1 == pytest.approx(0.4)
        assert si.tau2 == pytest.approx(0.4)

    def test_interior_stall(self):
        si = stall_interval(stalled_curve(), 0.4, 1e-10)
        assert si.tau1 == pytest.approx(0.3, abs=1e-9)
        assert si.tau2 == pytest.approx(0.5, abs=1e-9)

    def test_constant_curve(self):
        t = np.linspace(0, 2, 21)
        c = SampledCurve(params=t, points=np.ones((21, 2)))
        si = stall_interval(c, 1.0, 1e-10)
        assert si.tau1 == 0.0
        assert si.tau2 == 2.0

    def test_monotone_in_tolerance(self):
        c = stalled_curve()
        for t in (0.35, 0.4, 0.45):
            tight = stall_interval(c, t, 1e-12)
            loose = stall_interval(c, t, 1e-3)
            assert loose.tau1 <= tight.tau1 <= tight.tau2 <= loose.tau2


class TestReparam:
    def test_speed_two_segment(self):
        c = segment_curve(speed=2.0)
        r = reparam_by_length(c)
        assert r.params[-1] == pytest.approx(2.0)
        ratios = np.hypot(*np.diff(r.points, axis=0).T) / np.diff(r.params)
        assert np.all(ratios <= 1.0)
        assert np.all(ratios >= 1 - 1e-9)

    def test_stall_removed_length_preserved(self):
        c = stalled_curve()
        r = reparam_by_length(c)
        assert r.params[-1] == pytest.approx(c.length(), abs=1e-12)
        # the stall collapses: strictly increasing arc positions
        assert np.all(np.diff(r.params) > 0)
        assert len(r.points) < len(c.points)

    def test_unit_speed_idempotent(self):
        c = segment_curve()
        r = reparam_by_length(c)
        assert np.allclose(r.points, c.points)
        assert np.allclose(r.params, c.cumlen)

    def test_zero_length_rejected(self):
        t = np.linspace(0, 1, 5)
        c = SampledCurve(params=t, points=np.zeros((5, 2)))
        with pytest.raises(DegenerateCurveError):
            reparam_by_length(c)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000), st.booleans())
    def test_unit_speed_property(self, seed, with_stall):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 40))
        pts = [rng.normal(size=2)]
        for _ in range(n):
            if with_stall and rng.random() < 0.25:
                pts.append(pts[-1].copy())
            else:
                step = rng.normal(size=2)
                nrm = max(float(np.hypot(*step)), 1e-12)
                pts.append(pts[-1] + step * rng.uniform(0.02, 0.3) / nrm)
        pts = np.asarray(pts)
        gaps = rng.uniform(0.01, 0.2, size=len(pts))
        t = np.cumsum(gaps) - gaps[0]
        c = SampledCurve(params=t, points=pts)
        try:
            r = reparam_by_length(c)
        except DegenerateCurveError:
            return
        ratios = np.hypot(*np.diff(r.points, axis=0).T) / np.diff(r.params)
        assert np.all(ratios <= 1.0)
        assert np.all(ratios >= 1 - 1e-9)
        assert abs(r.params[-1] - c.length()) <= 1e-12 * (1 + c.length())


def step_field(y):
    """Right-continuous slope: 2 below state 0.5, then 1."""
    return 2.0 if y < 0.5 else 1.0


def step_field_exact(t):
    """Closed-form solution of the step-field ODE on [0, 0.5]."""
    return np.where(t <= 0.25, 2 * t, 0.5 + (t - 0.25))


class TestEulerRightOde:
    def test_constant_field_exact(self):
        for m in (1, 7, 50):
            t, x = euler_right_ode(lambda y: 1.5, 3.0, 1.5, 1.5, m)
            assert np.allclose(x, 1.5 * t)

    @pytest.mark.parametrize("m", [7, 10, 100, 1000])
    def test_step_field_error_bound(self, m):
        t, x = euler_right_ode(step_field, 1.0, 1.0, 2.0, m)
        err = np.max(np.abs(x - step_field_exact(t)))
        assert err <= 2 * (1.0 / 2.0) / m + 1e-15

    def test_exponential_field(self):
        # ydot = 1 + y has solution e^t - 1; stays within [1, 2] on [0, 0.5]
        for m in (64, 256, 1024):
            t, x = euler_right_ode(lambda y: min(2.0, 1.0 + y), 1.0, 1.0, 2.0, m)
            err = np.max(np.abs(x - (np.exp(t) - 1)))
            assert err <= 3.0 / m

    def test_range_contract(self):
        with pytest.raises(ContractViolationError):
            euler_right_ode(lambda y: 3.0, 1.0, 1.0, 2.0, 10)
        with pytest.raises(ContractViolationError):
            euler_right_ode(lambda y: 0.5, 1.0, 1.0, 2.0, 10)

    @pytest.mark.parametrize("m", [3, 10, 100, 1000])
    def test_outputs_increasing_and_lipschitz(self, m):
        t, x = euler_right_ode(step_field, 1.0, 1.0, 2.0, m)
        assert has_min_slope(t, x, 1.0)
        dt = np.diff(t)
        assert np.all(np.diff(x) <= 2.0 * dt + 1e-15)

    def test_refinement_cauchy(self):
        t, x, m, gap = solve_right_ode(step_field, 1.0, 1.0, 2.0, tol=1e-6)
        assert gap < 1e-6
        err = np.max(np.abs(x - step_field_exact(t)))
        assert err <= 2e-6

    def test_refinement_failure_raises(self):
        # smooth field: first-order gap ~ 1/m never reaches 1e-14 in 4 doublings
        f = lambda y: min(2.0, 1.0 + y)
        with pytest.raises(RefinementError):
            solve_right_ode(f, 1.0, 1.0, 2.0, tol=1e-14, max_doublings=4)

    def test_interp_variant_matches_callable(self):
        knots = np.linspace(0.0, 1.0, 9)
        vals = 1.0 + 0.8 * np.abs(np.sin(5 * knots))
        f = lambda y: float(np.interp(y, knots, vals))
        t1, x1, m1, _ = solve_right_ode(f, 1.0, 1.0, 1.8, tol=1e-7, m0=16)
        t2, x2, m2, _ = solve_right_ode_interp(knots, vals, 1.0, 1.8, tol=1e-7, m0=16)
        assert m1 == m2
        assert np.allclose(x1, x2, atol=1e-13)

    def test_interp_range_contract(self):
        with pytest.raises(ContractViolationError):
            solve_right_ode_interp([0.0, 1.0], [0.5, 1.5], 1.0, 2.0)


class TestMinSlope:
    def test_examples(self):
        t = np.linspace(0, 1, 50)
        assert has_min_slope(t, 2 * t, 1.0)
        assert not has_min_slope(t, t, 2.0)

    def test_euler_output_b1(self):
        t, x = euler_right_ode(step_field, 1.0, 1.0, 2.0, 37)
        assert has_min_slope(t, x, 1.0)
