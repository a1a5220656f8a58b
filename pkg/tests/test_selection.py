import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from paraconvex import (
    Ball,
    ContractionNotCertified,
    EmptyIntersection,
    IterationSchedule,
    PointCloud,
    PreconditionFailure,
    bary_select,
    constant_map,
    generate_scene,
    improve_epsilon_selection,
    iterate_to_member,
    nearest_on_set,
    set_distance,
)

SEGMENT = generate_scene("segment")


class TestBarySelect:
    def test_symmetric_pair_gives_midpoint(self):
        c = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]]))
        hp = bary_select(c, Ball(np.array([0.5, 0.0]), 0.7))
        assert hp.point == pytest.approx([0.5, 0.0], abs=1e-15)
        w = dict(hp.support)
        assert w[0] == pytest.approx(0.5, abs=1e-15)
        assert w[1] == pytest.approx(0.5, abs=1e-15)

    def test_single_member_jumps_exactly(self):
        c = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]]))
        hp = bary_select(c, Ball(np.array([0.1, 0.0]), 0.3))
        assert np.array_equal(hp.point, c.points[0])
        assert hp.support == ((0, 1.0),)

    def test_empty_ball_raises(self):
        c = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]]))
        with pytest.raises(EmptyIntersection):
            bary_select(c, Ball(np.array([0.5, 5.0]), 0.5))

    def test_boundary_point_excluded(self):
        # open ball: a member exactly at distance radius carries no weight
        c = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]]))
        hp = bary_select(c, Ball(np.array([0.0, 0.0]), 1.0))
        assert np.array_equal(hp.point, c.points[0])

    def test_rejects_bad_kappa(self):
        c = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]]))
        with pytest.raises(ValueError):
            bary_select(c, Ball(np.zeros(2), 2.0), kappa=0.0)

    @given(hnp.arrays(np.float64, (6, 2),
                      elements=st.floats(-1, 1, width=32)),
           st.floats(0.3, 2.0))
    @settings(max_examples=60, deadline=None)
    def test_output_in_hull_of_support(self, pts, radius):
        pts = pts + np.arange(12).reshape(6, 2) * 1e-3
        c = PointCloud(pts)
        ball = Ball(pts.mean(axis=0), radius)
        try:
            hp = bary_select(c, ball)
        except EmptyIntersection:
            return
        idx = [i for i, _ in hp.support]
        w = np.array([wi for _, wi in hp.support])
        assert w.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(w > 0)
        recon = w @ c.points[idx]
        assert np.allclose(recon, hp.point, atol=1e-12)
        lo = c.points[idx].min(axis=0) - 1e-12
        hi = c.points[idx].max(axis=0) + 1e-12
        assert np.all(hp.point >= lo) and np.all(hp.point <= hi)


class TestScheduleValidation:
    def test_bad_mode(self):
        with pytest.raises(ValueError):
            IterationSchedule(mode="newton")

    def test_bad_contraction(self):
        with pytest.raises(ValueError):
            IterationSchedule(contraction=1.0)
        with pytest.raises(ValueError):
            IterationSchedule(contraction=0.0)

    def test_bad_big_c(self):
        with pytest.raises(ValueError):
            IterationSchedule(mode="hilbert", big_c=0.9)


class TestIterateBanach:
    def test_converges_onto_segment(self):
        sched = IterationSchedule(mode="banach", contraction=0.6)
        out, trace = iterate_to_member(SEGMENT, [0.4, 0.3], 0.5, sched)
        assert trace.converged
        assert trace.mode == "banach"
        assert set_distance(out, SEGMENT) <= max(1e-12, 1e-8 * 0.5)
        assert trace.total_movement <= trace.certified_bound

    def test_radii_follow_schedule_and_cap_steps(self):
        sched = IterationSchedule(mode="banach", contraction=0.6)
        _, trace = iterate_to_member(SEGMENT, [0.4, 0.3], 0.5, sched)
        n = len(trace.radii)
        assert np.allclose(trace.radii, 0.5 * 0.6 ** np.arange(n), rtol=0,
                           atol=0)
        assert np.all(trace.step_norms <= trace.radii * (1 + 2e-6))

    def test_starved_ball_walks_to_set(self):
        # symmetric start between two isolated points: the barycentric step
        # cannot break the tie, the shrinking ball eventually isolates the
        # gap, and the capped walk must close it exactly
        c = PointCloud(np.array([[0.0, 0.0], [1.0, 0.0]]))
        sched = IterationSchedule(mode="banach", contraction=0.9)
        out, trace = iterate_to_member(c, [0.5, 0.0], 0.6, sched)
        assert trace.converged
        assert trace.starved >= 1
        assert any(np.array_equal(out, p) for p in c.points)
        assert np.all(trace.step_norms <= trace.radii * (1 + 2e-6))
        assert trace.total_movement <= trace.certified_bound

    def test_unreachable_set_raises(self):
        # total walk capacity 4/(1-0.5) = 8 < gap 10
        c = PointCloud(np.array([[0.0, 0.0], [20.0, 0.0]]))
        sched = IterationSchedule(mode="banach", contraction=0.5)
        with pytest.raises(EmptyIntersection):
            iterate_to_member(c, [10.0, 0.0], 4.0, sched)

    def test_unreachable_set_stop_mode(self):
        c = PointCloud(np.array([[0.0, 0.0], [20.0, 0.0]]))
        sched = IterationSchedule(mode="banach", contraction=0.5)
        out, trace = iterate_to_member(c, [10.0, 0.0], 4.0, sched,
                                       on_starve="stop")
        assert not trace.converged
        assert trace.starved >= 1
        assert trace.total_movement <= trace.certified_bound

    def test_start_on_set_is_fixed(self):
        p = SEGMENT.points[3]
        sched = IterationSchedule(mode="banach", contraction=0.5)
        out, trace = iterate_to_member(SEGMENT, p, 0.5, sched)
        assert np.array_equal(out, p)
        assert trace.total_movement == 0.0

    @given(st.floats(-0.2, 1.2), st.floats(0.05, 0.35),
           st.floats(0.55, 0.9))
    @settings(max_examples=40, deadline=None)
    def test_movement_certificate(self, x0, y0, beta):
        sched = IterationSchedule(mode="banach", contraction=beta)
        r0 = 2.0 * y0
        out, trace = iterate_to_member(SEGMENT, [x0, y0], r0, sched,
                                       on_starve="stop")
        assert trace.total_movement <= trace.certified_bound
        if trace.converged:
            assert set_distance(out, SEGMENT) <= max(1e-12, 1e-8 * r0)


class TestIterateHilbert:
    def test_converges_with_displacement_budget(self):
        sched = IterationSchedule(mode="hilbert", contraction=0.5)
        out, trace = iterate_to_member(SEGMENT, [0.4, 0.2], 0.5, sched)
        assert trace.converged
        assert trace.mode == "hilbert"
        assert set_distance(out, SEGMENT) <= max(1e-12, 1e-8 * 0.5)
        assert trace.total_movement <= trace.certified_bound


class TestImproveEpsilonSelection:
    def _near_selection(self, eps):
        rng = np.random.default_rng(7)
        params = [float(t) for t in np.linspace(0.0, 1.0, 5)]

        def f_eps(t):
            base, _ = nearest_on_set(np.array([t, 0.0]), SEGMENT)
            jitter = rng.uniform(-1.0, 1.0, size=2)
            jitter *= 0.8 * eps / np.linalg.norm(jitter)
            return base + jitter

        return params, f_eps

    def test_repair_bounds_movement(self):
        eps = 0.05
        params, f_eps = self._near_selection(eps)
        F = constant_map(SEGMENT, params)
        sched = IterationSchedule(mode="banach", contraction=0.5)
        sel = improve_epsilon_selection(F, f_eps, eps, alpha=0.3,
                                        schedule=sched)
        assert sel.max_residual <= 1e-8
        assert sel.max_movement <= sel.certified_bound
        assert sel.certified_bound <= eps / 0.7 + 1e-6

    def test_grid_lookup(self):
        eps = 0.05
        params, f_eps = self._near_selection(eps)
        F = constant_map(SEGMENT, params)
        sched = IterationSchedule(mode="banach", contraction=0.5)
        sel = improve_epsilon_selection(F, f_eps, eps, alpha=0.3,
                                        schedule=sched)
        v = sel(params[2])
        assert np.array_equal(v, sel.values[2])
        with pytest.raises(KeyError):
            sel(0.123456789)

    def test_rejects_non_eps_selection(self):
        params = [0.0, 1.0]
        F = constant_map(SEGMENT, params)
        sched = IterationSchedule(mode="banach", contraction=0.5)
        with pytest.raises(PreconditionFailure):
            improve_epsilon_selection(F, lambda t: np.array([t, 5.0]),
                                      0.01, alpha=0.3, schedule=sched)

    def test_hilbert_needs_gamma_above_alpha(self):
        params = [0.0, 1.0]
        F = constant_map(SEGMENT, params)
        sched = IterationSchedule(mode="hilbert", contraction=0.4)
        f = lambda t: nearest_on_set(np.array([t, 0.0]), SEGMENT)[0]
        with pytest.raises(ContractionNotCertified):
            improve_epsilon_selection(F, f, 0.01, alpha=0.6, schedule=sched)
