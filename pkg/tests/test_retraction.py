import numpy as np
import pytest

from paraconvex import (
    ContractionNotCertified,
    PointCloud,
    PreconditionFailure,
    RetractionOperator,
    SamplingPlan,
    build_retraction,
    eval_retraction,
    generate_scene,
    measured_alpha,
    retraction_diagnostics,
    set_distance,
)

SEGMENT = generate_scene("segment")
PLAN = SamplingPlan(seed=0)


def segment_retraction(beta=0.5):
    return build_retraction(SEGMENT, beta, plan=PLAN)


class TestBuildRetraction:
    def test_certified_constant(self):
        R = segment_retraction(0.5)
        assert R.certified_C == 4.0
        R = segment_retraction(0.75)
        assert R.certified_C == pytest.approx(8.0, abs=1e-12)

    def test_rejects_beta_outside_unit(self):
        with pytest.raises(ValueError):
            build_retraction(SEGMENT, 1.0)
        with pytest.raises(ValueError):
            build_retraction(SEGMENT, 0.0)

    def test_rejects_uncertified_contraction(self):
        c = generate_scene("two_points")
        a = measured_alpha(c, PLAN)
        assert a > 0.5
        with pytest.raises(ContractionNotCertified):
            build_retraction(c, 0.5, plan=PLAN)

    def test_caller_supplied_alpha_skips_measurement(self):
        c = generate_scene("two_points")
        with pytest.raises(ContractionNotCertified):
            build_retraction(c, 0.5, alpha_hat=0.9)

    def test_singleton_target_is_constant(self):
        c = PointCloud(np.array([[2.0, 3.0]]))
        R = build_retraction(c, 0.5)
        out = R([2.4, 3.3])
        assert np.array_equal(out, c.points[0])


class TestEvaluation:
    def test_identity_on_target(self):
        R = segment_retraction()
        out = R.table(SEGMENT.points)
        assert np.array_equal(out, SEGMENT.points)

    def test_movement_certificate(self):
        R = segment_retraction()
        for q in ([0.5, 0.2], [0.1, -0.3], [0.9, 0.3]):
            q = np.asarray(q, dtype=float)
            out, trace = R.evaluate_with_trace(q)
            d = set_distance(q, SEGMENT)
            assert np.linalg.norm(out - q) <= R.certified_C * d * (1 + 1e-3)
            assert set_distance(out, SEGMENT) <= 1e-6
            assert trace.converged

    def test_outside_box_raises(self):
        R = segment_retraction()
        lo, hi = R.working_box
        with pytest.raises(PreconditionFailure):
            R(hi + 1.0)

    def test_memoized_evaluations_identical(self):
        R = segment_retraction()
        q = np.array([0.37, 0.21])
        a = R(q)
        b = eval_retraction(R, q)
        assert np.array_equal(a, b)

    def test_rebuild_reproduces_values(self):
        q = np.array([0.42, -0.17])
        a = segment_retraction()(q)
        b = segment_retraction()(q)
        assert np.array_equal(a, b)

    def test_preload_seeds_memo(self):
        R = segment_retraction()
        q = np.array([0.5, 0.25])
        v = np.array([0.5, 0.0])
        R.preload([q], [v])
        assert np.array_equal(R(q), v)


class TestDiagnostics:
    def test_uniformity_table(self):
        R = segment_retraction()
        rep = retraction_diagnostics(R, [0.05, 0.2, 0.8], sample_count=60,
                                     seed=1)
        deltas = [d for _, d in rep.table]
        assert all(d > 0 for d in deltas)
        assert deltas == sorted(deltas)
        assert rep.lipschitz_ok
        assert rep.lipschitz_at_P_ratio <= rep.lipschitz_bound

    def test_rejects_nonpositive_eps(self):
        R = segment_retraction()
        with pytest.raises(ValueError):
            retraction_diagnostics(R, [0.1, 0.0])
