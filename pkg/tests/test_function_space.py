import numpy as np
import pytest

from paraconvex import (
    FunctionOnBox,
    PointCloud,
    PreconditionFailure,
    SamplingPlan,
    as_function,
    build_retraction,
    build_retraction_family,
    combine_retractions,
    continuity_modulus,
    estimate_space_paraconvexity,
    family_probe_grid,
    generate_scene,
    make_family,
    make_probe_grid,
    reproject_to_retraction,
    rigid_motion,
    set_distance,
    sigma_convex_combination,
    sup_distance,
)

SEGMENT = generate_scene("segment")
PLAN = SamplingPlan(seed=0)


def shifted_segment(dy):
    return SEGMENT.transformed(rigid_motion(translation=(0.0, dy)),
                               label=f"segment+{dy:g}")


class TestProbeGrid:
    def test_grid_contains_cloud(self):
        probes = make_probe_grid(SEGMENT, density=6)
        assert probes.size == 36 + SEGMENT.size
        for p in SEGMENT.points[:5]:
            assert np.any(np.all(probes.points == p, axis=1))

    def test_extra_points_appended(self):
        extra = np.array([[4.0, 4.0]])
        probes = make_probe_grid(SEGMENT, density=4, extra_points=extra)
        assert np.any(np.all(probes.points == extra[0], axis=1))

    def test_rejects_tiny_density(self):
        with pytest.raises(ValueError):
            make_probe_grid(SEGMENT, density=1)


class TestFunctionView:
    def test_view_is_cached(self):
        R = build_retraction(SEGMENT, 0.5, plan=PLAN)
        assert as_function(R) is as_function(R)

    def test_rejects_other_types(self):
        with pytest.raises(TypeError):
            as_function(lambda x: x)

    def test_sup_distance_to_self_is_zero(self):
        R = build_retraction(SEGMENT, 0.5, plan=PLAN)
        probes = make_probe_grid(SEGMENT, density=5)
        assert sup_distance(R, R, probes) == 0.0


class TestCombine:
    def build_pair(self):
        R1 = build_retraction(SEGMENT, 0.5, plan=PLAN)
        R2 = build_retraction(SEGMENT, 0.6, plan=PLAN)
        return R1, R2

    def test_needs_operators(self):
        with pytest.raises(ValueError):
            combine_retractions([], [])

    def test_rejects_mixed_targets(self):
        R1 = build_retraction(SEGMENT, 0.5, plan=PLAN)
        other = PointCloud(np.array([[0.0, 0.0], [0.0, 1.0]]))
        R3 = build_retraction(other, 0.5, alpha_hat=0.0)
        with pytest.raises(PreconditionFailure):
            combine_retractions([R1, R3], [0.5, 0.5])

    def test_agrees_with_components_on_target(self):
        R1, R2 = self.build_pair()
        Q = combine_retractions([R1, R2], [0.3, 0.7])
        out = Q.table(SEGMENT.points[:10])
        assert np.allclose(out, SEGMENT.points[:10], atol=1e-12)

    def test_radius_vanishes_on_target(self):
        R1, R2 = self.build_pair()
        Q = combine_retractions([R1, R2], [0.3, 0.7])
        assert Q.radius_fn(SEGMENT.points[0]) <= 1e-12
        assert Q.radius_fn(np.array([0.5, 0.3])) >= 0.0

    def test_value_in_hull_of_components(self):
        R1, R2 = self.build_pair()
        Q = combine_retractions([R1, R2], [0.3, 0.7])
        x = np.array([0.3, 0.3])
        v1, v2 = R1(x), R2(x)
        assert np.allclose(Q(x), 0.3 * v1 + 0.7 * v2, atol=1e-12)


class TestReproject:
    def test_requires_radius_information(self):
        R = build_retraction(SEGMENT, 0.5, plan=PLAN)
        with pytest.raises(PreconditionFailure):
            reproject_to_retraction(as_function(R), SEGMENT, 0.5)

    def test_rejects_bad_beta(self):
        R1 = build_retraction(SEGMENT, 0.5, plan=PLAN)
        Q = combine_retractions([R1], [1.0])
        with pytest.raises(ValueError):
            reproject_to_retraction(Q, SEGMENT, 1.0)

    def test_certified_sup_bound(self):
        R1 = build_retraction(SEGMENT, 0.5, plan=PLAN)
        R2 = build_retraction(SEGMENT, 0.7, plan=PLAN)
        Q = combine_retractions([R1, R2], [0.5, 0.5])
        probes = make_probe_grid(SEGMENT, density=6)
        R, bound = reproject_to_retraction(Q, SEGMENT, 0.6, probes=probes)
        assert np.array_equal(R.table(SEGMENT.points[:8]),
                              SEGMENT.points[:8])
        assert sup_distance(R, Q, probes) <= bound + 1e-12


class TestSigmaCombination:
    def test_matches_euclidean_average_on_convex_target(self):
        R = build_retraction(SEGMENT, 0.5, plan=PLAN)
        ys = SEGMENT.points[[3, 10, 40]]
        w = np.array([0.2, 0.3, 0.5])
        out = sigma_convex_combination(R, ys, w)
        wn = w / w.sum()
        assert np.allclose(out, wn @ ys, atol=1e-12)
        assert set_distance(out, SEGMENT) <= 1e-9

    def test_rejects_offset_inputs(self):
        R = build_retraction(SEGMENT, 0.5, plan=PLAN)
        ys = np.array([[0.2, 0.0], [0.4, 3.0]])
        with pytest.raises(PreconditionFailure):
            sigma_convex_combination(R, ys, [0.5, 0.5])


class TestSpaceEstimate:
    def test_convex_scene_is_flat(self):
        probes = make_probe_grid(SEGMENT, density=8)
        est = estimate_space_paraconvexity(SEGMENT, ensemble=3,
                                           probes=probes, seed=0,
                                           alpha_hat=0.0, plan=PLAN)
        assert est <= 1e-6


class TestFamilies:
    def make_shifts(self, shifts):
        return make_family(shifts, [shifted_segment(s) for s in shifts],
                           label="lifted segment")

    def test_family_validation(self):
        with pytest.raises(ValueError):
            make_family([0.0, 0.0], [SEGMENT, SEGMENT])
        with pytest.raises(TypeError):
            make_family([0.0], [np.zeros((3, 2))])
        with pytest.raises(ValueError):
            self_pts = PointCloud(np.zeros((2, 3)) + np.arange(6).reshape(2, 3))
            make_family([0.0, 1.0], [SEGMENT, self_pts])

    def test_hausdorff_steps_for_translation(self):
        fam = self.make_shifts([0.0, 0.05, 0.1])
        assert fam.hausdorff_steps == pytest.approx((0.05, 0.05), abs=1e-12)

    def test_family_operators_track_members(self):
        fam = self.make_shifts([0.0, 0.04, 0.08])
        probes = family_probe_grid(fam, density=6)
        ops = build_retraction_family(fam, 0.5, probes=probes, plan=PLAN)
        assert len(ops) == 3
        # the first operator is a direct build, so it fixes its own target
        base = ops[0].table(fam.sets[0].points[:6])
        assert np.allclose(base, fam.sets[0].points[:6], atol=1e-9)
        # successors are repairs of the previous operator: they must land on
        # their member, though not pointwise at the query
        for op, cloud in zip(ops[1:], fam.sets[1:]):
            out = op.table(cloud.points[:6])
            assert max(set_distance(v, cloud) for v in out) <= 1e-6
        rows = continuity_modulus(fam, ops, probes)
        assert len(rows) == 2
        assert all(r.within_modulus for r in rows)
        assert all(r.ratio <= 1.1 for r in rows)
