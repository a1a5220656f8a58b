import json
import math

import numpy as np
import pytest

from paraconvex import (
    SamplingPlan,
    Scene,
    brute_force_alpha_oracle,
    generate_scene,
    load_scene,
    nonconvexity_function,
    parse_sweep,
    scene_family,
    scene_from_dict,
)


class TestGenerators:
    def test_two_points_defaults(self):
        c = generate_scene("two_points")
        assert np.array_equal(c.points, np.array([[-1.0, 0.0], [1.0, 0.0]]))

    def test_semicircle_on_unit_circle(self):
        c = generate_scene("semicircle")
        assert c.size == 400
        radii = np.linalg.norm(c.points, axis=1)
        assert np.allclose(radii, 1.0, atol=1e-12)
        angles = np.arctan2(c.points[:, 1], c.points[:, 0])
        assert angles.min() >= -1e-12
        assert angles.max() <= math.pi + 1e-12

    def test_sin_curve_arc_spacing(self):
        c = generate_scene("sin_reciprocal")
        x = c.points[:, 0]
        assert np.allclose(c.points[:, 1], np.sin(1.0 / x), atol=1e-12)
        gaps = np.linalg.norm(np.diff(c.points, axis=0), axis=1)
        assert gaps.max() <= 2.0 * np.median(gaps)

    def test_polygon_density_floor(self):
        c = generate_scene('{"generator": "convex_polygon", '
                           '"params": {"sides": 6, "radius": 1.0}, '
                           '"density": 500}')
        assert c.size >= 500
        assert np.all(np.linalg.norm(c.points, axis=1) <= 1.0 + 1e-9)

    def test_density_override(self):
        assert generate_scene("segment", density=37).size == 37

    def test_generation_is_reproducible(self):
        a = generate_scene("spiral")
        b = generate_scene("spiral")
        assert np.array_equal(a.points, b.points)

    def test_disk_sample_reproducible(self):
        a = generate_scene("disk_sample", density=120)
        b = generate_scene("disk_sample", density=120)
        assert np.array_equal(a.points, b.points)


class TestSceneLoading:
    def test_builtin_name(self):
        s = load_scene("segment")
        assert s.generator == "segment"

    def test_inline_json(self):
        s = load_scene('{"generator": "circle_arc", '
                       '"params": {"angle": 1.0}, "density": 64}')
        assert s.generator == "circle_arc"
        assert generate_scene(s).size == 64

    def test_json_file(self, tmp_path):
        path = tmp_path / "scene.json"
        path.write_text(json.dumps({
            "name": "tilted",
            "generator": "segment",
            "density": 40,
            "transform": {"rotation": 0.5},
        }))
        c = generate_scene(load_scene(str(path)))
        assert c.size == 40
        assert c.label == "tilted"

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError):
            load_scene("klein_bottle")

    def test_custom_points_needs_description(self):
        with pytest.raises(ValueError):
            load_scene("custom_points")
        c = generate_scene('{"generator": "custom_points", '
                           '"params": {"points": [[0, 0], [1, 2]]}}')
        assert c.size == 2

    def test_round_trip(self):
        s = scene_from_dict({"generator": "semicircle", "density": 50,
                             "name": "demo"})
        assert scene_from_dict(s.to_dict()) == s


class TestTransforms:
    def test_rotation_preserves_distances(self):
        base = generate_scene("semicircle", density=80)
        s = Scene(name="turned", generator="semicircle", density=80,
                  transform={"rotation": 1.2})
        turned = generate_scene(s)
        assert turned.size == base.size
        d0 = np.linalg.norm(base.points[0] - base.points[-1])
        d1 = np.linalg.norm(turned.points[0] - turned.points[-1])
        assert d1 == pytest.approx(d0, abs=1e-12)

    def test_bad_scale_rejected(self):
        s = Scene(name="bad", generator="segment",
                  transform={"scale": -1.0})
        with pytest.raises(ValueError):
            generate_scene(s)


class TestSweeps:
    def test_parse_colon_form(self):
        sw = parse_sweep("rotation:0:1.5:25")
        assert sw == {"kind": "rotation", "start": 0.0, "stop": 1.5,
                      "steps": 25}

    def test_parse_json_form(self):
        sw = parse_sweep('{"kind": "rotation", "steps": 4}')
        assert sw["steps"] == 4

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_sweep("rotation:0:1")

    def test_scene_family_rotation(self):
        fam = scene_family("semicircle",
                           {"kind": "rotation", "start": 0.0,
                            "stop": 0.6, "steps": 3},
                           density=60)
        assert len(fam) == 3
        assert all(s.size == 60 for s in fam.sets)
        assert all(step > 0 for step in fam.hausdorff_steps)


class TestOracle:
    def test_two_points_exact_values(self):
        c = generate_scene("two_points")
        for r in (1.05, 1.1):
            val = brute_force_alpha_oracle(c, r, center_grid=17,
                                           hull_draws=8, seed=0)
            assert val == pytest.approx(1.0 / r, abs=1e-12)

    def test_rejects_bad_radius(self):
        c = generate_scene("two_points")
        with pytest.raises(ValueError):
            brute_force_alpha_oracle(c, 0.0)

    def test_agrees_with_profile_on_flat_scene(self):
        c = generate_scene("segment", density=60)
        profile = nonconvexity_function(c, SamplingPlan(seed=0))
        oracle = brute_force_alpha_oracle(c, 0.5, center_grid=9,
                                          hull_draws=16, seed=0)
        assert abs(oracle - profile.alpha_max) <= 0.05
