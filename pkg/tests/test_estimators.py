import numpy as np
import pytest

from paraconvex import (
    ContractionNotCertified,
    NonconvexityEstimator,
    UniformRetraction,
    generate_scene,
)

SEGMENT = generate_scene("segment", density=80)


class TestParams:
    def test_get_set_round_trip(self):
        est = NonconvexityEstimator(seed=3, ball_centers=20)
        params = est.get_params()
        assert params["seed"] == 3
        assert params["ball_centers"] == 20
        est.set_params(seed=7)
        assert est.get_params()["seed"] == 7

    def test_rejects_unknown_param(self):
        with pytest.raises(ValueError):
            NonconvexityEstimator().set_params(bandwidth=2.0)

    def test_retraction_params(self):
        ur = UniformRetraction(beta=0.6)
        assert ur.get_params()["beta"] == 0.6
        ur.set_params(beta=0.7, margin=0.01)
        assert ur.beta == 0.7


class TestNonconvexityEstimator:
    def fitted(self):
        return NonconvexityEstimator(radii=[0.3, 0.6, 1.0],
                                     ball_centers=32,
                                     hull_samples=24).fit(SEGMENT)

    def test_fit_exposes_profile(self):
        est = self.fitted()
        assert est.alpha_max_ <= 1e-9
        assert list(est.radii_) == [0.3, 0.6, 1.0]

    def test_transform_shape_and_values(self):
        est = self.fitted()
        out = est.transform([[0.5, 0.25], [0.1, -0.4]])
        assert out.shape == (2, 1)
        assert out[0, 0] == pytest.approx(0.25, abs=1e-9)
        pred = est.predict([[0.5, 0.25]])
        assert pred.shape == (1,)

    def test_accepts_point_cloud_input(self):
        est = NonconvexityEstimator(radii=[0.5], ball_centers=16,
                                    hull_samples=12).fit(SEGMENT)
        assert est.cloud_ is SEGMENT

    def test_check_verdict(self):
        est = self.fitted()
        assert est.check(0.05).holds

    def test_unfitted_raises(self):
        with pytest.raises(RuntimeError):
            NonconvexityEstimator().transform([[0.0, 0.0]])


class TestUniformRetraction:
    def test_default_beta_is_alpha_plus_margin(self):
        ur = UniformRetraction(ball_centers=32, hull_samples=24)
        ur.fit(SEGMENT)
        assert ur.beta_ == pytest.approx(ur.alpha_hat_ + ur.margin, abs=0)
        assert ur.certified_C_ == pytest.approx(2.0 / (1.0 - ur.beta_),
                                                abs=1e-12)

    def test_predict_lands_on_set(self):
        ur = UniformRetraction(beta=0.5, ball_centers=32,
                               hull_samples=24).fit(SEGMENT)
        out = ur.predict([[0.5, 0.3], [0.2, -0.2]])
        assert out.shape == (2, 2)
        assert np.all(np.abs(out[:, 1]) <= 1e-6)
        assert np.array_equal(ur.transform(SEGMENT.points[:4]),
                              SEGMENT.points[:4])

    def test_uncertifiable_fit_raises(self):
        pts = generate_scene("two_points").points
        with pytest.raises(ContractionNotCertified):
            UniformRetraction(margin=0.2).fit(pts)

    def test_unfitted_raises(self):
        with pytest.raises(RuntimeError):
            UniformRetraction().predict([[0.0, 0.0]])
