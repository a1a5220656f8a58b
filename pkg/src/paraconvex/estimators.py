"""Estimator-style wrappers: fit on a point set, then transform or predict.

Both estimators follow the usual fit/get_params/set_params calling pattern;
fitted state lives in trailing-underscore attributes.
"""

from __future__ import annotations

import inspect

import numpy as np

from .config import BETA_MARGIN, BOX_INFLATION, KAPPA
from .errors import ContractionNotCertified
from .geometry import PointCloud, set_distance
from .measures import SamplingPlan, check_paraconvexity, nonconvexity_function
from .retraction import build_retraction, measured_alpha
from .validation import as_points


class ParamsMixin:
    """get_params/set_params over the constructor signature."""

    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [p.name for p in sig.parameters.values()
                if p.name != "self" and p.kind == p.POSITIONAL_OR_KEYWORD]

    def get_params(self, deep: bool = True) -> dict:
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(
                    f"unknown parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def _require_fitted(self, attr: str):
        if not hasattr(self, attr):
            raise RuntimeError(
                f"{type(self).__name__} is not fitted; call fit first")


def _as_cloud(X, label: str = "data") -> PointCloud:
    if isinstance(X, PointCloud):
        return X
    return PointCloud(as_points(np.asarray(X, dtype=float)), label=label)


class NonconvexityEstimator(ParamsMixin):
    """Measures how far a point set is from convex, radius by radius.

    Parameters
    ----------
    radii : sequence of float, optional
        Ball radii to profile; defaults to a geometric grid spanning the
        set's diameter.
    ball_centers, hull_samples : int
        Sampling effort per radius.
    seed : int
        Seed for the sampling plan; fixed seed means identical profiles.
    """

    def __init__(self, radii=None, ball_centers: int = 128,
                 hull_samples: int = 96, seed: int = 0):
        self.radii = radii
        self.ball_centers = ball_centers
        self.hull_samples = hull_samples
        self.seed = seed

    def fit(self, X, y=None):
        self.cloud_ = _as_cloud(X)
        grid = tuple(float(r) for r in self.radii) if self.radii is not None \
            else None
        self.plan_ = SamplingPlan(radius_grid=grid,
                                  ball_center_count=self.ball_centers,
                                  hull_sample_count=self.hull_samples,
                                  seed=self.seed)
        self.profile_ = nonconvexity_function(self.cloud_, self.plan_)
        self.alpha_max_ = self.profile_.alpha_max
        self.radii_ = self.profile_.radii
        return self

    def transform(self, X) -> np.ndarray:
        """Column of distances from each query to the fitted set."""
        self._require_fitted("cloud_")
        pts = as_points(X, dim=self.cloud_.dim)
        return np.asarray([[set_distance(p, self.cloud_)] for p in pts])

    def predict(self, X) -> np.ndarray:
        return self.transform(X).ravel()

    def check(self, alpha: float, strong: bool = False):
        """Verdict on whether the fitted set meets nonconvexity level alpha."""
        self._require_fitted("cloud_")
        return check_paraconvexity(self.cloud_, alpha, strong=strong,
                                   plan=self.plan_)


class UniformRetraction(ParamsMixin):
    """Retraction onto the fitted point set with a uniform movement bound.

    With ``beta=None`` the contraction rate is set to the measured
    nonconvexity plus ``margin``; fitting fails when no rate below one is
    certifiable.
    """

    def __init__(self, beta: float | None = None, margin: float = BETA_MARGIN,
                 kappa: float = KAPPA, box_inflation: float = BOX_INFLATION,
                 ball_centers: int = 128, hull_samples: int = 96,
                 seed: int = 0):
        self.beta = beta
        self.margin = margin
        self.kappa = kappa
        self.box_inflation = box_inflation
        self.ball_centers = ball_centers
        self.hull_samples = hull_samples
        self.seed = seed

    def fit(self, X, y=None):
        self.cloud_ = _as_cloud(X)
        plan = SamplingPlan(ball_center_count=self.ball_centers,
                            hull_sample_count=self.hull_samples,
                            seed=self.seed)
        self.alpha_hat_ = measured_alpha(self.cloud_, plan)
        beta = self.beta if self.beta is not None \
            else self.alpha_hat_ + self.margin
        if not beta < 1.0:
            raise ContractionNotCertified(
                f"measured nonconvexity {self.alpha_hat_:.4g} plus margin "
                f"{self.margin:.4g} leaves no contraction rate below one")
        self.beta_ = float(beta)
        self.operator_ = build_retraction(
            self.cloud_, self.beta_, box_inflation=self.box_inflation,
            kappa=self.kappa, alpha_hat=self.alpha_hat_)
        self.certified_C_ = self.operator_.certified_C
        return self

    def predict(self, X) -> np.ndarray:
        """Retract each query onto the fitted set."""
        self._require_fitted("operator_")
        return self.operator_.table(as_points(X, dim=self.cloud_.dim))

    def transform(self, X) -> np.ndarray:
        return self.predict(X)
