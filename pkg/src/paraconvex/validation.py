"""Input validation helpers.

All public entry points funnel raw user input through these functions so the
rest of the package can assume well-formed float64 arrays.
"""

from __future__ import annotations

import numpy as np

from .config import TAU_W
from .errors import DimensionMismatch

SUPPORTED_DIMS = (2, 3)


def as_point(x, dim=None) -> np.ndarray:
    """Coerce ``x`` to a finite float64 vector of supported dimension."""
    p = np.asarray(x, dtype=float)
    if p.ndim != 1:
        raise ValueError(f"expected a single point, got array of shape {p.shape}")
    if p.shape[0] not in SUPPORTED_DIMS:
        raise DimensionMismatch(f"points must live in R^2 or R^3, got d={p.shape[0]}")
    if dim is not None and p.shape[0] != dim:
        raise DimensionMismatch(f"expected d={dim}, got d={p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite coordinates")
    return p


def as_points(X, dim=None, min_points=1) -> np.ndarray:
    """Coerce ``X`` to a finite float64 array of shape (n, d), d in {2, 3}."""
    pts = np.asarray(X, dtype=float)
    if pts.ndim == 1 and pts.shape[0] in SUPPORTED_DIMS:
        pts = pts[None, :]
    if pts.ndim != 2:
        raise ValueError(f"expected an (n, d) array of points, got shape {pts.shape}")
    if pts.shape[1] not in SUPPORTED_DIMS:
        raise DimensionMismatch(f"points must live in R^2 or R^3, got d={pts.shape[1]}")
    if dim is not None and pts.shape[1] != dim:
        raise DimensionMismatch(f"expected d={dim}, got d={pts.shape[1]}")
    if pts.shape[0] < min_points:
        raise ValueError(f"need at least {min_points} point(s), got {pts.shape[0]}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite coordinates")
    return np.ascontiguousarray(pts)


def as_weights(w, n=None, tol=TAU_W) -> np.ndarray:
    """Validate convex-combination weights: nonnegative, summing to one."""
    weights = np.asarray(w, dtype=float)
    if weights.ndim != 1:
        raise ValueError("weights must be a flat array")
    if n is not None and weights.shape[0] != n:
        raise ValueError(f"expected {n} weights, got {weights.shape[0]}")
    if not np.all(np.isfinite(weights)):
        raise ValueError("weights contain non-finite values")
    if np.any(weights < -tol):
        raise ValueError("weights must be nonnegative")
    total = float(weights.sum())
    if abs(total - 1.0) > max(tol, 1e-9):
        raise ValueError(f"weights must sum to 1, got {total}")
    weights = np.clip(weights, 0.0, None)
    return weights / weights.sum()


def check_radius(r) -> float:
    r = float(r)
    if not np.isfinite(r) or r <= 0.0:
        raise ValueError(f"radius must be positive and finite, got {r}")
    return r


def check_unit_interval(x, name="value", open_right=True) -> float:
    x = float(x)
    lo_ok = x >= 0.0
    hi_ok = x < 1.0 if open_right else x <= 1.0
    if not (np.isfinite(x) and lo_ok and hi_ok):
        bound = "[0, 1)" if open_right else "[0, 1]"
        raise ValueError(f"{name} must lie in {bound}, got {x}")
    return x
