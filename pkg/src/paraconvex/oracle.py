"""Independent brute-force check of the nonconvexity profile.

Maximizes the ball-relative gap by direct enumeration: a dense grid of ball
centers, members found by raw pairwise distances, and hull points taken
from capped pairwise midpoints plus seeded simplex draws.  Only the
set-distance definition is shared with the profile estimator; none of its
search or sampling machinery is.
"""

from __future__ import annotations

import numpy as np

from .geometry import PointCloud


def _distances_to_set(qs, cloud: PointCloud) -> np.ndarray:
    if cloud.support is not None:
        return np.asarray([cloud.support.distance(q) for q in qs])
    diff = qs[:, None, :] - cloud.points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min(axis=1)


def brute_force_alpha_oracle(cloud: PointCloud, radius: float,
                             center_grid: int = 16, hull_draws: int = 64,
                             seed: int = 0) -> float:
    """Largest hull-to-set gap over balls of one radius, by enumeration.

    Returns sup over sampled balls D(c, radius) with members of
    sup over sampled q in conv(members) of dist(q, set) / radius.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")
    pts = cloud.points
    dim = cloud.dim
    lo = pts.min(axis=0) - radius
    hi = pts.max(axis=0) + radius
    side = center_grid if dim == 2 else max(4, center_grid // 2)
    axes = [np.linspace(lo[k], hi[k], side) for k in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    centers = np.vstack([np.stack([m.ravel() for m in mesh], axis=1), pts])

    rng = np.random.default_rng(seed)
    best = 0.0
    for c in centers:
        d = np.linalg.norm(pts - c[None, :], axis=1)
        members = pts[d < radius]
        m = len(members)
        if m < 2:
            continue
        if m > 30:
            sub = members[np.round(np.linspace(0, m - 1, 30)).astype(int)]
        else:
            sub = members
        qs = [0.5 * (sub[i] + sub[j])
              for i in range(len(sub)) for j in range(i + 1, len(sub))]
        k = min(m, 6)
        for _ in range(hull_draws):
            idx = rng.choice(m, size=k, replace=False)
            w = rng.dirichlet(np.ones(k))
            qs.append(w @ members[idx])
        gaps = _distances_to_set(np.asarray(qs), cloud)
        ratio = float(gaps.max()) / radius
        if ratio > best:
            best = ratio
    return best
