"""Euclidean kernels: point clouds, balls, hulls, and enclosing balls.

A finite point cloud stands in for a closed bounded subset of R^d, d in
{2, 3}.  When the generator knows the underlying geometry it attaches a
*support* model (polyline or convex region) so distances to the set can be
measured exactly instead of through the sample; a bare cloud falls back to
point-set distance.  All combinatorial operations (membership in a ball,
convex hulls, barycentric selections) act on the sampled points themselves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, cKDTree

from .config import TAU_DUP, TAU_GEO, TAU_PROJ, TAU_W
from .errors import ConvergenceFailure, DimensionMismatch
from .validation import as_point, as_points, as_weights, check_radius


# ---------------------------------------------------------------------------
# support models for the underlying set
# ---------------------------------------------------------------------------

def _segment_distances(q, seg_a, seg_b, t_lo=None, t_hi=None):
    """Distances from point ``q`` to segments a+t(b-a), t clipped to ranges."""
    d = seg_b - seg_a
    denom = np.einsum("ij,ij->i", d, d)
    denom = np.where(denom <= 0.0, 1.0, denom)
    t = np.einsum("ij,ij->i", q[None, :] - seg_a, d) / denom
    lo = np.zeros(len(seg_a)) if t_lo is None else t_lo
    hi = np.ones(len(seg_a)) if t_hi is None else t_hi
    t = np.clip(t, lo, hi)
    foot = seg_a + t[:, None] * d
    return np.linalg.norm(foot - q[None, :], axis=1)


def _segment_feet(q, seg_a, seg_b):
    """Closest point on each segment to ``q`` and its distance."""
    d = seg_b - seg_a
    denom = np.einsum("ij,ij->i", d, d)
    denom = np.where(denom <= 0.0, 1.0, denom)
    t = np.einsum("ij,ij->i", q[None, :] - seg_a, d) / denom
    t = np.clip(t, 0.0, 1.0)
    foot = seg_a + t[:, None] * d
    return foot, np.linalg.norm(foot - q[None, :], axis=1)


class PolylineSupport:
    """Union of straight segments approximating a sampled curve exactly."""

    kind = "polyline"

    def __init__(self, segments):
        seg = np.asarray(segments, dtype=float)
        if seg.ndim != 3 or seg.shape[1] != 2:
            raise ValueError("segments must have shape (m, 2, d)")
        self.segments = np.ascontiguousarray(seg)
        self._a = self.segments[:, 0, :]
        self._b = self.segments[:, 1, :]
        self._mid = 0.5 * (self._a + self._b)
        self._half_len = 0.5 * np.linalg.norm(self._b - self._a, axis=1)
        self._tree = cKDTree(self._mid)
        self._max_half = float(self._half_len.max()) if len(seg) else 0.0

    def distance(self, q) -> float:
        q = np.asarray(q, dtype=float)
        # a segment within distance D of q has its midpoint within D + half_len
        d0, _ = self._tree.query(q)
        r = d0 + self._max_half + 1e-12
        idx = self._tree.query_ball_point(q, r)
        if not idx:
            idx = range(len(self._a))
        idx = np.asarray(sorted(idx), dtype=int)
        return float(_segment_distances(q, self._a[idx], self._b[idx]).min())

    def nearest_point(self, q):
        """Closest point of the polyline to ``q``, with its distance."""
        q = np.asarray(q, dtype=float)
        d0, _ = self._tree.query(q)
        r = d0 + self._max_half + 1e-12
        idx = self._tree.query_ball_point(q, r)
        if not idx:
            idx = range(len(self._a))
        idx = np.asarray(sorted(idx), dtype=int)
        foot, dist = _segment_feet(q, self._a[idx], self._b[idx])
        k = int(np.argmin(dist))
        return foot[k].copy(), float(dist[k])

    def distance_in_ball(self, q, center, radius) -> float:
        """Distance from ``q`` to the part of the polyline inside the open ball."""
        c = np.asarray(center, dtype=float)
        a, b = self._a, self._b
        d = b - a
        aa = np.einsum("ij,ij->i", d, d)
        ac = a - c[None, :]
        bb = np.einsum("ij,ij->i", ac, d)
        cc = np.einsum("ij,ij->i", ac, ac) - radius * radius
        safe = aa > 0.0
        disc = bb * bb - np.where(safe, aa, 1.0) * cc
        best = np.inf
        hit = safe & (disc > 0.0)
        if np.any(hit):
            sq = np.sqrt(disc[hit])
            t0 = np.clip((-bb[hit] - sq) / aa[hit], 0.0, 1.0)
            t1 = np.clip((-bb[hit] + sq) / aa[hit], 0.0, 1.0)
            ok = t1 > t0
            if np.any(ok):
                ia = np.flatnonzero(hit)[ok]
                dists = _segment_distances(
                    np.asarray(q, dtype=float), a[ia], b[ia], t0[ok], t1[ok]
                )
                best = float(dists.min())
        return best

    def transformed(self, fn):
        seg = self.segments.reshape(-1, self.segments.shape[2])
        return PolylineSupport(fn(seg).reshape(self.segments.shape))


class ConvexRegionSupport:
    """Filled convex region: the convex hull of the sampled points (2D)."""

    kind = "region"

    def __init__(self, points):
        pts = as_points(points, dim=2, min_points=3)
        hull = ConvexHull(pts)
        self.equations = hull.equations.copy()  # A x + b <= 0 inside
        verts = pts[hull.vertices]
        self.boundary = PolylineSupport(
            np.stack([verts, np.roll(verts, -1, axis=0)], axis=1)
        )
        self._vertices = verts

    def contains(self, q, tol=TAU_GEO) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(
            np.max(self.equations[:, :2] @ q + self.equations[:, 2]) <= tol
        )

    def distance(self, q) -> float:
        if self.contains(q):
            return 0.0
        return self.boundary.distance(q)

    def nearest_point(self, q):
        q = np.asarray(q, dtype=float)
        if self.contains(q):
            return q.copy(), 0.0
        return self.boundary.nearest_point(q)

    def distance_in_ball(self, q, center, radius) -> float:
        q = np.asarray(q, dtype=float)
        if self.contains(q) and np.linalg.norm(q - center) < radius:
            return 0.0
        return self.boundary.distance_in_ball(q, center, radius)

    def transformed(self, fn):
        return ConvexRegionSupport(fn(self._vertices))


# ---------------------------------------------------------------------------
# core data types
# ---------------------------------------------------------------------------

class PointCloud:
    """Finite point set in R^d with an optional exact support model.

    Parameters
    ----------
    points : array-like of shape (n, d), d in {2, 3}
        Distinct points (no duplicates within ``TAU_DUP``).
    label : str
        Human-readable name carried into reports.
    support : PolylineSupport or ConvexRegionSupport, optional
        Exact model of the underlying set the cloud samples.
    """

    def __init__(self, points, label="cloud", support=None):
        self.points = as_points(points)
        self.label = str(label)
        self.support = support
        tree = cKDTree(self.points)
        if len(self.points) > 1 and tree.query_pairs(TAU_DUP):
            raise ValueError("point cloud contains duplicate points")
        self._tree = tree
        self._diameter = None

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def tree(self) -> cKDTree:
        return self._tree

    def diameter(self) -> float:
        if self._diameter is None:
            pts = self.points
            if len(pts) == 1:
                self._diameter = 0.0
            else:
                verts = pts
                if len(pts) > self.dim + 1:
                    try:
                        verts = pts[ConvexHull(pts).vertices]
                    except Exception:
                        verts = pts
                diff = verts[:, None, :] - verts[None, :, :]
                self._diameter = float(
                    np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).max())
                )
        return self._diameter

    def bounding_box(self):
        return self.points.min(axis=0), self.points.max(axis=0)

    def transformed(self, fn, label=None):
        support = self.support.transformed(fn) if self.support is not None else None
        return PointCloud(fn(self.points), label or self.label, support)

    def __repr__(self):
        sup = self.support.kind if self.support is not None else "points"
        return f"PointCloud({self.label!r}, n={self.size}, d={self.dim}, support={sup})"


@dataclass(frozen=True)
class Ball:
    """Open ball D(center, radius)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "radius", check_radius(self.radius))


@dataclass(frozen=True)
class HullPoint:
    """Point of a convex hull with its barycentric certificate.

    ``support`` pairs indices (into the cloud the point was built from) with
    nonnegative weights summing to one within ``TAU_W``.
    """

    point: np.ndarray
    support: tuple

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))
        w = np.array([wt for _, wt in self.support], dtype=float)
        if np.any(w < -TAU_W) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("hull point weights must be a convex combination")

    def weights_on(self, cloud: PointCloud) -> np.ndarray:
        w = np.zeros(cloud.size)
        for i, wt in self.support:
            w[i] += wt
        return w


@dataclass(frozen=True)
class EnclosingBall:
    """Smallest enclosing ball with its boundary support set."""

    center: np.ndarray
    radius: float
    support: tuple  # indices of boundary points, at most d + 1


# ---------------------------------------------------------------------------
# distances and membership
# ---------------------------------------------------------------------------

def dist_to_cloud(x, cloud: PointCloud) -> float:
    """Distance from ``x`` to the sampled points: min over p of |x - p|."""
    x = as_point(x, dim=cloud.dim)
    d, _ = cloud.tree.query(x)
    return float(d)


def set_distance(x, cloud: PointCloud) -> float:
    """Distance from ``x`` to the underlying set (support model if present)."""
    if cloud.support is not None:
        return cloud.support.distance(np.asarray(x, dtype=float))
    return dist_to_cloud(x, cloud)


def nearest_on_set(x, cloud: PointCloud):
    """Closest point of the underlying set to ``x`` and its distance."""
    x = as_point(x, dim=cloud.dim)
    if cloud.support is not None:
        return cloud.support.nearest_point(x)
    d, idx = cloud.tree.query(x)
    return cloud.points[int(idx)].copy(), float(d)


def set_distance_in_ball(x, cloud: PointCloud, ball: Ball) -> float:
    """Distance from ``x`` to the part of the set inside the open ball."""
    idx = members_in_ball_indices(cloud, ball)
    best = np.inf
    if len(idx):
        best = float(
            np.linalg.norm(cloud.points[idx] - np.asarray(x, dtype=float), axis=1).min()
        )
    if cloud.support is not None:
        best = min(
            best,
            cloud.support.distance_in_ball(
                np.asarray(x, dtype=float), ball.center, ball.radius
            ),
        )
    return best


def members_in_ball_indices(cloud: PointCloud, ball: Ball) -> np.ndarray:
    """Indices of cloud points strictly inside the open ball, ascending."""
    if ball.center.shape[0] != cloud.dim:
        raise DimensionMismatch("ball center dimension differs from cloud")
    idx = cloud.tree.query_ball_point(ball.center, ball.radius)
    if not idx:
        return np.empty(0, dtype=int)
    idx = np.asarray(sorted(idx), dtype=int)
    d = np.linalg.norm(cloud.points[idx] - ball.center[None, :], axis=1)
    return idx[d < ball.radius]


def members_in_ball(cloud: PointCloud, ball: Ball) -> PointCloud:
    """Subcloud of points strictly inside the open ball, in input order.

    Raises
    ------
    errors.EmptyIntersection
        If no sampled point lies inside the ball.
    """
    from .errors import EmptyIntersection

    idx = members_in_ball_indices(cloud, ball)
    if len(idx) == 0:
        raise EmptyIntersection(
            f"ball at {ball.center} with radius {ball.radius} misses {cloud.label}",
            center=ball.center,
            radius=ball.radius,
        )
    return PointCloud(cloud.points[idx], label=f"{cloud.label}|ball")


def hausdorff_distance(a: PointCloud, b: PointCloud) -> float:
    """Symmetric Hausdorff distance between two sampled sets."""
    if a.dim != b.dim:
        raise DimensionMismatch("clouds live in different dimensions")
    d_ab, _ = b.tree.query(a.points)
    d_ba, _ = a.tree.query(b.points)
    return float(max(d_ab.max(), d_ba.max()))


def inflated_box(cloud: PointCloud, factor: float = 3.0):
    """Axis-aligned working box: the cloud's bounding box scaled about its
    center by ``factor``.  Degenerate axes get a floor of an eighth of the
    diameter (or 0.5 for a singleton) so the box always has volume.
    """
    if factor < 1.0:
        raise ValueError("inflation factor must be at least 1")
    lo, hi = cloud.bounding_box()
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    diam = cloud.diameter()
    floor = 0.125 * diam if diam > 0 else 0.5
    half = np.maximum(half, floor)
    return center - factor * half, center + factor * half


# ---------------------------------------------------------------------------
# nearest point in a convex hull (min-norm-point scheme)
# ---------------------------------------------------------------------------

def _affine_min_norm(V):
    """Weights of the min-norm point in the affine hull of rows of V."""
    k = V.shape[0]
    gram = V @ V.T
    lhs = np.zeros((k + 1, k + 1))
    lhs[:k, :k] = 2.0 * gram
    lhs[:k, k] = 1.0
    lhs[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    sol, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    return sol[:k]


def project_to_hull(q, points, tol=TAU_PROJ) -> HullPoint:
    """Nearest point of conv(points) to ``q``.

    Runs a finitely-terminating min-norm-point scheme over a growing support
    set ("corral") of at most d + 2 points; ties in the steepest vertex are
    broken by smallest index.  The returned barycentric support certifies
    the answer.

    Parameters
    ----------
    q : array-like, shape (d,)
    points : array-like, shape (n, d)
    tol : float
        Relative duality-gap tolerance; the distance error it permits is of
        order ``tol`` times the data scale.

    Returns
    -------
    HullPoint
        Nearest hull point with indices into ``points`` and weights.
    """
    q = as_point(q)
    pts = as_points(points, dim=q.shape[0])
    V = pts - q[None, :]
    norms2 = np.einsum("ij,ij->i", V, V)
    scale2 = max(float(norms2.max()), 1e-300)
    start = int(np.argmin(norms2))
    if norms2[start] <= tol * tol * scale2:
        return HullPoint(point=pts[start].copy(), support=((start, 1.0),))

    corral = [start]
    w = np.array([1.0])
    tol_zero = 1e-14
    budget = 3 * len(pts) + 64
    for _ in range(budget):
        x = w @ V[corral]
        xx = float(x @ x)
        if xx <= tol * tol * scale2:
            break
        dots = V @ x
        j = int(np.argmin(dots))
        gap = xx - float(dots[j])
        if gap <= tol * scale2:
            break
        if j in corral:
            break
        corral.append(j)
        w = np.append(w, 0.0)
        # minor cycle: restore a corral with strictly positive weights
        for _ in range(len(pts) + 8):
            u = _affine_min_norm(V[corral])
            if np.all(u > tol_zero):
                w = u
                break
            mask = u <= tol_zero
            denom = w[mask] - u[mask]
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios = np.where(denom > 0, w[mask] / denom, np.inf)
            theta = min(1.0, float(ratios.min()))
            w = (1.0 - theta) * w + theta * u
            w[w < tol_zero] = 0.0
            keep = w > 0.0
            if not np.any(keep):
                keep[int(np.argmax(u))] = True
                w[keep] = 1.0
            corral = [c for c, k in zip(corral, keep) if k]
            w = w[keep]
            w = w / w.sum()
            if len(corral) == 1:
                break
    else:
        raise ConvergenceFailure(
            "nearest-point-in-hull scheme exhausted its iteration budget; "
            "retry with a looser tolerance"
        )

    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    point = q + w @ V[corral]
    support = tuple((int(c), float(wi)) for c, wi in zip(corral, w))
    return HullPoint(point=point, support=support)


# ---------------------------------------------------------------------------
# smallest enclosing ball
# ---------------------------------------------------------------------------

def _circumball(pts):
    """Center and radius of the smallest ball with all of ``pts`` on its boundary."""
    if len(pts) == 1:
        return pts[0].copy(), 0.0
    base = pts[0]
    V = pts[1:] - base[None, :]
    gram = V @ V.T
    rhs = 0.5 * np.diag(gram)
    try:
        u = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        u, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    center = base + u @ V
    radius = float(np.linalg.norm(pts - center[None, :], axis=1).max())
    return center, radius


def _meb_recurse(points, idx_prefix, boundary_idx, dim):
    if len(boundary_idx) == dim + 1 or len(idx_prefix) == 0:
        if not boundary_idx:
            return None
        c, r = _circumball(points[np.asarray(boundary_idx)])
        return c, r
    ball = None
    if boundary_idx:
        c, r = _circumball(points[np.asarray(boundary_idx)])
        ball = (c, r)
    for k in range(len(idx_prefix)):
        i = idx_prefix[k]
        p = points[i]
        if ball is None or np.linalg.norm(p - ball[0]) > ball[1] * (1 + 1e-12) + 1e-14:
            ball = _meb_recurse(points, idx_prefix[:k], boundary_idx + [i], dim)
    return ball


def min_enclosing_ball(points) -> EnclosingBall:
    """Smallest ball containing all points (their Chebyshev ball).

    Deterministic given the input order: the internal processing permutation
    is drawn from a fixed seed, so reruns and rigidly transformed inputs make
    identical branch decisions.

    Returns
    -------
    EnclosingBall
        Center, radius, and the indices of a boundary support set of at most
        d + 1 points that certify minimality.
    """
    pts = as_points(points)
    n, dim = pts.shape
    if n == 1:
        return EnclosingBall(center=pts[0].copy(), radius=0.0, support=(0,))
    order = np.random.default_rng(0xC0FFEE).permutation(n)
    ball = _meb_recurse(pts, list(order), [], dim)
    center = ball[0]
    dists = np.linalg.norm(pts - center[None, :], axis=1)
    radius = float(dists.max())
    on_boundary = np.flatnonzero(dists >= radius - TAU_GEO)
    support = []
    for i in on_boundary:
        support.append(int(i))
        if len(support) == dim + 1:
            break
    return EnclosingBall(center=center, radius=radius, support=tuple(support))


# ---------------------------------------------------------------------------
# rigid motions
# ---------------------------------------------------------------------------

def rotation_matrix_2d(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def rigid_motion(rotation=None, translation=None, scale=1.0):
    """Return a vectorized map pts -> scale * (pts @ R.T) + translation."""

    def fn(pts):
        out = np.asarray(pts, dtype=float)
        if rotation is not None:
            out = out @ np.asarray(rotation, dtype=float).T
        out = out * float(scale)
        if translation is not None:
            out = out + np.asarray(translation, dtype=float)[None, :]
        return out

    return fn
