"""Nonconvexity measurement and paraconvexity constants.

The central quantity is the relative precision of a set P inside an open
ball D of radius r: the largest distance from a point of conv(P ∩ D) back to
P, divided by r.  Its supremum over all balls of radius r, as a function of
r, is the nonconvexity profile; a set is alpha-paraconvex when alpha
majorates that profile.  Both quantities are estimated from below by
sampling candidate balls and candidate hull points; enlarging a sampling
plan never decreases a reported value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull

from .config import TAU_GEO, TAU_VERDICT
from .errors import EmptyIntersection
from .geometry import (
    Ball,
    HullPoint,
    PointCloud,
    members_in_ball_indices,
    set_distance_in_ball,
)
from .validation import check_unit_interval

DEFAULT_RADIUS_COUNT = 24
DEFAULT_RADIUS_SPAN = (0.05, 1.5)  # multiples of the cloud diameter


# ---------------------------------------------------------------------------
# sampling plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplingPlan:
    """Budget for estimating suprema over balls and hull points.

    ``radius_grid = None`` selects the default grid of 24 log-spaced radii
    between 0.05 and 1.5 times the cloud diameter.  Enlarging any count only
    appends candidates, so reported estimates grow monotonically with the
    plan.
    """

    radius_grid: tuple | None = None
    ball_center_count: int = 128
    hull_sample_count: int = 96
    seed: int = 0

    def radii(self, cloud: PointCloud) -> np.ndarray:
        if self.radius_grid is not None:
            radii = np.asarray(self.radius_grid, dtype=float)
            if np.any(radii <= 0):
                raise ValueError("radius grid must be positive")
            return radii
        scale = cloud.diameter()
        if scale <= 0.0:
            scale = 1.0
        lo, hi = DEFAULT_RADIUS_SPAN
        return np.geomspace(lo * scale, hi * scale, DEFAULT_RADIUS_COUNT)


def _hull_vertex_indices(cloud: PointCloud, cap=12) -> np.ndarray:
    pts = cloud.points
    if len(pts) <= cloud.dim + 1:
        verts = np.arange(len(pts))
    else:
        try:
            verts = np.sort(ConvexHull(pts).vertices)
        except Exception:
            verts = np.arange(len(pts))
    if len(verts) > cap:
        pick = np.linspace(0, len(verts) - 1, cap).round().astype(int)
        verts = verts[np.unique(pick)]
    return verts


def candidate_centers(cloud: PointCloud, radius: float, plan: SamplingPlan) -> np.ndarray:
    """Deterministic pool of ball centers: box grid, cloud points, midpoints.

    The pool is shuffled with the plan seed and truncated to
    ``ball_center_count``, so a larger count always extends a smaller one.
    """
    lo, hi = cloud.bounding_box()
    lo = lo - radius
    hi = hi + radius
    per_axis = 6 if cloud.dim == 2 else 4
    axes = [np.linspace(lo[k], hi[k], per_axis) for k in range(cloud.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=1)

    take = min(cloud.size, 24)
    idx = np.unique(np.linspace(0, cloud.size - 1, take).round().astype(int))
    sample = cloud.points[idx]

    verts = _hull_vertex_indices(cloud)
    vp = cloud.points[verts]
    if len(vp) >= 2:
        ii, jj = np.triu_indices(len(vp), k=1)
        mids = 0.5 * (vp[ii] + vp[jj])
    else:
        mids = np.empty((0, cloud.dim))

    pool = np.vstack([grid, sample, mids])
    order = np.random.default_rng(plan.seed).permutation(len(pool))
    return pool[order][: plan.ball_center_count]


def sample_hull_points(cloud: PointCloud, member_idx: np.ndarray, plan: SamplingPlan, rng):
    """Candidate points of conv(P ∩ D) with barycentric certificates.

    Candidates are the extreme members, midpoints of extreme pairs, and
    seeded random convex combinations (pair interpolations and small
    Dirichlet draws).  Returns a point array and a parallel support list of
    (global index array, weight array) pairs.
    """
    pts = cloud.points[member_idx]
    m = len(member_idx)
    Q = []
    supports = []

    if m <= cloud.dim + 1 or m <= 8:
        verts_local = np.arange(m)
    else:
        try:
            verts_local = np.sort(ConvexHull(pts).vertices)
        except Exception:
            verts_local = np.arange(m)
    if len(verts_local) > 14:
        pick = np.linspace(0, len(verts_local) - 1, 14).round().astype(int)
        verts_local = verts_local[np.unique(pick)]

    for v in verts_local:
        Q.append(pts[v])
        supports.append((member_idx[[v]], np.array([1.0])))
    for a in range(len(verts_local)):
        for b in range(a + 1, len(verts_local)):
            ia, ib = verts_local[a], verts_local[b]
            Q.append(0.5 * (pts[ia] + pts[ib]))
            supports.append((member_idx[[ia, ib]], np.array([0.5, 0.5])))

    size = min(m, 4)
    for _ in range(plan.hull_sample_count):
        i, j = rng.integers(0, m, size=2)
        t = rng.random()
        sub = rng.choice(m, size=size, replace=False)
        w = rng.dirichlet(np.ones(size))
        Q.append((1.0 - t) * pts[i] + t * pts[j])
        if i == j:
            supports.append((member_idx[[i]], np.array([1.0])))
        else:
            supports.append((member_idx[[i, j]], np.array([1.0 - t, t])))
        Q.append(w @ pts[sub])
        supports.append((member_idx[sub], w.copy()))

    return np.asarray(Q), supports


def batch_set_distance(Q: np.ndarray, cloud: PointCloud, refine_all: bool = False) -> np.ndarray:
    """Distances from each row of ``Q`` to the underlying set.

    Point distances (an upper bound on the set distance) come from one
    vectorized tree query.  Exact support distances are then computed in
    decreasing order of that bound, stopping once no remaining entry can
    change the maximum; entries below that cut keep their upper bound, so
    the returned maximum is exact.  ``refine_all`` forces every entry exact.
    """
    Q = np.asarray(Q, dtype=float)
    point_d, _ = cloud.tree.query(Q)
    if cloud.support is None:
        return np.atleast_1d(point_d)
    point_d = np.atleast_1d(point_d)
    Q = Q.reshape(len(point_d), -1)
    exact = np.array(point_d, dtype=float)
    order = np.argsort(-point_d)
    best = 0.0
    for i in order:
        if not refine_all and point_d[i] <= best:
            break
        exact[i] = cloud.support.distance(Q[i])
        if exact[i] > best:
            best = exact[i]
    return exact


# ---------------------------------------------------------------------------
# relative precision and the nonconvexity profile
# ---------------------------------------------------------------------------

def relative_precision(cloud: PointCloud, ball: Ball, plan: SamplingPlan | None = None,
                       rng=None):
    """Estimate sup{dist(q, P)/r : q in conv(members of D)} for one ball.

    Returns
    -------
    (float, HullPoint)
        The estimated value in [0, 2) and the maximizing hull point.

    Raises
    ------
    errors.EmptyIntersection
        If the ball contains no sampled point.
    """
    plan = plan or SamplingPlan()
    member_idx = members_in_ball_indices(cloud, ball)
    if len(member_idx) == 0:
        raise EmptyIntersection(
            "ball contains no point of the set",
            center=ball.center, radius=ball.radius,
        )
    if rng is None:
        rng = np.random.default_rng(plan.seed)
    Q, supports = sample_hull_points(cloud, member_idx, plan, rng)
    dists = batch_set_distance(Q, cloud)
    k = int(np.argmax(dists))
    value = float(dists[k]) / ball.radius
    idx, w = supports[k]
    witness = HullPoint(
        point=Q[k],
        support=tuple((int(i), float(wi)) for i, wi in zip(idx, w)),
    )
    return value, witness


@dataclass(frozen=True)
class ProfileEntry:
    radius: float
    alpha_hat: float | None
    witness_ball: Ball | None
    witness_point: HullPoint | None

    @property
    def attained(self) -> bool:
        return self.alpha_hat is not None


@dataclass(frozen=True)
class NonconvexityProfile:
    """Estimated nonconvexity function of a sampled set on a radius grid."""

    label: str
    entries: tuple
    plan: SamplingPlan

    @property
    def radii(self) -> np.ndarray:
        return np.array([e.radius for e in self.entries])

    @property
    def alpha_max(self) -> float:
        vals = [e.alpha_hat for e in self.entries if e.attained]
        return max(vals) if vals else 0.0

    def alpha_max_below(self, r_max: float) -> float:
        vals = [e.alpha_hat for e in self.entries
                if e.attained and e.radius <= r_max]
        return max(vals) if vals else 0.0


def nonconvexity_function(cloud: PointCloud, plan: SamplingPlan | None = None) -> NonconvexityProfile:
    """Estimate the nonconvexity profile r -> sup over r-balls of relative precision.

    For each radius in the plan's grid the supremum over ball positions is
    estimated over a deterministic center pool (bounding-box grid, cloud
    points, midpoints of extreme pairs).  Values are estimates from below;
    radii whose candidate balls never meet the set yield absent entries.
    """
    plan = plan or SamplingPlan()
    entries = []
    for r_idx, r in enumerate(plan.radii(cloud)):
        best = None
        centers = candidate_centers(cloud, float(r), plan)
        for c_idx, center in enumerate(centers):
            ball = Ball(center=center, radius=float(r))
            rng = np.random.default_rng((plan.seed, r_idx, c_idx))
            try:
                value, witness = relative_precision(cloud, ball, plan, rng)
            except EmptyIntersection:
                continue
            if best is None or value > best[0]:
                best = (value, ball, witness)
        if best is None:
            entries.append(ProfileEntry(float(r), None, None, None))
        else:
            entries.append(ProfileEntry(float(r), best[0], best[1], best[2]))
    return NonconvexityProfile(label=cloud.label, entries=tuple(entries), plan=plan)


@dataclass(frozen=True)
class ParaconvexityVerdict:
    alpha_claimed: float
    strong_variant: bool
    holds: bool
    worst_deficit: float
    witness_ball: Ball | None
    witness_point: HullPoint | None


def check_paraconvexity(cloud: PointCloud, alpha: float, strong: bool = False,
                        plan: SamplingPlan | None = None) -> ParaconvexityVerdict:
    """Test whether the sampled set looks alpha-paraconvex.

    Weak variant: every sampled hull point q of conv(P ∩ D) must satisfy
    dist(q, P) <= alpha * r.  Strong variant measures dist(q, P ∩ D)
    instead.  The verdict holds when the worst deficit stays below the
    verdict slack; the witness realizes the worst deficit.
    """
    alpha = float(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    plan = plan or SamplingPlan()
    worst = -math.inf
    w_ball = None
    w_point = None
    for r_idx, r in enumerate(plan.radii(cloud)):
        centers = candidate_centers(cloud, float(r), plan)
        for c_idx, center in enumerate(centers):
            ball = Ball(center=center, radius=float(r))
            member_idx = members_in_ball_indices(cloud, ball)
            if len(member_idx) == 0:
                continue
            rng = np.random.default_rng((plan.seed, r_idx, c_idx))
            Q, supports = sample_hull_points(cloud, member_idx, plan, rng)
            if strong:
                dists = np.array(
                    [set_distance_in_ball(q, cloud, ball) for q in Q]
                )
            else:
                dists = batch_set_distance(Q, cloud)
            k = int(np.argmax(dists))
            deficit = float(dists[k]) - alpha * float(r)
            if deficit > worst:
                worst = deficit
                idx, w = supports[k]
                w_ball = ball
                w_point = HullPoint(
                    point=Q[k],
                    support=tuple((int(i), float(wi)) for i, wi in zip(idx, w)),
                )
    if worst == -math.inf:
        worst = 0.0
    return ParaconvexityVerdict(
        alpha_claimed=alpha,
        strong_variant=bool(strong),
        holds=worst <= TAU_VERDICT,
        worst_deficit=worst,
        witness_ball=w_ball,
        witness_point=w_point,
    )


# ---------------------------------------------------------------------------
# constants: phi, the two paraconvexity bounds, gamma recursion, threshold
# ---------------------------------------------------------------------------

def phi_and_bounds(alpha: float):
    """Return (phi(alpha), banach bound, hilbert bound) for alpha in [0, 1).

    phi(a) = sqrt(2a - a^2) controls the in-ball proximity upgrade available
    in Hilbert space; a/(1-a) bounds the paraconvexity of the space of
    uniform retractions obtained from Chebyshev-radius reprojection; the
    sharper Hilbert-space bound is a(1+a^2)/(1-a^2).
    """
    a = check_unit_interval(alpha, name="alpha")
    phi = math.sqrt(max(2.0 * a - a * a, 0.0))
    banach = a / (1.0 - a)
    hilbert = a * (1.0 + a * a) / (1.0 - a * a)
    return phi, banach, hilbert


def gamma_fixed_point(gamma: float) -> float:
    g = float(gamma)
    return 2.0 * g * g / (1.0 + g * g)


def gamma_sequence(gamma: float, n_max: int = 200):
    """Iterate g_1 = gamma, g_{n+1} = gamma * phi(g_n).

    The sequence decreases strictly to the fixed point 2*gamma^2 /
    (1 + gamma^2); iteration stops at ``n_max`` terms or as soon as floating
    point can no longer make strict progress, so the returned sequence is
    strictly decreasing and its last term sits at the numerical fixed point.

    Returns
    -------
    (numpy.ndarray, float)
        The sequence g_1, g_2, ... and the exact fixed point.
    """
    g = float(gamma)
    if not (0.0 < g < 1.0):
        raise ValueError("gamma must lie in (0, 1)")
    if n_max < 1:
        raise ValueError("n_max must be positive")
    seq = [g]
    for _ in range(n_max - 1):
        nxt = g * math.sqrt(max(2.0 * seq[-1] - seq[-1] ** 2, 0.0))
        if not nxt < seq[-1]:
            break
        seq.append(nxt)
    return np.asarray(seq), gamma_fixed_point(g)


def threshold_root(tol: float = 1e-12) -> float:
    """Root of a + a^2 + a^3 = 1 in (0, 1), by bracketing bisection.

    This is the level below which the Hilbert-space self-improvement loop
    closes (it replaces 1/2 from the general normed-space setting).  The
    cubic is strictly increasing on [0, 1], so the root is unique.
    """

    def f(a):
        return a + a * a + a * a * a - 1.0

    lo, hi = 0.0, 1.0
    if not (f(lo) < 0.0 < f(hi)):
        raise RuntimeError("bisection bracket failed")
    while hi - lo > tol / 10.0:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# in-ball proximity upgrade: empirical verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProximityUpgradeReport:
    """Empirical check that dist(z, members of D) <= phi(alpha) * r.

    Hypothesis: z in conv(members of D) with dist(z, P) <= alpha * r.  The
    samples are
    split by whether z lies within (1 - alpha) * r of the ball center, the
    two regimes the argument distinguishes.
    """

    alpha: float
    checked: int
    vacuous: bool
    worst_ratio: float
    worst_excess: float
    near_center_count: int
    near_boundary_count: int
    near_center_worst: float
    near_boundary_worst: float
    violations: int


def verify_proximity_upgrade(cloud: PointCloud, ball: Ball, alpha: float,
                             plan: SamplingPlan | None = None) -> ProximityUpgradeReport:
    """Sample hull points satisfying the hypothesis and check the upgrade bound."""
    alpha = check_unit_interval(alpha, name="alpha")
    plan = plan or SamplingPlan()
    phi = phi_and_bounds(alpha)[0]
    member_idx = members_in_ball_indices(cloud, ball)
    if len(member_idx) == 0:
        raise EmptyIntersection("ball contains no point of the set",
                                center=ball.center, radius=ball.radius)
    rng = np.random.default_rng(plan.seed)
    Q, _ = sample_hull_points(cloud, member_idx, plan, rng)
    set_d = batch_set_distance(Q, cloud, refine_all=True)
    r = ball.radius
    keep = set_d <= alpha * r + TAU_GEO
    checked = int(keep.sum())
    if checked == 0:
        return ProximityUpgradeReport(alpha, 0, True, 0.0, -math.inf,
                                      0, 0, 0.0, 0.0, 0)
    bound = phi * r
    nc_count = nb_count = violations = 0
    worst_ratio = 0.0
    worst_excess = -math.inf
    nc_worst = nb_worst = 0.0
    for q in Q[keep]:
        d_in = set_distance_in_ball(q, cloud, ball)
        ratio = d_in / bound if bound > 0 else (0.0 if d_in == 0.0 else math.inf)
        excess = d_in - bound
        worst_ratio = max(worst_ratio, ratio)
        worst_excess = max(worst_excess, excess)
        if excess > TAU_GEO:
            violations += 1
        if np.linalg.norm(q - ball.center) <= (1.0 - alpha) * r:
            nc_count += 1
            nc_worst = max(nc_worst, ratio)
        else:
            nb_count += 1
            nb_worst = max(nb_worst, ratio)
    return ProximityUpgradeReport(
        alpha=alpha, checked=checked, vacuous=False,
        worst_ratio=worst_ratio, worst_excess=worst_excess,
        near_center_count=nc_count, near_boundary_count=nb_count,
        near_center_worst=nc_worst, near_boundary_worst=nb_worst,
        violations=violations,
    )


def proximity_upgrade_campaign(n_trials: int, seed: int = 0, slack: float = 1e-6):
    """Randomized planar configurations testing the proximity upgrade bound.

    Each trial draws a small point set, a ball meeting it, and a random hull
    point z of the members; with a := dist(z, P)/r (the tightest admissible
    level) it checks dist(z, members of D) <= phi(a) * r + slack.

    Returns a dict with the number of trials, violations, and worst excess.
    """
    rng = np.random.default_rng(seed)
    worst_excess = -math.inf
    violations = 0
    done = 0
    while done < n_trials:
        n = int(rng.integers(3, 40))
        pts = rng.uniform(-1.0, 1.0, size=(n, 2))
        center = rng.uniform(-1.2, 1.2, size=2)
        radius = float(rng.uniform(0.2, 1.8))
        d = np.linalg.norm(pts - center[None, :], axis=1)
        members = np.flatnonzero(d < radius)
        if len(members) == 0:
            continue
        w = rng.dirichlet(np.ones(len(members)))
        z = w @ pts[members]
        r_all = np.linalg.norm(pts - z[None, :], axis=1)
        a = float(r_all.min()) / radius
        d_in = float(r_all[members].min())
        bound = math.sqrt(max(2.0 * a - a * a, 0.0)) * radius
        excess = d_in - bound
        worst_excess = max(worst_excess, excess)
        if excess > slack:
            violations += 1
        done += 1
    return {"trials": done, "violations": violations, "worst_excess": worst_excess}
