"""Constructive selection machinery.

Everything here reduces to one move, repeated: intersect the target set with
an open ball around the current point, take an explicit convex combination
of the members, and shrink the ball.  With a contraction level strictly above
the target's measured nonconvexity, step lengths are dominated by a geometric
series and the loop converges onto the set; the trace records the certificate.

Two radius schedules are provided.  The banach schedule shrinks by a fixed
factor per step.  The hilbert schedule exploits the in-ball proximity upgrade
(see measures.phi_and_bounds): rounds of inner steps whose radii follow the
gamma recursion, each round confined to a base ball so total displacement
stays bounded by a configured constant times the initial scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import KAPPA, TAU_DUP, TAU_GEO, TAU_INFLATE, TOL_REL
from .errors import (
    ContractionNotCertified,
    ConvergenceFailure,
    EmptyIntersection,
    PreconditionFailure,
)
from .geometry import (
    Ball,
    HullPoint,
    PointCloud,
    members_in_ball_indices,
    nearest_on_set,
    set_distance,
)
from .measures import gamma_sequence
from .validation import as_point


# ---------------------------------------------------------------------------
# barycentric selection
# ---------------------------------------------------------------------------

def bary_select(cloud: PointCloud, ball: Ball, kappa: float = KAPPA) -> HullPoint:
    """Weighted average of the cloud points strictly inside an open ball.

    Weights are proportional to (radius - distance)^kappa, so they vanish as
    a point approaches the boundary; the output therefore depends
    continuously on (center, radius) and always lies in the convex hull of
    the members.

    Raises
    ------
    errors.EmptyIntersection
        If no point lies strictly inside the ball.
    """
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    idx = members_in_ball_indices(cloud, ball)
    if len(idx) == 0:
        raise EmptyIntersection("ball contains no point of the set",
                                center=ball.center, radius=ball.radius)
    pts = cloud.points[idx]
    d = np.linalg.norm(pts - ball.center[None, :], axis=1)
    if len(idx) == 1:
        return HullPoint(point=pts[0], support=((int(idx[0]), 1.0),))
    w = np.power(ball.radius - d, kappa)
    w = w / w.sum()
    point = w @ pts
    return HullPoint(point=point,
                     support=tuple((int(i), float(wi)) for i, wi in zip(idx, w)))


def _bary_select_capped(cloud, center, radius, base_center, base_radius, kappa):
    """bary_select over the members of the intersection of two open balls.

    Weights multiply the two boundary-vanishing factors so the output stays
    continuous in all four ball parameters.  Returns None when no point lies
    strictly inside both balls.
    """
    idx = np.asarray(cloud.tree.query_ball_point(center, radius), dtype=int)
    if len(idx) == 0:
        return None
    pts = cloud.points[idx]
    d1 = np.linalg.norm(pts - center[None, :], axis=1)
    d2 = np.linalg.norm(pts - base_center[None, :], axis=1)
    keep = (d1 < radius) & (d2 < base_radius)
    if not np.any(keep):
        return None
    idx, pts, d1, d2 = idx[keep], pts[keep], d1[keep], d2[keep]
    if len(idx) == 1:
        return HullPoint(point=pts[0], support=((int(idx[0]), 1.0),))
    w = np.power((radius - d1) * (base_radius - d2), kappa)
    w = w / w.sum()
    return HullPoint(point=w @ pts,
                     support=tuple((int(i), float(wi)) for i, wi in zip(idx, w)))


# ---------------------------------------------------------------------------
# schedules and traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IterationSchedule:
    """Parameters of the shrinking-ball loop.

    mode "banach": ball radii contraction^n * initial_radius; requires the
    contraction to exceed the target's measured nonconvexity (the caller
    certifies this).  mode "hilbert": contraction is the gamma level of the
    recursion; big_c is the displacement budget (auto: (1+g^2)/(1-g^2)+0.05).

    tol: absolute stopping tolerance (None: 1e-8 * initial_radius at run
    time).  slack: additive ball inflation used by reprojection schedules.
    kappa: exponent of the barycentric weights.
    """

    mode: str = "banach"
    contraction: float = 0.5
    tol: float | None = None
    n_max: int | None = None
    slack: float = 0.0
    kappa: float = KAPPA
    big_c: float | None = None

    def __post_init__(self):
        if self.mode not in ("banach", "hilbert"):
            raise ValueError("mode must be 'banach' or 'hilbert'")
        if not (0.0 < self.contraction < 1.0):
            raise ValueError("contraction must lie in (0, 1)")
        if self.tol is not None and self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be positive")
        if self.slack < 0:
            raise ValueError("slack must be nonnegative")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.big_c is not None and self.big_c <= 1.0:
            raise ValueError("big_c must exceed 1")


@dataclass(frozen=True)
class SelectionTrace:
    """Record of one shrinking-ball run.

    step_norms[n] <= radii[n] * (1 + inflation slack) structurally, and the
    nominal radii follow the schedule exactly, so the geometric-series
    displacement certificate can be checked after the fact.
    """

    iterates: np.ndarray
    step_norms: np.ndarray
    radii: np.ndarray
    residuals: np.ndarray
    certified_bound: float
    mode: str
    converged: bool
    starved: int
    inflations: int
    rounds: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))

    @property
    def total_movement(self) -> float:
        return float(self.step_norms.sum()) if len(self.step_norms) else 0.0


def _hilbert_plan(gamma: float, big_c: float | None):
    """Inner radius factors, their count, and the outer ratio for one scale.

    The inner phase follows the gamma recursion until it first drops below
    1 - 1/C; the outer ratio lambda is the midpoint of (that value, 1 - 1/C).
    """
    if big_c is None:
        big_c = (1.0 + gamma * gamma) / (1.0 - gamma * gamma) + 0.05
    thr = 1.0 - 1.0 / big_c
    seq, fixed = gamma_sequence(gamma, 400)
    below = np.flatnonzero(seq < thr)
    if len(below) == 0:
        raise ContractionNotCertified(
            "gamma recursion never falls below 1 - 1/C "
            f"(fixed point {fixed:.6g} vs threshold {thr:.6g}); "
            "increase big_c or decrease gamma"
        )
    n_inner = int(below[0]) + 1
    lam = 0.5 * (float(seq[n_inner - 1]) + thr)
    return seq[:n_inner], lam, big_c


# ---------------------------------------------------------------------------
# the iterative loops
# ---------------------------------------------------------------------------

def _members_with_retry(cloud, center, radius):
    """Strict open-ball members, retrying once with a tiny inflation.

    Returns (indices, used_radius, inflated_flag); empty indices mean the
    inflated ball still found nothing (the sampling starved the ball).
    """
    idx = members_in_ball_indices(cloud, Ball(center, radius))
    if len(idx):
        return idx, radius, False
    r2 = radius * (1.0 + TAU_INFLATE)
    idx = members_in_ball_indices(cloud, Ball(center, r2))
    return idx, r2, len(idx) > 0


def iterate_to_member(cloud: PointCloud, start, initial_radius: float,
                      schedule: IterationSchedule, on_starve: str = "raise"):
    """Drive a point onto the set by barycentric steps in shrinking balls.

    Parameters
    ----------
    cloud : PointCloud
        Target set; the first ball (radius ``initial_radius``) must contain
        at least one of its points.
    start : array-like
        Initial point.
    initial_radius : float
        Scale of the first ball; in hilbert mode the base-ball radius is
        contraction * initial_radius.
    schedule : IterationSchedule
    on_starve : {"raise", "stop"}
        What to do when a ball (after one inflation retry) is empty before
        the stopping tolerance is reached: raise EmptyIntersection, or stop
        and return the best iterate with converged=False.

    Returns
    -------
    (numpy.ndarray, SelectionTrace)

    Notes
    -----
    Steps never exceed the current ball radius, so total displacement is
    bounded by initial_radius/(1-contraction) in banach mode and by
    big_c * contraction * initial_radius in hilbert mode; the bound is
    stored as ``certified_bound`` (plus the stopping tolerance).
    """
    start = as_point(start, dim=cloud.dim)
    if initial_radius <= 0:
        raise ValueError("initial_radius must be positive")
    if on_starve not in ("raise", "stop"):
        raise ValueError("on_starve must be 'raise' or 'stop'")
    tol = schedule.tol if schedule.tol is not None else TOL_REL * initial_radius
    mem_tol = max(TAU_DUP, tol)
    if schedule.mode == "banach":
        return _iterate_banach(cloud, start, initial_radius, schedule,
                               tol, mem_tol, on_starve)
    return _iterate_hilbert(cloud, start, initial_radius, schedule,
                            tol, mem_tol, on_starve)


def _finish(iterates, steps, radii, residuals, bound, mode, converged,
            starved, inflations, rounds, on_starve, center, radius):
    trace = SelectionTrace(
        iterates=np.asarray(iterates),
        step_norms=np.asarray(steps, dtype=float),
        radii=np.asarray(radii, dtype=float),
        residuals=np.asarray(residuals, dtype=float),
        certified_bound=bound,
        mode=mode,
        converged=converged,
        starved=starved,
        inflations=inflations,
        rounds=np.asarray(rounds, dtype=int),
    )
    if not converged and on_starve == "raise":
        if starved:
            raise EmptyIntersection(
                f"ball starved at residual {trace.residuals[-1]:.3g} "
                "before reaching tolerance",
                center=center, radius=radius,
            )
        raise ConvergenceFailure(
            "iteration budget exhausted above tolerance",
            iterate=np.array(iterates[-1]),
            residual=float(trace.residuals[-1]),
        )
    return np.array(iterates[-1]), trace


def _iterate_banach(cloud, start, initial_radius, schedule, tol, mem_tol,
                    on_starve):
    beta = schedule.contraction
    bound = initial_radius / (1.0 - beta) + tol
    n_max = schedule.n_max
    if n_max is None:
        n_max = max(200, int(math.ceil(math.log(max(tol / initial_radius, 1e-300))
                                       / math.log(beta))) + 64)
    x = start
    res = set_distance(x, cloud)
    iterates, steps, radii, residuals, rounds = [x], [], [], [res], []
    starved = inflations = 0
    converged = res <= mem_tol
    last_c, last_r = x, initial_radius
    for n in range(n_max):
        if converged:
            break
        r_n = (beta ** n) * initial_radius
        idx, used_r, inflated = _members_with_retry(cloud, x, r_n)
        last_c, last_r = x, r_n
        if len(idx) == 0:
            # No sample in reach: the local structure is finer than the
            # radius schedule tolerates.  Walk straight toward the nearest
            # point of the set, one radius-capped step per round, so every
            # certificate (step <= r_n, total movement, residual) is kept.
            starved += 1
            target, gap = nearest_on_set(x, cloud)
            if gap <= r_n:
                step = gap
                x = target
            else:
                step = r_n
                x = x + (target - x) * (r_n / gap)
            res = set_distance(x, cloud)
            iterates.append(x)
            steps.append(step)
            radii.append(r_n)
            rounds.append(0)
            residuals.append(res)
            if res <= mem_tol:
                converged = True
            continue
        if inflated:
            inflations += 1
        hp = bary_select(cloud, Ball(x, used_r), kappa=schedule.kappa)
        step = float(np.linalg.norm(hp.point - x))
        x = hp.point
        res = set_distance(x, cloud)
        iterates.append(x)
        steps.append(step)
        radii.append(r_n)
        rounds.append(0)
        residuals.append(res)
        if res <= mem_tol:
            converged = True
    return _finish(iterates, steps, radii, residuals, bound, "banach",
                   converged, starved, inflations, rounds, on_starve,
                   last_c, last_r)


def _iterate_hilbert(cloud, start, initial_radius, schedule, tol, mem_tol,
                     on_starve):
    gamma = schedule.contraction
    inner, lam, big_c = _hilbert_plan(gamma, schedule.big_c)
    eps0 = gamma * initial_radius
    bound = big_c * eps0 + tol
    k_max = max(1, int(math.ceil(math.log(max(mem_tol / eps0, 1e-300))
                                 / math.log(lam))) + 8)
    n_max = schedule.n_max
    if n_max is None:
        n_max = len(inner) * (k_max + 2) + 64
    x = start
    res = set_distance(x, cloud)
    iterates, steps, radii, residuals, rounds = [x], [], [], [res], []
    starved = inflations = 0
    converged = res <= mem_tol
    total_steps = 0
    last_c, last_r = x, initial_radius
    for k in range(k_max):
        if converged or total_steps >= n_max:
            break
        round_base = initial_radius * (lam ** k)
        eps_k = gamma * round_base
        s = x
        for g_n in inner:
            if converged or total_steps >= n_max:
                break
            r_j = float(g_n) * round_base
            last_c, last_r = x, r_j
            hp = _bary_select_capped(cloud, x, r_j, s, eps_k, schedule.kappa)
            if hp is None:
                hp = _bary_select_capped(cloud, x, r_j * (1.0 + TAU_INFLATE),
                                         s, eps_k * (1.0 + TAU_INFLATE),
                                         schedule.kappa)
                if hp is None:
                    starved += 1
                    break
                inflations += 1
            step = float(np.linalg.norm(hp.point - x))
            x = hp.point
            res = set_distance(x, cloud)
            iterates.append(x)
            steps.append(step)
            radii.append(r_j)
            rounds.append(k)
            residuals.append(res)
            total_steps += 1
            if res <= mem_tol:
                converged = True
        if starved:
            break
    return _finish(iterates, steps, radii, residuals, bound, "hilbert",
                   converged, starved, inflations, rounds, on_starve,
                   last_c, last_r)


# ---------------------------------------------------------------------------
# set-valued maps and epsilon-selection repair
# ---------------------------------------------------------------------------

class SetValuedMap:
    """A rule assigning a nonempty point cloud to every grid parameter.

    Parameters may be scalars or points; values are computed once per grid
    index and cached.
    """

    def __init__(self, domain_points, value_at, label: str = "map"):
        self.domain_points = list(domain_points)
        if not self.domain_points:
            raise ValueError("domain_points must be nonempty")
        self.value_at = value_at
        self.label = label
        self._cache: dict = {}

    def value(self, i: int) -> PointCloud:
        if i not in self._cache:
            cloud = self.value_at(self.domain_points[i])
            if not isinstance(cloud, PointCloud):
                raise TypeError("value_at must return a PointCloud")
            self._cache[i] = cloud
        return self._cache[i]

    def __len__(self) -> int:
        return len(self.domain_points)


def constant_map(cloud: PointCloud, domain_points, label: str | None = None) -> SetValuedMap:
    return SetValuedMap(domain_points, lambda _t: cloud,
                        label=label or f"const[{cloud.label}]")


def _param_key(p):
    arr = np.asarray(p, dtype=float).ravel()
    return arr.tobytes()


@dataclass(frozen=True)
class ImprovedSelection:
    """Grid selection produced by repairing an eps-selection.

    Callable on any grid parameter; ``certified_bound`` bounds the movement
    dist(f_eps(x), f(x)) at every grid point (eps/(1-alpha) + tol in banach
    mode, big_c * eps + tol in hilbert mode).
    """

    domain_points: tuple
    start_values: np.ndarray
    values: np.ndarray
    residuals: np.ndarray
    movements: np.ndarray
    certified_bound: float
    eps: float
    mode: str
    traces: tuple
    _index: dict = field(repr=False, default_factory=dict)

    def __call__(self, x):
        key = _param_key(x)
        if key not in self._index:
            raise KeyError("parameter is not a grid point of this selection")
        return self.values[self._index[key]]

    @property
    def max_movement(self) -> float:
        return float(self.movements.max())

    @property
    def max_residual(self) -> float:
        return float(self.residuals.max())


def improve_epsilon_selection(F: SetValuedMap, f_eps, eps: float, alpha: float,
                              schedule: IterationSchedule) -> ImprovedSelection:
    """Repair an eps-selection of F into a selection, bounding the movement.

    Each grid value f_eps(x) starts within eps of F(x) (verified; a
    violation raises PreconditionFailure with the witnessing parameter).
    In banach mode the repair ball radii shrink by the factor alpha (the
    paraconvexity level of the values), giving total movement at most
    eps/(1-alpha) + tol.  In hilbert mode the gamma-recursion loop runs at
    base scale eps (schedule.contraction is gamma, which must exceed alpha),
    giving movement at most big_c * eps + tol.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not (0.0 <= alpha < 1.0):
        raise ValueError("alpha must lie in [0, 1)")

    starts = []
    for i in range(len(F)):
        v = F.value(i)
        p = as_point(f_eps(F.domain_points[i]), dim=v.dim)
        d = set_distance(p, v)
        if d > eps * (1.0 + TAU_GEO):
            raise PreconditionFailure(
                f"not an eps-selection: residual {d:.6g} exceeds eps {eps:.6g}",
                witness=(F.domain_points[i], p, d),
            )
        starts.append(p)

    tol = schedule.tol if schedule.tol is not None else TOL_REL * eps
    if schedule.mode == "banach":
        certified = eps / (1.0 - alpha) + tol
        if alpha > 0.0:
            run_schedule = replace(schedule, contraction=alpha, tol=tol)
        else:
            run_schedule = replace(schedule, contraction=0.5, tol=tol, n_max=1)
        initial_radius = eps
    else:
        gamma = schedule.contraction
        if gamma <= alpha:
            raise ContractionNotCertified(
                f"hilbert repair needs gamma > alpha (gamma {gamma:.6g}, "
                f"alpha {alpha:.6g})"
            )
        _, _, big_c = _hilbert_plan(gamma, schedule.big_c)
        certified = big_c * eps + tol
        run_schedule = replace(schedule, tol=tol, big_c=big_c)
        initial_radius = eps / gamma

    values, residuals, movements, traces = [], [], [], []
    for i in range(len(F)):
        v = F.value(i)
        out, trace = iterate_to_member(v, starts[i], initial_radius,
                                       run_schedule, on_starve="stop")
        values.append(out)
        residuals.append(set_distance(out, v))
        movements.append(float(np.linalg.norm(out - starts[i])))
        traces.append(trace)

    index = {_param_key(p): i for i, p in enumerate(F.domain_points)}
    return ImprovedSelection(
        domain_points=tuple(F.domain_points),
        start_values=np.asarray(starts),
        values=np.asarray(values),
        residuals=np.asarray(residuals, dtype=float),
        movements=np.asarray(movements, dtype=float),
        certified_bound=certified,
        eps=eps,
        mode=schedule.mode,
        traces=tuple(traces),
        _index=index,
    )
