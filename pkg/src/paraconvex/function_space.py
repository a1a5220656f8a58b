"""Sup-metric structure over retraction operators.

Probe grids discretize the working box; on them we compare operators in the
uniform metric, average them into function-ball centers, collapse such
centers back to genuine retractions, follow one-parameter families of sets,
and estimate how nonconvex the space of retractions itself is.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .config import (
    BETA_CAP,
    BETA_MARGIN,
    BOX_INFLATION,
    TAU_DUP,
    TAU_GEO,
    TAU_INFLATE,
    TOL_REL,
)
from .errors import (
    ContractionNotCertified,
    ParaconvexityWarning,
    PreconditionFailure,
)
from .geometry import (
    Ball,
    PointCloud,
    hausdorff_distance,
    inflated_box,
    members_in_ball_indices,
    min_enclosing_ball,
    project_to_hull,
    set_distance,
)
from .measures import SamplingPlan, batch_set_distance
from .retraction import RetractionOperator, build_retraction, measured_alpha
from .selection import (
    IterationSchedule,
    constant_map,
    improve_epsilon_selection,
    iterate_to_member,
)
from .validation import as_point, as_points, as_weights


# ---------------------------------------------------------------------------
# probe grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProbeGrid:
    """Finite stand-in for the working box in sup-metric computations."""

    points: np.ndarray
    density: int
    box: tuple

    @property
    def size(self) -> int:
        return len(self.points)


def make_probe_grid(cloud: PointCloud, density: int | None = None,
                    box_inflation: float = BOX_INFLATION,
                    extra_points=None) -> ProbeGrid:
    """Regular grid over the inflated box of ``cloud``, plus its points.

    Including the cloud itself keeps sup-distances honest at the one place
    retractions are pinned; ``extra_points`` lets families share one grid.
    """
    if density is None:
        density = 40 if cloud.dim == 2 else 12
    if density < 2:
        raise ValueError("density must be at least 2")
    lo, hi = inflated_box(cloud, box_inflation)
    axes = [np.linspace(lo[k], hi[k], density) for k in range(cloud.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=1)
    parts = [grid, cloud.points]
    if extra_points is not None:
        parts.append(as_points(extra_points, dim=cloud.dim))
    points = np.ascontiguousarray(np.vstack(parts))
    return ProbeGrid(points=points, density=density, box=(lo, hi))


# ---------------------------------------------------------------------------
# functions on the working box
# ---------------------------------------------------------------------------

class FunctionOnBox:
    """Pointwise-evaluable map on the working box, memoized bitwise.

    ``radius_fn``, when present, reports the Chebyshev radius of the
    generating ensemble at a query point; reprojection uses it to size its
    shrinking balls.
    """

    def __init__(self, evaluator, dim: int, label: str = "function",
                 radius_fn=None, components=None, weights=None):
        self.evaluator = evaluator
        self.dim = dim
        self.label = label
        self.radius_fn = radius_fn
        self.components = components
        self.weights = weights
        self._memo: dict = {}

    def __call__(self, x):
        x = as_point(x, dim=self.dim)
        key = x.tobytes()
        if key not in self._memo:
            self._memo[key] = as_point(self.evaluator(x), dim=self.dim)
        return np.array(self._memo[key])

    def table(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return np.asarray([self(p) for p in pts])


def as_function(op, label: str | None = None) -> FunctionOnBox:
    """View a retraction operator (or pass a FunctionOnBox through) as a map."""
    if isinstance(op, FunctionOnBox):
        return op
    if isinstance(op, RetractionOperator):
        cached = getattr(op, "_fn_view", None)
        if cached is None:
            cached = FunctionOnBox(op.evaluate, dim=op.target.dim,
                                   label=label or op.label)
            op._fn_view = cached
        return cached
    raise TypeError("expected a RetractionOperator or FunctionOnBox")


def sup_distance(f, g, probes: ProbeGrid) -> float:
    """Largest pointwise gap between two maps across the probe grid."""
    tf = as_function(f).table(probes.points)
    tg = as_function(g).table(probes.points)
    if tf.shape != tg.shape:
        raise ValueError("maps produce values of different shape")
    return float(np.linalg.norm(tf - tg, axis=1).max())


def combine_retractions(operators, weights) -> FunctionOnBox:
    """Convex combination of retractions onto a common target.

    The result is a center of a function ball, not itself a retraction in
    general; its ``radius_fn`` reports the pointwise Chebyshev radius of the
    combined values.  It agrees with every operator on the target set.
    """
    ops = list(operators)
    if not ops:
        raise ValueError("need at least one operator")
    base = ops[0].target
    for op in ops[1:]:
        if op.target.dim != base.dim or op.target.size != base.size \
                or not np.array_equal(op.target.points, base.points):
            raise PreconditionFailure(
                "operators retract onto different sets")
    w = as_weights(weights, n=len(ops))

    def evaluator(x):
        outs = np.asarray([op.evaluate(x) for op in ops])
        return w @ outs

    def radius_fn(x):
        outs = np.asarray([op.evaluate(x) for op in ops])
        return min_enclosing_ball(outs).radius

    return FunctionOnBox(evaluator, dim=base.dim,
                         label=f"mix[{len(ops)} ops on {base.label}]",
                         radius_fn=radius_fn, components=tuple(ops), weights=w)


# ---------------------------------------------------------------------------
# reprojection of a function-ball center
# ---------------------------------------------------------------------------

def reproject_to_retraction(Q, P: PointCloud, beta: float,
                            gamma_slack: float | None = None,
                            probes: ProbeGrid | None = None,
                            tol: float | None = None):
    """Collapse a function-ball center onto P with a certified sup bound.

    Walks each value back to P through balls of radii beta^n * rho(x), where
    rho is Q's pointwise Chebyshev radius plus ``gamma_slack``.  Step n moves
    at most beta^n * rho, so the reprojected operator stays within
    beta/(1-beta) * max rho of Q in the sup metric over the probe grid.

    Returns
    -------
    (RetractionOperator, float)
        The reprojected retraction and the certified sup-distance bound.
    """
    Qf = as_function(Q)
    if Qf.radius_fn is None:
        raise PreconditionFailure(
            "center carries no ball-radius information; "
            "combine_retractions provides it")
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    scale = max(P.diameter(), 1.0)
    if gamma_slack is None:
        gamma_slack = 1e-9 * scale
    if gamma_slack <= 0.0:
        raise ValueError("gamma_slack must be positive")
    if probes is None:
        probes = make_probe_grid(P)

    # precondition sweep; rho_max feeds the certified bound
    rho_max = 0.0
    for x in probes.points:
        q = Qf(x)
        rho = Qf.radius_fn(x) + gamma_slack
        rho_max = max(rho_max, rho)
        d = set_distance(q, P)
        if d > beta * rho * (1.0 + TAU_GEO) and d > TAU_DUP:
            raise PreconditionFailure(
                "center strays farther from the target than beta allows",
                witness=(np.array(x), q, d, rho))
    if tol is None:
        tol = TOL_REL * max(rho_max, TAU_DUP)
    bound = beta / (1.0 - beta) * rho_max + tol
    n_cap = max(8, int(math.ceil(math.log(max(tol, 1e-300) / max(rho_max, tol))
                                 / math.log(beta))) + 16)

    def evaluator(x):
        if set_distance(x, P) <= TAU_DUP:
            return np.array(x)
        q = Qf(x)
        if set_distance(q, P) <= TAU_DUP:
            return q
        rho = Qf.radius_fn(x) + gamma_slack
        z = q
        n = 1
        while n <= n_cap:
            r_n = (beta ** n) * rho
            idx = members_in_ball_indices(P, Ball(z, r_n))
            if len(idx) == 0:
                idx = members_in_ball_indices(
                    P, Ball(z, r_n * (1.0 + TAU_INFLATE)))
            if len(idx) == 0:
                break
            z = project_to_hull(z, P.points[idx]).point
            if set_distance(z, P) <= TAU_DUP or r_n <= tol:
                break
            n += 1
        return z

    lo_p, hi_p = inflated_box(P, BOX_INFLATION)
    lo = np.minimum(lo_p, probes.points.min(axis=0))
    hi = np.maximum(hi_p, probes.points.max(axis=0))
    components = Qf.components or ()
    alpha_hat = max((op.alpha_hat for op in components), default=0.0)
    schedule = IterationSchedule(mode="banach", contraction=beta,
                                 slack=gamma_slack)
    op = RetractionOperator(
        target=P, schedule=schedule, working_box=(lo, hi),
        certified_C=2.0 / (1.0 - beta), alpha_hat=alpha_hat,
        label=f"reproject[{Qf.label}]", evaluator=evaluator)
    return op, float(bound)


# ---------------------------------------------------------------------------
# space-level nonconvexity of the retraction ensemble
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CombinationTrial:
    """One sampled function ball: mix a subset, reproject, compare."""

    anchor: int
    subset: tuple
    ball_radius: float
    beta_reproject: float
    rho_max: float
    sup_dist: float
    certified_bound: float
    within_certificate: bool
    ratio: float


@dataclass(frozen=True)
class SpaceParaconvexityReport:
    estimate: float
    alpha_hat: float
    betas: tuple
    kappas: tuple
    labels: tuple
    pairwise: np.ndarray
    trials: tuple
    degenerate: bool
    seed: int


def _ensemble_configs(alpha_hat: float, ensemble: int):
    betas = [alpha_hat + step for step in (0.05, 0.15, 0.25)
             if alpha_hat + step < BETA_CAP]
    if len(betas) < 2:
        betas = [alpha_hat + (1.0 - alpha_hat) * f for f in (0.25, 0.5, 0.75)]
    kappas = [1.0, 2.0, 4.0]
    while len(betas) * len(kappas) < ensemble:
        kappas.append(kappas[-1] * 2.0)
    configs = [(b, k) for k in kappas for b in betas]
    return configs[:ensemble], tuple(betas), tuple(kappas)


def space_paraconvexity_report(P: PointCloud, ensemble: int = 6,
                               probes: ProbeGrid | None = None, seed: int = 0,
                               alpha_hat: float | None = None,
                               plan: SamplingPlan | None = None
                               ) -> SpaceParaconvexityReport:
    """Sample function balls among retractions onto P and measure their sag.

    Builds an ensemble of retractions at varied contraction rates and weight
    exponents, takes seeded convex combinations within sup-metric balls, and
    reprojects each combination back onto a retraction.  The reported
    estimate is the worst ratio of reprojection sup-distance to ball radius;
    a convex target collapses every trial to zero.
    """
    if ensemble < 2:
        raise ValueError("ensemble must be at least 2")
    if alpha_hat is None:
        alpha_hat = measured_alpha(P, plan)
    if probes is None:
        probes = make_probe_grid(P)
    configs, betas, kappas = _ensemble_configs(alpha_hat, ensemble)
    ops = [build_retraction(P, b, kappa=k, alpha_hat=alpha_hat)
           for b, k in configs]
    tables = np.asarray([op.table(probes.points) for op in ops])
    m = len(ops)
    pairwise = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            gap = float(np.linalg.norm(tables[i] - tables[j], axis=1).max())
            pairwise[i, j] = pairwise[j, i] = gap

    scale = max(P.diameter(), 1.0)
    labels = tuple(op.label for op in ops)
    if pairwise.max() <= 1e-12 * scale:
        return SpaceParaconvexityReport(
            estimate=0.0, alpha_hat=alpha_hat, betas=betas, kappas=kappas,
            labels=labels, pairwise=pairwise, trials=(), degenerate=True,
            seed=seed)

    rng = np.random.default_rng(seed)
    gamma_slack = 1e-9 * scale
    trials = []
    for anchor in range(min(m, 3)):
        gaps = np.sort(pairwise[anchor][pairwise[anchor] > 0])
        if len(gaps) == 0:
            continue
        radii = sorted({float(gaps[len(gaps) // 2] * 1.05),
                        float(gaps[-1] * 1.05)})
        for r in radii:
            subset = [j for j in range(m) if pairwise[anchor, j] < r]
            if len(subset) < 2:
                continue
            w = rng.dirichlet(np.ones(len(subset)))
            Q = combine_retractions([ops[j] for j in subset], w)
            sub = tables[subset]
            rho_tab = np.asarray([
                min_enclosing_ball(sub[:, p, :]).radius
                for p in range(probes.size)])
            q_tab = np.tensordot(w, sub, axes=(0, 0))
            d_tab = batch_set_distance(q_tab, P, refine_all=True)
            need = float((d_tab / (rho_tab + gamma_slack)).max())
            beta_rp = min(BETA_CAP, max(0.05, 1.05 * need))
            try:
                R2, bound = reproject_to_retraction(
                    Q, P, beta_rp, gamma_slack=gamma_slack, probes=probes)
            except PreconditionFailure:
                continue
            sd = sup_distance(Q, R2, probes)
            trials.append(CombinationTrial(
                anchor=anchor, subset=tuple(subset), ball_radius=r,
                beta_reproject=beta_rp,
                rho_max=float(rho_tab.max() + gamma_slack),
                sup_dist=sd, certified_bound=bound,
                within_certificate=sd <= bound + 1e-6,
                ratio=sd / r))
    estimate = max((t.ratio for t in trials), default=0.0)
    return SpaceParaconvexityReport(
        estimate=estimate, alpha_hat=alpha_hat, betas=betas, kappas=kappas,
        labels=labels, pairwise=pairwise, trials=tuple(trials),
        degenerate=False, seed=seed)


def estimate_space_paraconvexity(P: PointCloud, ensemble: int = 6,
                                 probes: ProbeGrid | None = None,
                                 seed: int = 0,
                                 alpha_hat: float | None = None,
                                 plan: SamplingPlan | None = None) -> float:
    """Worst combination-to-retraction sag ratio over sampled function balls."""
    return space_paraconvexity_report(
        P, ensemble=ensemble, probes=probes, seed=seed,
        alpha_hat=alpha_hat, plan=plan).estimate


# ---------------------------------------------------------------------------
# one-parameter families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyOfSets:
    """Point clouds indexed by a strictly increasing parameter."""

    params: tuple
    sets: tuple
    hausdorff_steps: tuple
    label: str = "family"

    def __len__(self) -> int:
        return len(self.sets)


def make_family(params, sets, label: str = "family") -> FamilyOfSets:
    params = tuple(float(t) for t in params)
    sets = tuple(sets)
    if not sets or len(params) != len(sets):
        raise ValueError("params and sets must align and be nonempty")
    for s in sets:
        if not isinstance(s, PointCloud):
            raise TypeError("family members must be point clouds")
        if s.dim != sets[0].dim:
            raise ValueError("family members must share a dimension")
    if any(b <= a for a, b in zip(params, params[1:])):
        raise ValueError("params must increase strictly")
    steps = tuple(float(hausdorff_distance(a, b))
                  for a, b in zip(sets, sets[1:]))
    return FamilyOfSets(params=params, sets=sets, hausdorff_steps=steps,
                        label=label)


def family_probe_grid(family: FamilyOfSets,
                      density: int | None = None) -> ProbeGrid:
    # one shared grid: first set's box, plus middle and last member points
    extras = []
    if len(family) > 2:
        extras.append(family.sets[len(family) // 2].points)
    if len(family) > 1:
        extras.append(family.sets[-1].points)
    extra = np.vstack(extras) if extras else None
    return make_probe_grid(family.sets[0], density=density,
                           extra_points=extra)


def _family_evaluator(prev: RetractionOperator, target: PointCloud,
                      eps: float, contraction: float,
                      schedule: IterationSchedule):
    run = replace(schedule, contraction=contraction, tol=TOL_REL * eps)

    def evaluator(x):
        if set_distance(x, target) <= TAU_DUP:
            return np.array(x)
        start = prev.evaluate(x)
        if set_distance(start, target) <= TAU_DUP:
            return start
        out, _ = iterate_to_member(target, start, eps, run, on_starve="stop")
        return out

    return evaluator


def build_retraction_family(family: FamilyOfSets, beta: float,
                            margin: float | None = None,
                            probes: ProbeGrid | None = None,
                            plan: SamplingPlan | None = None,
                            repair_contraction: float | None = None):
    """One retraction per family member, continuous in the sup metric.

    The first operator is built directly.  Each successor starts from its
    predecessor's values on the shared probe grid and repairs them onto the
    next set at scale hausdorff_step/(1 - alpha_hat), so consecutive
    sup-distances track the family's Hausdorff steps with modulus
    1/(1 - repair_contraction).

    ``margin`` is the gap required between every member's measured level
    and ``beta``; by default it shrinks with 1 - beta so that strongly
    nonconvex families remain certifiable.

    Returns the list of operators, aligned with ``family.sets``.
    """
    if len(family) == 0:
        raise ValueError("family is empty")
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    if margin is None:
        margin = min(BETA_MARGIN, 0.5 * (1.0 - beta))
    sets = family.sets
    P0 = sets[0]
    plan = plan or SamplingPlan()
    if probes is None:
        probes = family_probe_grid(family)

    alpha0 = measured_alpha(P0, plan)
    if alpha0 >= 0.5:
        warnings.warn(ParaconvexityWarning(
            f"measured nonconvexity {alpha0:.3g} of {P0.label} leaves a "
            "thin contraction margin"))
    if alpha0 > beta - margin:
        raise ContractionNotCertified(
            f"first member measures {alpha0:.4g}; beta {beta:.4g} minus "
            f"margin {margin:.4g} does not cover it")

    lo = probes.points.min(axis=0)
    hi = probes.points.max(axis=0)
    box = (lo, hi)
    schedule = IterationSchedule(mode="banach", contraction=beta)

    R0 = RetractionOperator(
        target=P0, schedule=schedule, working_box=box,
        certified_C=2.0 / (1.0 - beta), alpha_hat=alpha0,
        label=f"family[{family.label}][0]")
    R0.table(probes.points)
    ops = [R0]
    if len(sets) == 1:
        return ops

    light = SamplingPlan(ball_center_count=16, hull_sample_count=16,
                         seed=plan.seed)

    if repair_contraction is None:
        # certify the repair contraction at the scale the repairs run at
        positive = [s for s in family.hausdorff_steps if s > TAU_DUP]
        if positive:
            eps_scale = max(positive) / (1.0 - alpha0)
            grid = tuple(np.geomspace(eps_scale / 16.0, eps_scale, 8))
            local_plan = SamplingPlan(radius_grid=grid, ball_center_count=32,
                                      hull_sample_count=32, seed=plan.seed)
            local_alpha = measured_alpha(P0, local_plan)
        else:
            local_alpha = alpha0
        repair_contraction = max(0.02, min(local_alpha + margin, 0.9))

    prev = R0
    for t in range(1, len(sets)):
        P_t = sets[t]
        delta = family.hausdorff_steps[t - 1]
        alpha_t = measured_alpha(P_t, light)
        if alpha_t > beta - margin:
            raise ContractionNotCertified(
                f"member at parameter {family.params[t]:.6g} measures "
                f"{alpha_t:.4g}, too nonconvex for beta {beta:.4g} with "
                f"margin {margin:.4g}")
        label = f"family[{family.label}][{t}]"
        if delta <= TAU_DUP:
            R_t = RetractionOperator(
                target=P_t, schedule=schedule, working_box=box,
                certified_C=2.0 / (1.0 - beta), alpha_hat=alpha_t,
                label=label, evaluator=prev.evaluate)
            ops.append(R_t)
            prev = R_t
            continue
        eps = delta / (1.0 - alpha0)
        F = constant_map(P_t, [np.array(p) for p in probes.points])
        sel = improve_epsilon_selection(F, prev.evaluate, eps=eps,
                                        alpha=repair_contraction,
                                        schedule=schedule)
        R_t = RetractionOperator(
            target=P_t, schedule=schedule, working_box=box,
            certified_C=2.0 / (1.0 - beta), alpha_hat=alpha_t, label=label,
            evaluator=_family_evaluator(prev, P_t, eps, repair_contraction,
                                        schedule))
        # the repaired values stand, even at probes already on the member:
        # continuity of the chain comes from staying within eps of the
        # previous operator, not from pointwise identity
        R_t.preload(probes.points, sel.values)
        ops.append(R_t)
        prev = R_t
    return ops


@dataclass(frozen=True)
class ModulusRow:
    param_lo: float
    param_hi: float
    hausdorff_step: float
    sup_dist: float
    ratio: float
    within_modulus: bool


def continuity_modulus(family: FamilyOfSets, operators, probes: ProbeGrid,
                       slack: float = 0.1):
    """Consecutive sup-distances against the 1/(1 - alpha) modulus.

    Each row records sup_dist(R_t, R_{t+1}) and the normalized ratio
    sup_dist * (1 - alpha_hat) / hausdorff_step; ``within_modulus`` flags
    rows at or below 1 + slack.
    """
    operators = list(operators)
    if len(operators) != len(family):
        raise ValueError("one operator per family member is required")
    alpha = operators[0].alpha_hat
    rows = []
    for i in range(len(operators) - 1):
        delta = family.hausdorff_steps[i]
        sd = sup_distance(operators[i], operators[i + 1], probes)
        if delta > 0.0:
            ratio = sd * (1.0 - alpha) / delta
        else:
            ratio = 0.0 if sd <= TAU_GEO else float("inf")
        rows.append(ModulusRow(
            param_lo=family.params[i], param_hi=family.params[i + 1],
            hausdorff_step=delta, sup_dist=sd, ratio=ratio,
            within_modulus=ratio <= 1.0 + slack))
    return tuple(rows)


# ---------------------------------------------------------------------------
# combining points of the target through a retraction
# ---------------------------------------------------------------------------

def sigma_convex_combination(R: RetractionOperator, ys, weights,
                             tol: float | None = None):
    """Average points of the target set and map the result through R.

    The inputs must lie on (within tol of) R's target; the output lies on
    the target again, and reduces to the plain Euclidean average whenever
    that average already belongs to the set.
    """
    ys = as_points(ys, dim=R.target.dim)
    w = as_weights(weights, n=len(ys))
    if tol is None:
        tol = TAU_GEO * max(R.target.diameter(), 1.0)
    for y in ys:
        d = set_distance(y, R.target)
        if d > tol:
            raise PreconditionFailure(
                "combination input lies off the target set",
                witness=(np.array(y), d))
    return R.evaluate(w @ ys)
