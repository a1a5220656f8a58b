"""Uniform retractions onto a paraconvex point cloud.

An operator is the identity on the target set and otherwise drives the query
point onto the set with the shrinking-ball loop started at radius twice the
query's distance.  With contraction level beta the total displacement is
bounded by C * d(x) for C = 2/(1-beta), which is the operator's certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import BOX_INFLATION, KAPPA, TAU_DUP
from .errors import ContractionNotCertified, PreconditionFailure
from .geometry import PointCloud, inflated_box, set_distance
from .measures import SamplingPlan, nonconvexity_function
from .selection import IterationSchedule, iterate_to_member
from .validation import as_point


def measured_alpha(cloud: PointCloud, plan: SamplingPlan | None = None) -> float:
    """Profile-maximum nonconvexity estimate, cached per (cloud, plan)."""
    plan = plan or SamplingPlan()
    cache = getattr(cloud, "_alpha_cache", None)
    if cache is None:
        cache = {}
        cloud._alpha_cache = cache
    key = (plan.radius_grid, plan.ball_center_count, plan.hull_sample_count,
           plan.seed)
    if key not in cache:
        cache[key] = nonconvexity_function(cloud, plan).alpha_max
    return cache[key]


class RetractionOperator:
    """Deterministic evaluable retraction of a working box onto a point cloud.

    Evaluation is memoized by the query's bit pattern, so repeated calls are
    identical by construction.  ``certified_C`` is 2/(1-beta); every
    evaluation satisfies dist(x, R(x)) <= certified_C * d(x) + tol.
    """

    def __init__(self, target: PointCloud, schedule: IterationSchedule,
                 working_box, certified_C: float, alpha_hat: float,
                 label: str = "retraction", evaluator=None,
                 on_starve: str = "raise"):
        self.target = target
        self.schedule = schedule
        self.working_box = (np.asarray(working_box[0], dtype=float),
                            np.asarray(working_box[1], dtype=float))
        self.certified_C = float(certified_C)
        self.alpha_hat = float(alpha_hat)
        self.label = label
        self.mem_tol = TAU_DUP
        self._evaluator = evaluator
        self._on_starve = on_starve
        self._memo: dict = {}
        self.starved_probes = 0

    # -- core evaluation ----------------------------------------------------

    def _check_box(self, x):
        lo, hi = self.working_box
        if np.any(x < lo - 1e-12) or np.any(x > hi + 1e-12):
            raise PreconditionFailure("query outside the working box",
                                      witness=x)

    def _evaluate_fresh(self, x):
        if self.target.size == 1:
            return np.array(self.target.points[0]), None
        d = set_distance(x, self.target)
        if d <= self.mem_tol:
            return np.array(x), None
        out, trace = iterate_to_member(self.target, x, 2.0 * d, self.schedule,
                                       on_starve=self._on_starve)
        if not trace.converged:
            self.starved_probes += 1
        return out, trace

    def evaluate(self, x):
        x = as_point(x, dim=self.target.dim)
        self._check_box(x)
        key = x.tobytes()
        if key not in self._memo:
            if self._evaluator is not None:
                out = as_point(self._evaluator(x), dim=self.target.dim)
            else:
                out, _ = self._evaluate_fresh(x)
            self._memo[key] = out
        return np.array(self._memo[key])

    def evaluate_with_trace(self, x):
        """Unmemoized evaluation returning (point, SelectionTrace or None)."""
        x = as_point(x, dim=self.target.dim)
        self._check_box(x)
        if self._evaluator is not None:
            return self.evaluate(x), None
        out, trace = self._evaluate_fresh(x)
        self._memo.setdefault(x.tobytes(), out)
        return out, trace

    def __call__(self, x):
        return self.evaluate(x)

    def table(self, points) -> np.ndarray:
        """Evaluate on an array of points (memoized row by row)."""
        pts = np.asarray(points, dtype=float)
        return np.asarray([self.evaluate(p) for p in pts])

    def preload(self, points, values) -> None:
        """Seed the memo with known (point, value) rows."""
        pts = np.asarray(points, dtype=float)
        vals = np.asarray(values, dtype=float)
        for p, v in zip(pts, vals):
            self._memo[np.ascontiguousarray(p).tobytes()] = np.array(v)


def build_retraction(P: PointCloud, beta: float,
                     box_inflation: float = BOX_INFLATION,
                     kappa: float = KAPPA,
                     alpha_hat: float | None = None,
                     plan: SamplingPlan | None = None,
                     tol: float | None = None,
                     label: str | None = None) -> RetractionOperator:
    """Construct the shrinking-ball retraction onto P at contraction beta.

    beta must strictly exceed the measured nonconvexity of P (measured here
    unless ``alpha_hat`` is supplied by the caller); otherwise the geometric
    contraction certificate fails and ContractionNotCertified is raised.
    A singleton target yields the constant map, the only retraction.
    """
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    if P.size == 1:
        schedule = IterationSchedule(mode="banach", contraction=beta,
                                     kappa=kappa, tol=tol)
        return RetractionOperator(
            target=P, schedule=schedule, working_box=inflated_box(P, box_inflation),
            certified_C=2.0 / (1.0 - beta), alpha_hat=0.0,
            label=label or f"const[{P.label}]",
        )
    if alpha_hat is None:
        alpha_hat = measured_alpha(P, plan)
    if beta <= alpha_hat:
        raise ContractionNotCertified(
            f"beta {beta:.6g} does not exceed measured nonconvexity "
            f"{alpha_hat:.6g} of {P.label}"
        )
    schedule = IterationSchedule(mode="banach", contraction=beta, kappa=kappa,
                                 tol=tol)
    return RetractionOperator(
        target=P,
        schedule=schedule,
        working_box=inflated_box(P, box_inflation),
        certified_C=2.0 / (1.0 - beta),
        alpha_hat=alpha_hat,
        label=label or f"retract[{P.label},b={beta:.4g},k={kappa:g}]",
    )


def eval_retraction(R: RetractionOperator, x):
    """Evaluate the operator at one point (identity on the target set)."""
    return R.evaluate(x)


@dataclass(frozen=True)
class UniformityReport:
    """Empirical uniformity table and the near-target Lipschitz check.

    Each row (eps, delta) reports the largest tested distance delta such
    that every sampled query within delta of the set moved by less than eps.
    ``lipschitz_at_P_ratio`` is the max of dist(x0, R(x)) / dist(x0, x) over
    sampled pairs with x0 in the set; it must stay below (1 + C) * (1 + slack).
    """

    table: tuple
    lipschitz_at_P_ratio: float
    lipschitz_bound: float
    lipschitz_ok: bool
    sample_count: int
    seed: int


def retraction_diagnostics(R: RetractionOperator, eps_grid,
                           sample_count: int = 400, seed: int = 0,
                           slack: float = 0.01) -> UniformityReport:
    """Sample the working box and tabulate uniformity moduli for the operator."""
    eps_grid = [float(e) for e in eps_grid]
    if any(e <= 0 for e in eps_grid):
        raise ValueError("eps grid must be positive")
    rng = np.random.default_rng(seed)
    lo, hi = R.working_box
    queries = rng.uniform(lo, hi, size=(sample_count, len(lo)))
    dists = np.empty(sample_count)
    moves = np.empty(sample_count)
    lip = 0.0
    for i, x in enumerate(queries):
        out = R.evaluate(x)
        dists[i] = set_distance(x, R.target)
        moves[i] = float(np.linalg.norm(out - x))
        j = int(R.target.tree.query(x)[1])
        x0 = R.target.points[j]
        gap = float(np.linalg.norm(x - x0))
        if gap > 0:
            lip = max(lip, float(np.linalg.norm(out - x0)) / gap)
    order = np.argsort(dists)
    d_sorted = dists[order]
    running = np.maximum.accumulate(moves[order])
    rows = []
    for eps in eps_grid:
        bad = np.flatnonzero(running >= eps)
        if len(bad) == 0:
            delta = float(d_sorted[-1]) * (1.0 + 1e-9)
        else:
            # queries with d strictly below the first offender's d all moved
            # by less than eps; identity on the set keeps this positive
            delta = float(d_sorted[bad[0]])
            if delta <= 0.0:
                delta = R.mem_tol
        rows.append((float(eps), float(delta)))
    bound = (1.0 + R.certified_C) * (1.0 + slack)
    return UniformityReport(
        table=tuple(rows),
        lipschitz_at_P_ratio=lip,
        lipschitz_bound=bound,
        lipschitz_ok=lip <= bound,
        sample_count=sample_count,
        seed=seed,
    )
