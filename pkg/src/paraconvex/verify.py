"""End-to-end verification of the package's certified guarantees.

Ten independent checks cover the closed-form constants, the measurement
pipeline, the retraction certificates, the sup-metric layer, and artifact
determinism.  Each produces one pass/fail line; timing budgets are part of
the checks.  All randomness is seeded, so two runs with one seed agree.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from .function_space import (
    build_retraction_family,
    continuity_modulus,
    estimate_space_paraconvexity,
    family_probe_grid,
    sigma_convex_combination,
    space_paraconvexity_report,
)
from .geometry import set_distance
from .measures import (
    SamplingPlan,
    gamma_sequence,
    nonconvexity_function,
    phi_and_bounds,
    proximity_upgrade_campaign,
    threshold_root,
)
from .oracle import brute_force_alpha_oracle
from .reporting import constants_table, emit_artifacts, fmt, retraction_table, write_csv
from .retraction import build_retraction, measured_alpha
from .scenes import Scene, generate_scene, scene_family


@dataclass
class CriterionResult:
    key: str
    description: str
    passed: bool
    elapsed: float
    budget: float
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.key}: {self.description} "
                f"({self.elapsed:.2f}s, budget {self.budget:.0f}s)")


class VerificationContext:
    """Lazily built shared artifacts so checks don't redo heavy work."""

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._cache: dict = {}

    def get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    def plan(self) -> SamplingPlan:
        return SamplingPlan(seed=self.seed)

    def semicircle(self):
        return self.get("semicircle", lambda: generate_scene("semicircle"))

    def sin_curve(self):
        return self.get("sin_curve",
                        lambda: generate_scene("sin_reciprocal"))

    def hexagon(self):
        return self.get("hexagon", lambda: generate_scene(Scene(
            name="hexagon", generator="convex_polygon",
            params={"sides": 6, "radius": 1.0}, density=700)))

    def alpha_of(self, cloud) -> float:
        return measured_alpha(cloud, self.plan())

    def margin_retraction(self, cloud):
        def build():
            alpha = self.alpha_of(cloud)
            return build_retraction(cloud, alpha + 0.05, alpha_hat=alpha)
        return self.get(("retraction", cloud.label), build)


# ---------------------------------------------------------------------------
# the checks
# ---------------------------------------------------------------------------

def check_upgrade_constants(ctx):
    worst = 0.0
    ordered = True
    for k in range(10):
        a = k / 10.0
        phi, banach, hilbert = phi_and_bounds(a)
        want_phi = math.sqrt(max(0.0, 1.0 - (1.0 - a) ** 2))
        want_banach = a / (1.0 - a)
        want_hilbert = a * (1.0 + a * a) / ((1.0 - a) * (1.0 + a))
        worst = max(worst, abs(phi - want_phi), abs(banach - want_banach),
                    abs(hilbert - want_hilbert))
        if a > 0.0 and not hilbert < banach:
            ordered = False
    ok = worst <= 1e-12 and ordered
    return ok, {"worst_error": worst, "hilbert_below_banach": ordered}


def check_threshold_root(ctx):
    a = threshold_root()
    residual = abs(a + a * a + a ** 3 - 1.0)
    ok = residual <= 1e-12 and 0.5436 < a < 0.5438 and a > 0.5
    return ok, {"root": a, "residual": residual}


def check_gamma_recursion(ctx):
    ok = True
    worst_gap = 0.0
    for g in (0.3, 0.5, 0.9):
        seq, fp = gamma_sequence(g, n_max=600)
        target = 2.0 * g * g / (1.0 + g * g)
        decreasing = bool(np.all(np.diff(seq) < 0.0))
        gap = abs(float(seq[min(len(seq) - 1, 499)]) - target)
        worst_gap = max(worst_gap, gap)
        if not decreasing or gap > 1e-9 or abs(fp - target) > 1e-12:
            ok = False
    return ok, {"worst_gap_at_500": worst_gap}


def check_convex_flatness(ctx):
    cloud = ctx.hexagon()
    profile = nonconvexity_function(cloud, ctx.plan())
    attained = [e for e in profile.entries if e.attained]
    prof_max = max((e.alpha_hat for e in attained), default=math.inf)
    est = estimate_space_paraconvexity(cloud, ensemble=6, seed=ctx.seed,
                                       alpha_hat=profile.alpha_max)
    worst_gap = 0.0
    picks = attained[::max(1, len(attained) // 4)][:4]
    for e in picks:
        o = brute_force_alpha_oracle(cloud, e.radius, center_grid=12,
                                     hull_draws=48, seed=ctx.seed)
        worst_gap = max(worst_gap, abs(o - e.alpha_hat))
    ok = (cloud.size >= 500 and len(attained) > 0 and prof_max <= 0.05
          and est <= 1e-6 and worst_gap <= 0.02)
    return ok, {"cloud_size": cloud.size, "profile_max": prof_max,
                "space_estimate": est, "worst_oracle_gap": worst_gap}


def check_retraction_certificates(ctx):
    rng = np.random.default_rng(ctx.seed)
    ok = True
    detail: dict = {}
    total = 0
    for cloud in (ctx.semicircle(), ctx.sin_curve()):
        alpha = ctx.alpha_of(cloud)
        beta = alpha + 0.05
        detail[f"{cloud.label}_alpha"] = alpha
        if not beta < 1.0:
            detail["error"] = "no contraction rate below one"
            return False, detail
        R = ctx.margin_retraction(cloud)
        identity_exact = bool(np.array_equal(R.table(cloud.points),
                                             cloud.points))
        lo, hi = R.working_box
        queries = rng.uniform(lo, hi, size=(600, cloud.dim))
        diam = cloud.diameter()
        big_c = 2.0 / (1.0 - beta)
        worst_res = worst_move = worst_decay = 0.0
        for x in queries:
            d = set_distance(x, cloud)
            out, trace = R.evaluate_with_trace(x)
            worst_res = max(worst_res, set_distance(out, cloud))
            if d > R.mem_tol and trace is not None:
                move = float(np.linalg.norm(out - x))
                worst_move = max(worst_move, move / (big_c * d))
                steps = trace.step_norms
                if len(steps):
                    geo = steps / ((beta ** np.arange(len(steps))) * (2.0 * d))
                    worst_decay = max(worst_decay, float(geo.max()))
        total += len(queries)
        detail[f"{cloud.label}_identity_exact"] = identity_exact
        detail[f"{cloud.label}_worst_residual"] = worst_res
        detail[f"{cloud.label}_worst_move_ratio"] = worst_move
        detail[f"{cloud.label}_worst_step_decay"] = worst_decay
        ok = ok and identity_exact and worst_res <= 1e-6 * diam \
            and worst_move <= 1.0 + 1e-3 and worst_decay <= 1.0 + 1e-6
    detail["queries"] = total
    return ok and total >= 1000, detail


def check_upgrade_campaign(ctx):
    out = proximity_upgrade_campaign(10_000, seed=ctx.seed, slack=1e-6)
    ok = out["violations"] == 0 and out["trials"] == 10_000
    return ok, out


def check_function_balls(ctx):
    cloud = ctx.semicircle()
    alpha = ctx.alpha_of(cloud)
    report = space_paraconvexity_report(cloud, ensemble=6, seed=ctx.seed,
                                        alpha_hat=alpha)
    cert_ok = True
    worst_excess = -math.inf
    for t in report.trials:
        limit = t.beta_reproject / (1.0 - t.beta_reproject) * t.rho_max + 1e-6
        excess = t.sup_dist - limit
        worst_excess = max(worst_excess, excess)
        if excess > 0.0:
            cert_ok = False
    aggregate_limit = alpha / (1.0 - alpha) + 0.1
    ok = (len(report.trials) > 0 and cert_ok
          and report.estimate <= aggregate_limit)
    return ok, {"alpha_hat": alpha, "trials": len(report.trials),
                "estimate": report.estimate,
                "aggregate_limit": aggregate_limit,
                "worst_certificate_excess": worst_excess}


def check_family_modulus(ctx):
    scene = Scene(name="semicircle", generator="semicircle", density=400)
    sweep = {"kind": "rotation", "start": 0.0, "stop": math.pi / 2.0,
             "steps": 50}
    fam = scene_family(scene, sweep=sweep)
    probes = family_probe_grid(fam)
    plan = ctx.plan()
    alpha0 = measured_alpha(fam.sets[0], plan)
    beta = alpha0 + 0.5 * (1.0 - alpha0)
    ops = build_retraction_family(fam, beta, probes=probes, plan=plan)
    rows = continuity_modulus(fam, ops, probes)
    worst_ratio = max(r.ratio for r in rows)
    sup_max = max(r.sup_dist for r in rows)

    refined = dict(sweep)
    refined["steps"] = 99  # doubles the interval count, halving each step
    fam2 = scene_family(scene, sweep=refined)
    ops2 = build_retraction_family(fam2, beta, probes=probes, plan=plan)
    rows2 = continuity_modulus(fam2, ops2, probes)
    worst_ratio2 = max(r.ratio for r in rows2)
    sup_max2 = max(r.sup_dist for r in rows2)

    ok = worst_ratio <= 1.1 and worst_ratio2 <= 1.1 and sup_max2 < sup_max
    return ok, {"alpha0": alpha0, "beta": beta,
                "worst_ratio": worst_ratio, "sup_max": sup_max,
                "worst_ratio_refined": worst_ratio2,
                "sup_max_refined": sup_max2}


def check_set_averaging(ctx):
    cloud = ctx.semicircle()
    R = ctx.margin_retraction(cloud)
    rng = np.random.default_rng(ctx.seed)
    worst = 0.0
    for _ in range(1000):
        k = int(rng.integers(1, 5))
        idx = rng.choice(cloud.size, size=k, replace=False)
        w = rng.dirichlet(np.ones(k))
        out = sigma_convex_combination(R, cloud.points[idx], w)
        worst = max(worst, set_distance(out, cloud))

    hexagon = ctx.hexagon()
    Rh = ctx.get("retraction-hexagon",
                 lambda: build_retraction(hexagon, 0.5,
                                          alpha_hat=ctx.alpha_of(hexagon)))
    euclidean_exact = True
    for _ in range(200):
        k = int(rng.integers(2, 6))
        idx = rng.choice(hexagon.size, size=k, replace=False)
        ys = hexagon.points[idx]
        w = rng.dirichlet(np.ones(k))
        out = sigma_convex_combination(Rh, ys, w)
        wn = np.clip(w, 0.0, None)
        wn = wn / wn.sum()
        if not np.array_equal(out, wn @ ys):
            euclidean_exact = False
    ok = worst <= 1e-6 and euclidean_exact
    return ok, {"draws": 1000, "worst_off_set": worst,
                "euclidean_exact": euclidean_exact}


def check_deterministic_artifacts(ctx):
    snapshots = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as tmp:
            seg = generate_scene("segment", density=120)
            # light plan: byte identity is what is under test, not precision
            plan = SamplingPlan(radius_grid=tuple(np.geomspace(0.1, 1.5, 8)),
                                ball_center_count=48, hull_sample_count=32,
                                seed=ctx.seed)
            profile = nonconvexity_function(seg, plan)
            R = build_retraction(seg, 0.5, plan=plan)
            lo, hi = R.working_box
            qs = np.linspace(lo, hi, 25)
            vals = R.table(qs)
            dists = [set_distance(q, seg) for q in qs]
            moves = np.linalg.norm(vals - qs, axis=1)
            header, rows = retraction_table(seg.label, qs, vals, dists, moves)
            paths = emit_artifacts(
                tmp, "verify", profile=profile, cloud=seg,
                arrows=list(zip(qs, vals)),
                constants_alphas=[k / 10.0 for k in range(10)],
                tables={"retract": (header, rows)})
            snap = {}
            for path in paths.values():
                with open(path, "rb") as fh:
                    snap[os.path.basename(path)] = fh.read()
            snapshots.append(snap)
    ok = snapshots[0] == snapshots[1]
    return ok, {"files": len(snapshots[0]), "identical": ok}


CRITERIA = (
    ("upgrade-constants",
     "closed-form upgrade factor and movement bounds", 1.0,
     check_upgrade_constants),
    ("threshold-root",
     "self-improvement threshold root brackets", 1.0,
     check_threshold_root),
    ("gamma-recursion",
     "decreasing gamma recursion reaches its fixed point", 1.0,
     check_gamma_recursion),
    ("convex-flatness",
     "filled convex scene measures flat at every radius", 120.0,
     check_convex_flatness),
    ("retraction-certificates",
     "identity, residual, movement, and step-decay bounds", 300.0,
     check_retraction_certificates),
    ("upgrade-campaign",
     "randomized in-ball proximity upgrade bound", 120.0,
     check_upgrade_campaign),
    ("function-balls",
     "combination reprojection certificates and space estimate", 600.0,
     check_function_balls),
    ("family-modulus",
     "rotating family tracks the continuity modulus", 600.0,
     check_family_modulus),
    ("set-averaging",
     "averaging through the retraction stays on the set", 60.0,
     check_set_averaging),
    ("deterministic-artifacts",
     "artifact bytes identical across reruns", 120.0,
     check_deterministic_artifacts),
)


def _detail_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt(float(value))
    return str(value)


def write_suite_artifacts(results, out_dir: str, seed: int = 0) -> dict:
    """Deterministic CSVs for a suite run (timings deliberately excluded)."""
    os.makedirs(out_dir, exist_ok=True)
    header = ["criterion", "passed", "detail"]
    rows = []
    for r in results:
        blob = ";".join(f"{k}={_detail_cell(v)}"
                        for k, v in sorted(r.detail.items()))
        rows.append([r.key, "true" if r.passed else "false", blob])
    paths = {"results_csv": write_csv(
        os.path.join(out_dir, "verify_results.csv"), header, rows)}
    header, rows = constants_table([k / 10.0 for k in range(10)])
    paths["constants_csv"] = write_csv(
        os.path.join(out_dir, "verify_constants.csv"), header, rows)
    return paths


def run_verification_suite(seed: int = 0, out_dir: str | None = None,
                           selected=None, echo=None):
    """Run the checks, one CriterionResult each, optionally writing CSVs.

    ``selected`` restricts to a subset of criterion keys; ``echo`` (e.g.
    print) receives one formatted line per criterion as it finishes.
    A crash inside a check is recorded as a failure, not raised.
    """
    ctx = VerificationContext(seed=seed)
    results = []
    for key, desc, budget, fn in CRITERIA:
        if selected is not None and key not in selected:
            continue
        t0 = time.perf_counter()
        try:
            passed, detail = fn(ctx)
        except Exception as exc:
            passed, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        elapsed = time.perf_counter() - t0
        if elapsed > budget:
            passed = False
            detail = dict(detail)
            detail["over_budget"] = True
        result = CriterionResult(key=key, description=desc, passed=passed,
                                 elapsed=elapsed, budget=budget,
                                 detail=detail)
        results.append(result)
        if echo is not None:
            echo(result.line())
    if out_dir is not None:
        write_suite_artifacts(results, out_dir, seed=seed)
    return results
