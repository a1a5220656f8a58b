"""Command line interface.

Verbs:
  analyze    measure a scene's nonconvexity profile over a radius grid
  retract    build a retraction onto a scene and tabulate it on a grid
  space      ensemble estimate of paraconvexity in the sup metric
  family     retractions along a parameter sweep plus the continuity check
  constants  closed-form bound table for a list of levels
  verify     run the full verification suite

Exit codes: 0 success, 1 a certified check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import BETA_CAP, TOL_REL, default_out_dir
from .errors import DimensionMismatch, ParaconvexError, PreconditionFailure
from .function_space import (
    build_retraction_family,
    continuity_modulus,
    family_probe_grid,
    space_paraconvexity_report,
)
from .geometry import set_distance
from .measures import (
    SamplingPlan,
    nonconvexity_function,
    phi_and_bounds,
    threshold_root,
)
from .reporting import emit_artifacts, fmt, retraction_table, write_csv
from .retraction import build_retraction, measured_alpha
from .scenes import generate_scene, load_scene, parse_sweep, scene_family
from .verify import run_verification_suite


def _floats(text: str) -> list:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _plan(args) -> SamplingPlan:
    grid = np.asarray(args.radii_list, dtype=float) if getattr(
        args, "radii_list", None) else None
    return SamplingPlan(radius_grid=grid, seed=args.seed)


def _load(args):
    scene = load_scene(args.scene)
    return scene, generate_scene(scene, density=args.density)


def _grid_queries(box, dim: int, per_axis: int) -> np.ndarray:
    lo, hi = box
    axes = [np.linspace(lo[i], hi[i], per_axis) for i in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def cmd_analyze(args) -> int:
    args.radii_list = _floats(args.radii) if args.radii else None
    scene, cloud = _load(args)
    profile = nonconvexity_function(cloud, _plan(args))
    print(f"scene: {cloud.label} ({cloud.size} points, dim={cloud.dim})")
    for entry in profile.entries:
        if entry.attained:
            print(f"  r={entry.radius:.6g}  alpha={entry.alpha_hat:.6f}")
        else:
            print(f"  r={entry.radius:.6g}  alpha=n/a (no 2-member ball)")
    print(f"alpha_max = {profile.alpha_max:.6f}")
    paths = emit_artifacts(args.out, scene.name, profile=profile,
                           cloud=cloud if cloud.dim == 2 else None,
                           svg_title=f"{cloud.label}: scene")
    for path in sorted(paths.values()):
        print(f"wrote {path}")
    return 0


def cmd_retract(args) -> int:
    scene, cloud = _load(args)
    plan = _plan(args)
    alpha = measured_alpha(cloud, plan)
    R = build_retraction(cloud, args.beta, plan=plan, tol=args.tol,
                         alpha_hat=alpha)
    per_axis = 12 if cloud.dim == 2 else 5
    queries = _grid_queries(R.working_box, cloud.dim, per_axis)
    values = R.table(queries)
    dists = np.array([set_distance(q, cloud) for q in queries])
    moves = np.linalg.norm(values - queries, axis=1)
    if args.tol is None:
        slack = TOL_REL * 2.0 * np.maximum(dists, 1.0)
    else:
        slack = args.tol
    allowance = R.certified_C * dists + slack
    violations = int(np.sum(moves > allowance))
    residual = max(set_distance(v, cloud) for v in values)
    print(f"scene: {cloud.label} ({cloud.size} points, dim={cloud.dim})")
    print(f"alpha_hat={alpha:.6f}  beta={args.beta:.6f}  "
          f"certified C={R.certified_C:.4f}")
    print(f"queries: {len(queries)}  worst residual={residual:.3e}  "
          f"movement violations: {violations}")
    header, rows = retraction_table(cloud.label, queries, values, dists,
                                    moves)
    paths = emit_artifacts(args.out, scene.name,
                           cloud=cloud if cloud.dim == 2 else None,
                           arrows=list(zip(queries, values)),
                           tables={"retract": (header, rows)},
                           svg_title=f"{cloud.label}: retraction")
    for path in sorted(paths.values()):
        print(f"wrote {path}")
    return 1 if violations else 0


def cmd_space(args) -> int:
    scene, cloud = _load(args)
    report = space_paraconvexity_report(cloud, ensemble=args.ensemble,
                                        seed=args.seed, plan=_plan(args))
    print(f"scene: {cloud.label} ({cloud.size} points, dim={cloud.dim})")
    print(f"alpha_hat={report.alpha_hat:.6f}  ensemble={len(report.labels)}  "
          f"trials={len(report.trials)}  degenerate={report.degenerate}")
    print(f"space paraconvexity estimate = {report.estimate:.6f}")
    header = ["scene", "anchor", "subset_size", "ball_radius",
              "beta_reproject", "rho_max", "sup_dist", "certified_bound",
              "ratio", "within_certificate"]
    rows = [[cloud.label, str(t.anchor), str(len(t.subset)),
             fmt(t.ball_radius), fmt(t.beta_reproject), fmt(t.rho_max),
             fmt(t.sup_dist), fmt(t.certified_bound), fmt(t.ratio),
             "true" if t.within_certificate else "false"]
            for t in report.trials]
    os.makedirs(args.out, exist_ok=True)
    path = write_csv(os.path.join(args.out, f"{scene.name}_space.csv"),
                     header, rows)
    print(f"wrote {path}")
    bad = [t for t in report.trials if not t.within_certificate]
    if bad:
        print(f"{len(bad)} trials broke their reprojection certificate")
        return 1
    return 0


def cmd_family(args) -> int:
    scene = load_scene(args.scene)
    sweep = parse_sweep(args.sweep) if args.sweep else None
    fam = scene_family(scene, sweep=sweep, density=args.density)
    probes = family_probe_grid(fam)
    plan = _plan(args)
    if args.beta is not None:
        beta = args.beta
    else:
        alpha0 = measured_alpha(fam.sets[0], plan)
        beta = min(BETA_CAP, alpha0 + 0.5 * (1.0 - alpha0))
    ops = build_retraction_family(fam, beta, probes=probes, plan=plan)
    rows = continuity_modulus(fam, ops, probes)
    worst = max(r.ratio for r in rows) if rows else 0.0
    print(f"family: {fam.label}  steps={len(fam)}  beta={beta:.6f}")
    print(f"worst ratio sup_dist*(1-alpha)/step = {worst:.4f}")
    paths = emit_artifacts(args.out, scene.name, modulus_rows=rows,
                           modulus_label=fam.label,
                           cloud=fam.sets[0] if fam.sets[0].dim == 2 else None,
                           svg_title=f"{fam.label}: first member")
    for path in sorted(paths.values()):
        print(f"wrote {path}")
    bad = [r for r in rows if not r.within_modulus]
    if bad:
        print(f"{len(bad)} steps exceeded the continuity modulus")
        return 1
    return 0


def cmd_constants(args) -> int:
    alphas = _floats(args.alpha) if args.alpha else [k / 10.0
                                                     for k in range(10)]
    paths = emit_artifacts(args.out, "constants", constants_alphas=alphas)
    root = threshold_root()
    print(f"{'alpha':>8} {'phi':>12} {'banach':>12} {'hilbert':>12}")
    for a in alphas:
        phi, banach, hilbert = phi_and_bounds(a)
        print(f"{a:8.4f} {phi:12.8f} {banach:12.8f} {hilbert:12.8f}")
    print(f"self-improvement threshold root = {root:.12f}")
    for path in sorted(paths.values()):
        print(f"wrote {path}")
    return 0


def cmd_verify(args) -> int:
    results = run_verification_suite(seed=args.seed, out_dir=args.out,
                                     echo=print)
    passed = sum(r.passed for r in results)
    print(f"passed {passed}/{len(results)}")
    return 0 if passed == len(results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0,
                        help="seed for all randomized sampling")
    common.add_argument("--out", default=None,
                        help="output directory (default: $PARACONVEX_OUT "
                             "or ./out)")
    common.add_argument("--density", type=int, default=None,
                        help="override the scene's point count")
    common.add_argument("--tol", type=float, default=None,
                        help="iteration tolerance override")

    parser = argparse.ArgumentParser(
        prog="paraconvex",
        description="Measure nonconvexity of point scenes and build "
                    "certified retractions onto them.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("analyze", parents=[common],
                       help="nonconvexity profile of a scene")
    p.add_argument("scene", help="builtin name, JSON file, or inline JSON")
    p.add_argument("--radii", default=None,
                   help="comma separated radius grid")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("retract", parents=[common],
                       help="build and tabulate a retraction")
    p.add_argument("scene")
    p.add_argument("--beta", type=float, required=True,
                   help="contraction rate, must exceed the measured level")
    p.set_defaults(func=cmd_retract)

    p = sub.add_parser("space", parents=[common],
                       help="sup-metric paraconvexity estimate")
    p.add_argument("scene")
    p.add_argument("--ensemble", type=int, default=6,
                   help="number of retractions in the ensemble")
    p.set_defaults(func=cmd_space)

    p = sub.add_parser("family", parents=[common],
                       help="retraction family along a parameter sweep")
    p.add_argument("scene")
    p.add_argument("--sweep", default=None,
                   help="kind:start:stop:steps or a JSON object")
    p.add_argument("--beta", type=float, default=None)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("constants", parents=[common],
                       help="closed-form bound table")
    p.add_argument("--alpha", default=None,
                   help="comma separated levels (default 0.0..0.9)")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("verify", parents=[common],
                       help="run the verification suite")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out is None:
        args.out = default_out_dir()
    try:
        return args.func(args)
    except (ValueError, KeyError, TypeError, OSError, DimensionMismatch,
            PreconditionFailure) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParaconvexError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
