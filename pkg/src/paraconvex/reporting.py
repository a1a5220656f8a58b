"""CSV and SVG artifact emission.

Floats are serialized with repr(), so reading a file back recovers exact
bit patterns, and a rerun with the same seed reproduces every artifact byte
for byte.  SVG output is hand-assembled with fixed-precision coordinates.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .measures import NonconvexityProfile, phi_and_bounds, threshold_root


def fmt(x) -> str:
    return repr(float(x))


def write_csv(path: str, header, rows) -> str:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def read_csv(path: str):
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{path} is empty")
    return rows[0], rows[1:]


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------

def profile_table(profile: NonconvexityProfile):
    """Rows of the nonconvexity profile with its witness coordinates."""
    dim = 2
    for e in profile.entries:
        if e.attained:
            dim = len(np.asarray(e.witness_ball.center).ravel())
            break
    axes = "xyz"[:dim]
    header = ["scene", "r", "alpha_hat"]
    header += [f"witness_c{ax}" for ax in axes]
    header += [f"witness_q{ax}" for ax in axes]
    rows = []
    for e in profile.entries:
        row = [profile.label, fmt(e.radius)]
        if e.attained:
            row.append(fmt(e.alpha_hat))
            row.extend(fmt(v) for v in e.witness_ball.center)
            row.extend(fmt(v) for v in e.witness_point.point)
        else:
            row.extend([""] * (1 + 2 * dim))
        rows.append(row)
    return header, rows


def constants_table(alphas):
    """Upgrade factor and movement bounds per nonconvexity level."""
    root = threshold_root()
    header = ["alpha", "phi", "banach_bound", "hilbert_bound",
              "threshold_root"]
    rows = []
    for a in alphas:
        phi, banach, hilbert = phi_and_bounds(float(a))
        rows.append([fmt(a), fmt(phi), fmt(banach), fmt(hilbert), fmt(root)])
    return header, rows


def retraction_table(label: str, queries, values, dists, movements):
    queries = np.asarray(queries, dtype=float)
    values = np.asarray(values, dtype=float)
    axes = "xyz"[:queries.shape[1]]
    header = ["scene"] + [f"{ax}" for ax in axes] + [f"r{ax}" for ax in axes]
    header += ["dist_to_set", "movement"]
    rows = []
    for q, v, d, m in zip(queries, values, dists, movements):
        rows.append([label] + [fmt(c) for c in q] + [fmt(c) for c in v]
                    + [fmt(d), fmt(m)])
    return header, rows


def modulus_table(label: str, rows_in):
    header = ["family", "param_lo", "param_hi", "hausdorff_step", "sup_dist",
              "ratio", "within_modulus"]
    rows = []
    for r in rows_in:
        rows.append([label, fmt(r.param_lo), fmt(r.param_hi),
                     fmt(r.hausdorff_step), fmt(r.sup_dist), fmt(r.ratio),
                     "true" if r.within_modulus else "false"])
    return header, rows


# ---------------------------------------------------------------------------
# svg
# ---------------------------------------------------------------------------

def _c(v: float) -> str:
    return f"{v:.4f}"


class _Canvas:
    """Maps data coordinates into a fixed viewport, y pointing up."""

    def __init__(self, lo, hi, width=640.0, height=480.0, pad=40.0):
        self.width, self.height, self.pad = width, height, pad
        span = np.maximum(np.asarray(hi) - np.asarray(lo), 1e-12)
        sx = (width - 2 * pad) / span[0]
        sy = (height - 2 * pad) / span[1]
        self.scale = min(sx, sy)
        self.lo = np.asarray(lo, dtype=float)

    def xy(self, p):
        x = self.pad + (p[0] - self.lo[0]) * self.scale
        y = self.height - self.pad - (p[1] - self.lo[1]) * self.scale
        return x, y


def _svg_doc(width, height, body, title=None):
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{int(width)}" '
        f'height="{int(height)}" viewBox="0 0 {int(width)} {int(height)}">',
        f'<rect width="{int(width)}" height="{int(height)}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{int(width / 2)}" y="20" text-anchor="middle" '
            f'font-family="monospace" font-size="14">{title}</text>')
    parts.extend(body)
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def scene_svg(cloud, arrows=None, title=None) -> str:
    """Point cloud with optional displacement arrows (2D only)."""
    if cloud.dim != 2:
        raise ValueError("svg rendering is 2D only")
    pts = cloud.points
    stack = [pts]
    if arrows:
        for a, b in arrows:
            stack.append(np.asarray([a, b], dtype=float))
    allp = np.vstack(stack)
    canvas = _Canvas(allp.min(axis=0), allp.max(axis=0))
    body = []
    if cloud.support is not None:
        seg = cloud.support.boundary.segments \
            if cloud.support.kind == "region" else cloud.support.segments
        for a, b in seg:
            x1, y1 = canvas.xy(a)
            x2, y2 = canvas.xy(b)
            body.append(f'<line x1="{_c(x1)}" y1="{_c(y1)}" x2="{_c(x2)}" '
                        f'y2="{_c(y2)}" stroke="#88aacc" stroke-width="1"/>')
    for p in pts:
        x, y = canvas.xy(p)
        body.append(f'<circle cx="{_c(x)}" cy="{_c(y)}" r="1.6" '
                    'fill="#335577"/>')
    if arrows:
        for a, b in arrows:
            x1, y1 = canvas.xy(a)
            x2, y2 = canvas.xy(b)
            body.append(f'<line x1="{_c(x1)}" y1="{_c(y1)}" x2="{_c(x2)}" '
                        f'y2="{_c(y2)}" stroke="#cc5533" stroke-width="0.8"/>')
            body.append(f'<circle cx="{_c(x2)}" cy="{_c(y2)}" r="1.2" '
                        'fill="#cc5533"/>')
    return _svg_doc(640, 480, body, title=title or cloud.label)


def line_plot_svg(xs, series, title=None, hline=None) -> str:
    """Polyline plot of one or more named series over a common x grid.

    ``series`` maps a name to an array of y values; ``hline`` draws one
    dashed horizontal reference line.
    """
    xs = np.asarray(xs, dtype=float)
    names = sorted(series)
    ys_all = np.concatenate([np.asarray(series[k], dtype=float)
                             for k in names])
    if hline is not None:
        ys_all = np.append(ys_all, hline)
    lo = np.array([xs.min(), ys_all.min()])
    hi = np.array([xs.max(), ys_all.max()])
    canvas = _Canvas(lo, hi)
    colors = ["#335577", "#cc5533", "#338855", "#886633"]
    body = []
    x0, y0 = canvas.xy([lo[0], lo[1]])
    x1, y1 = canvas.xy([hi[0], hi[1]])
    body.append(f'<line x1="{_c(x0)}" y1="{_c(y0)}" x2="{_c(x1)}" '
                f'y2="{_c(y0)}" stroke="#999999" stroke-width="1"/>')
    body.append(f'<line x1="{_c(x0)}" y1="{_c(y0)}" x2="{_c(x0)}" '
                f'y2="{_c(y1)}" stroke="#999999" stroke-width="1"/>')
    if hline is not None:
        _, yh = canvas.xy([lo[0], hline])
        body.append(f'<line x1="{_c(x0)}" y1="{_c(yh)}" x2="{_c(x1)}" '
                    f'y2="{_c(yh)}" stroke="#aa3333" stroke-width="1" '
                    'stroke-dasharray="6 4"/>')
    for k, name in enumerate(names):
        ys = np.asarray(series[name], dtype=float)
        coords = " ".join(
            "{},{}".format(_c(canvas.xy([x, y])[0]), _c(canvas.xy([x, y])[1]))
            for x, y in zip(xs, ys))
        color = colors[k % len(colors)]
        body.append(f'<polyline points="{coords}" fill="none" '
                    f'stroke="{color}" stroke-width="1.5"/>')
        body.append(f'<text x="{int(50 + 130 * k)}" y="40" '
                    f'font-family="monospace" font-size="12" '
                    f'fill="{color}">{name}</text>')
    return _svg_doc(640, 480, body, title=title)


# ---------------------------------------------------------------------------
# artifact bundles
# ---------------------------------------------------------------------------

def emit_artifacts(out_dir: str, name: str, *, profile=None, cloud=None,
                   arrows=None, constants_alphas=None, modulus_rows=None,
                   modulus_label=None, tables=None, svg_title=None) -> dict:
    """Write the run's artifacts under ``out_dir`` and return their paths.

    Every input is optional; file names are derived from ``name`` so that
    distinct runs into one directory do not collide.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {}
    if profile is not None:
        header, rows = profile_table(profile)
        paths["profile_csv"] = write_csv(
            os.path.join(out_dir, f"{name}_profile.csv"), header, rows)
    if constants_alphas is not None:
        header, rows = constants_table(constants_alphas)
        paths["constants_csv"] = write_csv(
            os.path.join(out_dir, f"{name}_constants.csv"), header, rows)
    if modulus_rows is not None:
        header, rows = modulus_table(modulus_label or name, modulus_rows)
        paths["modulus_csv"] = write_csv(
            os.path.join(out_dir, f"{name}_modulus.csv"), header, rows)
        params = [r.param_hi for r in modulus_rows]
        if params:
            svg = line_plot_svg(
                params,
                {"sup_dist": [r.sup_dist for r in modulus_rows],
                 "ratio": [r.ratio for r in modulus_rows]},
                title=f"{name}: family continuity", hline=1.1)
            path = os.path.join(out_dir, f"{name}_modulus.svg")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(svg)
            paths["modulus_svg"] = path
    if cloud is not None:
        svg = scene_svg(cloud, arrows=arrows, title=svg_title)
        path = os.path.join(out_dir, f"{name}_scene.svg")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg)
        paths["scene_svg"] = path
    if tables:
        for suffix, (header, rows) in sorted(tables.items()):
            paths[suffix] = write_csv(
                os.path.join(out_dir, f"{name}_{suffix}.csv"), header, rows)
    return paths
