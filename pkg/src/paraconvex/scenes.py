"""Deterministic scene generators and their JSON descriptions.

A scene names a generator, its parameters, a sampling density, an optional
rigid transform, and an optional family sweep.  Generation never consults a
random source, so the same description always yields bit-identical clouds.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .config import TAU_DUP
from .function_space import FamilyOfSets, make_family
from .geometry import (
    ConvexRegionSupport,
    PointCloud,
    PolylineSupport,
    rigid_motion,
    rotation_matrix_2d,
)

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def _dedupe(points, tol=TAU_DUP):
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return pts
    keep = np.ones(len(pts), dtype=bool)
    for i, j in sorted(cKDTree(pts).query_pairs(tol)):
        if keep[i]:
            keep[j] = False
    return pts[keep]


def _chain_segments(points, closed=False):
    pts = np.asarray(points, dtype=float)
    nxt = np.roll(pts, -1, axis=0) if closed else pts[1:]
    cur = pts if closed else pts[:-1]
    return np.stack([cur, nxt], axis=1)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def gen_segment(params, density):
    a = np.asarray(params.get("a", (0.0, 0.0)), dtype=float)
    b = np.asarray(params.get("b", (1.0, 0.0)), dtype=float)
    if np.allclose(a, b):
        raise ValueError("segment endpoints coincide")
    t = np.linspace(0.0, 1.0, max(density, 2))
    pts = a[None, :] + t[:, None] * (b - a)[None, :]
    support = PolylineSupport(np.asarray([[a, b]]))
    return pts, support


def _polygon_vertices(params):
    if "vertices" in params:
        verts = np.asarray(params["vertices"], dtype=float)
        if verts.ndim != 2 or len(verts) < 3:
            raise ValueError("vertices must list at least three 2D points")
        return verts
    sides = int(params.get("sides", 6))
    radius = float(params.get("radius", 1.0))
    if sides < 3 or radius <= 0.0:
        raise ValueError("polygon needs sides >= 3 and radius > 0")
    ang = 2.0 * math.pi * np.arange(sides) / sides
    return radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def gen_convex_polygon(params, density):
    """Filled convex polygon: boundary samples plus an interior grid."""
    verts = _polygon_vertices(params)
    support = ConvexRegionSupport(verts)
    sides = len(verts)
    per_edge = max(2, int(round(0.25 * density / sides)))
    edges = []
    for i in range(sides):
        a, b = verts[i], verts[(i + 1) % sides]
        t = np.arange(per_edge) / per_edge
        edges.append(a[None, :] + t[:, None] * (b - a)[None, :])
    boundary = np.vstack(edges)
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    m = max(3, int(math.ceil(math.sqrt(density))))
    for _ in range(8):
        xs = np.linspace(lo[0], hi[0], m)
        ys = np.linspace(lo[1], hi[1], m)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        grid = np.stack([gx.ravel(), gy.ravel()], axis=1)
        inside = np.asarray([support.contains(q, tol=-1e-9) for q in grid])
        pts = _dedupe(np.vstack([boundary, grid[inside]]))
        if len(pts) >= density:
            break
        m = int(math.ceil(m * 1.4)) + 1
    return pts, support


def gen_disk_sample(params, density):
    """Sunflower layout filling a disk; no random source involved."""
    radius = float(params.get("radius", 1.0))
    center = np.asarray(params.get("center", (0.0, 0.0)), dtype=float)
    if radius <= 0.0:
        raise ValueError("disk radius must be positive")
    n = max(density, 8)
    i = np.arange(n)
    r = radius * np.sqrt((i + 0.5) / n)
    th = i * GOLDEN_ANGLE
    pts = center[None, :] + np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    return pts, ConvexRegionSupport(pts)


def gen_circle_arc(params, density):
    angle = float(params.get("angle", 0.5 * math.pi))
    radius = float(params.get("radius", 1.0))
    center = np.asarray(params.get("center", (0.0, 0.0)), dtype=float)
    start = float(params.get("start_angle", 0.0))
    if radius <= 0.0:
        raise ValueError("arc radius must be positive")
    if not (0.0 < angle <= 2.0 * math.pi + 1e-12):
        raise ValueError("arc angle must lie in (0, 2*pi]")
    closed = angle >= 2.0 * math.pi - 1e-12
    n = max(density, 8)
    th = np.linspace(start, start + angle, n, endpoint=not closed)
    pts = center[None, :] + radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    return pts, PolylineSupport(_chain_segments(pts, closed=closed))


def gen_semicircle(params, density):
    merged = dict(params)
    merged["angle"] = math.pi
    return gen_circle_arc(merged, density)


def gen_sin_reciprocal(params, density):
    x_min = float(params.get("x_min", 0.05))
    x_max = float(params.get("x_max", 1.0))
    if not (0.0 < x_min < x_max):
        raise ValueError("need 0 < x_min < x_max")
    n = max(density, 16)
    # equal arc-length spacing: uniform x would leave huge gaps where the
    # curve oscillates fast, starving ball queries near x_min
    xf = np.linspace(x_min, x_max, max(20 * n, 20000))
    yf = np.sin(1.0 / xf)
    seg = np.hypot(np.diff(xf), np.diff(yf))
    s = np.concatenate([[0.0], np.cumsum(seg)])
    si = np.linspace(0.0, s[-1], n)
    x = np.interp(si, s, xf)
    pts = np.stack([x, np.sin(1.0 / x)], axis=1)
    return pts, PolylineSupport(_chain_segments(pts))


def gen_spiral(params, density):
    turns = float(params.get("turns", 2.0))
    a = float(params.get("a", 0.05))
    b = float(params.get("b", 0.12))
    center = np.asarray(params.get("center", (0.0, 0.0)), dtype=float)
    if turns <= 0.0 or b <= 0.0 or a < 0.0:
        raise ValueError("spiral needs turns > 0, b > 0, a >= 0")
    th = np.linspace(0.0, 2.0 * math.pi * turns, max(density, 16))
    r = a + b * th
    pts = center[None, :] + np.stack([r * np.cos(th), r * np.sin(th)], axis=1)
    return pts, PolylineSupport(_chain_segments(pts))


def gen_two_points(params, density):
    a = np.asarray(params.get("a", (-1.0, 0.0)), dtype=float)
    b = np.asarray(params.get("b", (1.0, 0.0)), dtype=float)
    if np.allclose(a, b):
        raise ValueError("the two points coincide")
    return np.stack([a, b]), None


def gen_custom_points(params, density):
    if "points" not in params:
        raise ValueError("custom_points requires a 'points' list")
    pts = np.asarray(params["points"], dtype=float)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3) or len(pts) < 1:
        raise ValueError("points must be an (n, 2) or (n, 3) array")
    return pts, None


GENERATORS = {
    "segment": gen_segment,
    "convex_polygon": gen_convex_polygon,
    "disk_sample": gen_disk_sample,
    "circle_arc": gen_circle_arc,
    "semicircle": gen_semicircle,
    "sin_reciprocal": gen_sin_reciprocal,
    "spiral": gen_spiral,
    "two_points": gen_two_points,
    "custom_points": gen_custom_points,
}

DEFAULT_DENSITY = {
    "segment": 200,
    "convex_polygon": 600,
    "disk_sample": 500,
    "circle_arc": 300,
    "semicircle": 400,
    "sin_reciprocal": 1200,
    "spiral": 500,
    "two_points": 2,
    "custom_points": 0,
}


# ---------------------------------------------------------------------------
# scene descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scene:
    """Declarative description of a point cloud to generate."""

    name: str
    generator: str
    params: dict = field(default_factory=dict)
    density: int | None = None
    transform: dict | None = None
    family_sweep: dict | None = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "generator": self.generator,
               "params": dict(self.params)}
        if self.density is not None:
            out["density"] = self.density
        if self.transform is not None:
            out["transform"] = dict(self.transform)
        if self.family_sweep is not None:
            out["family_sweep"] = dict(self.family_sweep)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def scene_from_dict(data: dict) -> Scene:
    if not isinstance(data, dict):
        raise ValueError("scene description must be a JSON object")
    if "generator" not in data:
        raise ValueError("scene description lacks a 'generator'")
    gen = str(data["generator"])
    if gen not in GENERATORS:
        raise ValueError(f"unknown generator {gen!r}; choose from "
                         f"{sorted(GENERATORS)}")
    density = data.get("density")
    if density is not None:
        density = int(density)
        if density < 1:
            raise ValueError("density must be a positive integer")
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ValueError("params must be an object")
    transform = data.get("transform")
    if transform is not None and not isinstance(transform, dict):
        raise ValueError("transform must be an object")
    sweep = data.get("family_sweep")
    if sweep is not None and not isinstance(sweep, dict):
        raise ValueError("family_sweep must be an object")
    return Scene(name=str(data.get("name", gen)), generator=gen,
                 params=dict(params), density=density,
                 transform=dict(transform) if transform else None,
                 family_sweep=dict(sweep) if sweep else None)


def load_scene(source: str) -> Scene:
    """Resolve a scene from a JSON file path, inline JSON, or builtin name."""
    if os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            return scene_from_dict(json.load(fh))
    stripped = source.strip()
    if stripped.startswith("{"):
        return scene_from_dict(json.loads(stripped))
    if stripped in GENERATORS:
        if stripped == "custom_points":
            raise ValueError("custom_points needs an explicit description "
                             "with a 'points' list")
        return Scene(name=stripped, generator=stripped)
    raise ValueError(f"no scene file, JSON object, or builtin named {source!r}")


def _transform_fn(transform: dict, dim: int):
    rot = transform.get("rotation")
    if rot is not None:
        if dim != 2:
            raise ValueError("rotation transforms are 2D only")
        rot = rotation_matrix_2d(float(rot))
    translation = transform.get("translation")
    if translation is not None:
        translation = np.asarray(translation, dtype=float)
        if translation.shape != (dim,):
            raise ValueError("translation has the wrong dimension")
    scale = float(transform.get("scale", 1.0))
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    return rigid_motion(rotation=rot, translation=translation, scale=scale)


def generate_scene(scene, density: int | None = None) -> PointCloud:
    """Build the scene's point cloud; bit-identical for identical inputs."""
    if isinstance(scene, str):
        scene = load_scene(scene)
    n = density if density is not None else scene.density
    if n is None:
        n = DEFAULT_DENSITY[scene.generator]
    pts, support = GENERATORS[scene.generator](scene.params, n)
    cloud = PointCloud(pts, label=scene.name, support=support)
    if scene.transform:
        cloud = cloud.transformed(_transform_fn(scene.transform, cloud.dim))
    return cloud


# ---------------------------------------------------------------------------
# family sweeps
# ---------------------------------------------------------------------------

def parse_sweep(text: str) -> dict:
    """Parse 'kind:start:stop:steps' (or a JSON object) into a sweep."""
    stripped = text.strip()
    if stripped.startswith("{"):
        sweep = json.loads(stripped)
        if not isinstance(sweep, dict):
            raise ValueError("sweep JSON must be an object")
        return sweep
    parts = stripped.split(":")
    if len(parts) != 4:
        raise ValueError("sweep must be 'kind:start:stop:steps' or JSON")
    return {"kind": parts[0], "start": float(parts[1]),
            "stop": float(parts[2]), "steps": int(parts[3])}


def scene_family(scene, sweep: dict | None = None,
                 density: int | None = None) -> FamilyOfSets:
    """Sweep a scene's transform parameter into a family of point clouds."""
    if isinstance(scene, str):
        scene = load_scene(scene)
    sweep = sweep if sweep is not None else scene.family_sweep
    if sweep is None:
        raise ValueError("scene has no family_sweep and none was given")
    kind = sweep.get("kind", "rotation")
    steps = int(sweep.get("steps", 0))
    if steps < 2:
        raise ValueError("sweep needs at least 2 steps")
    start = float(sweep.get("start", 0.0))
    stop = float(sweep.get("stop", 1.0))
    if not stop > start:
        raise ValueError("sweep needs stop > start")
    base = generate_scene(scene, density=density)
    params = np.linspace(start, stop, steps)
    about = np.asarray(sweep.get("about", np.zeros(base.dim)), dtype=float)
    if about.shape != (base.dim,):
        raise ValueError("sweep 'about' has the wrong dimension")
    direction = None
    if kind == "translation":
        direction = np.asarray(sweep.get("direction", [1.0] + [0.0] * (base.dim - 1)),
                               dtype=float)
        if direction.shape != (base.dim,):
            raise ValueError("sweep 'direction' has the wrong dimension")

    members = []
    for t in params:
        if kind == "rotation":
            if base.dim != 2:
                raise ValueError("rotation sweeps are 2D only")
            R = rotation_matrix_2d(float(t))
            fn = rigid_motion(rotation=R, translation=about - R @ about)
        elif kind == "translation":
            fn = rigid_motion(translation=float(t) * direction)
        elif kind == "scale":
            s = float(t)
            if s <= 0.0:
                raise ValueError("scale sweep values must stay positive")
            fn = rigid_motion(scale=s, translation=(1.0 - s) * about)
        else:
            raise ValueError(f"unknown sweep kind {kind!r}")
        members.append(base.transformed(fn, label=f"{scene.name}[t={t:.6g}]"))
    return make_family(params, members, label=f"{scene.name}:{kind}")
