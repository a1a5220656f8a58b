"""Default tolerances and run configuration.

Every tolerance is overridable per call; the values here are the documented
defaults used throughout the package and by the command line tool.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, asdict

#: Two points closer than this are considered the same point.
TAU_DUP = 1e-12
#: Slack for geometric comparisons (containment, boundary membership).
TAU_GEO = 1e-9
#: Termination tolerance for nearest-point-in-hull computations.
TAU_PROJ = 1e-10
#: Barycentric weights must sum to one within this tolerance.
TAU_W = 1e-12
#: A paraconvexity verdict holds when the worst deficit is below this.
TAU_VERDICT = 1e-6
#: Radius inflation factor applied on an empty-intersection retry.
TAU_INFLATE = 1e-6
#: Relative iteration tolerance: absolute tol = TOL_REL * initial radius.
TOL_REL = 1e-8
#: Default margin added to a measured nonconvexity level to get a contraction.
BETA_MARGIN = 0.05
#: Working box = bounding box of the target inflated by this factor.
BOX_INFLATION = 3.0
#: Default exponent for the barycentric weighting rule.
KAPPA = 2.0
#: Hard ceiling on contraction factors so the geometric series stays finite.
BETA_CAP = 0.995

#: Environment variable naming the default output directory.
OUT_DIR_ENV = "PARACONVEX_OUT"


def default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV, "out")


@dataclass
class RunConfig:
    """Configuration for a verification or command line run."""

    seed: int = 0
    out_dir: str = field(default_factory=default_out_dir)
    density: int = 0  # 0 means: use each scene's own default
    tol_rel: float = TOL_REL
    margin: float = BETA_MARGIN
    probe_density: int = 40
    beta_override: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)
