"""Nonconvexity measurement and certified retractions for point scenes.

The package measures how far a finite point set is from being convex at
every scale, certifies paraconvexity levels, and builds uniformly continuous
retractions of a working box onto the set, including onto balls of such
retractions in the sup metric and along continuously varying families.
"""

from .config import (
    BETA_CAP,
    BETA_MARGIN,
    BOX_INFLATION,
    KAPPA,
    RunConfig,
    TAU_DUP,
    TAU_GEO,
    TAU_PROJ,
    TAU_VERDICT,
    TOL_REL,
    default_out_dir,
)
from .errors import (
    ContractionNotCertified,
    ConvergenceFailure,
    DimensionMismatch,
    EmptyIntersection,
    ParaconvexError,
    ParaconvexityWarning,
    PreconditionFailure,
)
from .geometry import (
    Ball,
    ConvexRegionSupport,
    EnclosingBall,
    HullPoint,
    PointCloud,
    PolylineSupport,
    dist_to_cloud,
    hausdorff_distance,
    inflated_box,
    members_in_ball,
    members_in_ball_indices,
    min_enclosing_ball,
    nearest_on_set,
    project_to_hull,
    rigid_motion,
    rotation_matrix_2d,
    set_distance,
)
from .measures import (
    NonconvexityProfile,
    ParaconvexityVerdict,
    ProfileEntry,
    ProximityUpgradeReport,
    SamplingPlan,
    check_paraconvexity,
    gamma_fixed_point,
    gamma_sequence,
    nonconvexity_function,
    phi_and_bounds,
    proximity_upgrade_campaign,
    relative_precision,
    threshold_root,
    verify_proximity_upgrade,
)
from .selection import (
    ImprovedSelection,
    IterationSchedule,
    SelectionTrace,
    SetValuedMap,
    bary_select,
    constant_map,
    improve_epsilon_selection,
    iterate_to_member,
)
from .retraction import (
    RetractionOperator,
    UniformityReport,
    build_retraction,
    eval_retraction,
    measured_alpha,
    retraction_diagnostics,
)
from .function_space import (
    CombinationTrial,
    FamilyOfSets,
    FunctionOnBox,
    ModulusRow,
    ProbeGrid,
    SpaceParaconvexityReport,
    as_function,
    build_retraction_family,
    combine_retractions,
    continuity_modulus,
    estimate_space_paraconvexity,
    family_probe_grid,
    make_family,
    make_probe_grid,
    reproject_to_retraction,
    sigma_convex_combination,
    space_paraconvexity_report,
    sup_distance,
)
from .scenes import (
    GENERATORS,
    Scene,
    generate_scene,
    load_scene,
    parse_sweep,
    scene_family,
    scene_from_dict,
)
from .oracle import brute_force_alpha_oracle
from .estimators import NonconvexityEstimator, UniformRetraction
from .reporting import emit_artifacts, read_csv, write_csv
from .verify import CRITERIA, CriterionResult, run_verification_suite

__version__ = "0.1.0"

__all__ = [
    "BETA_CAP", "BETA_MARGIN", "BOX_INFLATION", "KAPPA", "RunConfig",
    "TAU_DUP", "TAU_GEO", "TAU_PROJ", "TAU_VERDICT", "TOL_REL",
    "default_out_dir",
    "ContractionNotCertified", "ConvergenceFailure", "DimensionMismatch",
    "EmptyIntersection", "ParaconvexError", "ParaconvexityWarning",
    "PreconditionFailure",
    "Ball", "ConvexRegionSupport", "EnclosingBall", "HullPoint",
    "PointCloud", "PolylineSupport", "dist_to_cloud", "hausdorff_distance",
    "inflated_box", "members_in_ball", "members_in_ball_indices",
    "min_enclosing_ball", "nearest_on_set", "project_to_hull",
    "rigid_motion", "rotation_matrix_2d", "set_distance",
    "NonconvexityProfile", "ParaconvexityVerdict", "ProfileEntry",
    "ProximityUpgradeReport", "SamplingPlan", "check_paraconvexity",
    "gamma_fixed_point", "gamma_sequence", "nonconvexity_function",
    "phi_and_bounds", "proximity_upgrade_campaign", "relative_precision",
    "threshold_root", "verify_proximity_upgrade",
    "ImprovedSelection", "IterationSchedule", "SelectionTrace",
    "SetValuedMap", "bary_select", "constant_map",
    "improve_epsilon_selection", "iterate_to_member",
    "RetractionOperator", "UniformityReport", "build_retraction",
    "eval_retraction", "measured_alpha", "retraction_diagnostics",
    "CombinationTrial", "FamilyOfSets", "FunctionOnBox", "ModulusRow",
    "ProbeGrid", "SpaceParaconvexityReport", "as_function",
    "build_retraction_family", "combine_retractions", "continuity_modulus",
    "estimate_space_paraconvexity", "family_probe_grid", "make_family",
    "make_probe_grid", "reproject_to_retraction",
    "sigma_convex_combination", "space_paraconvexity_report",
    "sup_distance",
    "GENERATORS", "Scene", "generate_scene", "load_scene", "parse_sweep",
    "scene_family", "scene_from_dict",
    "brute_force_alpha_oracle",
    "NonconvexityEstimator", "UniformRetraction",
    "emit_artifacts", "read_csv", "write_csv",
    "CRITERIA", "CriterionResult", "run_verification_suite",
    "__version__",
]
