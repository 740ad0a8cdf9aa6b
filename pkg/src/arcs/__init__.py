"""Rotation and correspondence search for partially overlapping 3D point sets.

The functional core lives in the submodules (``rotation``, ``stabbing``,
``matching``, ``consensus``, ``refinement``, ``synthetic``, ``benchmarks``);
estimator-style wrappers compatible with scikit-learn conventions are in
``estimators``; ``arcs.cli`` provides the command line front end.
"""

from .consensus import (
    ConsensusResult,
    angle_intervals,
    axis_intervals,
    prune,
    residual_norms,
    solve_omega_given_axis,
    solve_theta_given_phi,
)
from .estimators import (
    ExactRotationSearch,
    NormMatcher,
    RobustRotationSearch,
    RotationCorrespondenceSearch,
    RotationRefiner,
)
from .exceptions import DegenerateConfigurationError, ParseError
from .matching import arcs_match, arcs_n_match, arcs_solve
from .refinement import (
    RefineConfig,
    RefineHistory,
    SharpnessReport,
    estimate_sharpness,
    lipschitz_bound,
    quat_distance,
    refine,
    residual_quadform,
    residual_quadforms,
    residual_sum,
    riemannian_subgradient,
)
from .rotation import (
    kabsch,
    quat_to_rotation,
    random_rotation,
    rodrigues,
    rotation_error_deg,
    rotation_to_quat,
    spherical_axis,
)
from .stabbing import Interval, IntervalUnion, stab_count_at, stab_max
from .synthetic import (
    RrsInstance,
    SrcsInstance,
    gen_rrs,
    gen_sharpness_instance,
    gen_srcs,
    success_rate,
)

__version__ = "0.1.0"

__all__ = [
    "ConsensusResult",
    "DegenerateConfigurationError",
    "ExactRotationSearch",
    "Interval",
    "IntervalUnion",
    "NormMatcher",
    "ParseError",
    "RefineConfig",
    "RefineHistory",
    "RobustRotationSearch",
    "RotationCorrespondenceSearch",
    "RotationRefiner",
    "RrsInstance",
    "SharpnessReport",
    "SrcsInstance",
    "angle_intervals",
    "arcs_match",
    "arcs_n_match",
    "arcs_solve",
    "axis_intervals",
    "estimate_sharpness",
    "gen_rrs",
    "gen_sharpness_instance",
    "gen_srcs",
    "kabsch",
    "lipschitz_bound",
    "prune",
    "quat_distance",
    "quat_to_rotation",
    "random_rotation",
    "refine",
    "residual_norms",
    "residual_quadform",
    "residual_quadforms",
    "residual_sum",
    "riemannian_subgradient",
    "rodrigues",
    "rotation_error_deg",
    "rotation_to_quat",
    "solve_omega_given_axis",
    "solve_theta_given_phi",
    "spherical_axis",
    "stab_count_at",
    "stab_max",
    "success_rate",
]
