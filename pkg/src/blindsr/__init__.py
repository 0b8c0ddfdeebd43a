"""Blind super-resolution detection and channel estimation for crowded uplinks.

The pipeline: synthesize a partially observed multi-snapshot array output,
solve the dual atomic-norm SDP with ADMM, read angles off the dual
polynomial, cluster them into active users, and recover gains and data by
alternating least squares.
"""

from .als import AlsReport, UserEstimate, c_step, fix_global_phase, init_phi, phi_step, run_als
from .cluster import ClusterResult, build_user_estimates, kmeans_angles
from .dualsdp import (
    DualProblem,
    DualSolution,
    SolverOptions,
    dual_norm_on_grid,
    psd_project,
    solve_dual,
    toeplitz_adjoint,
)
from .errors import (
    ClusteringDegeneracyError,
    DegenerateInputError,
    InfeasibleConfigError,
    SolverError,
    UnderDetectionError,
)
from .metrics import Alignment, TrialMetrics, align, chamfer_distance, detection_rate, nmse_all
from .oracle import GridPrimalSolution, exhaustive_single_atom_fit, grid_primal
from .scene import (
    ArrayGeometry,
    Observation,
    Scene,
    SceneConfig,
    UserChannel,
    generate_scene,
    steering_matrix,
    steering_vector,
    synthesize,
)
from .spectrum import DualSpectrum, PeakSet, evaluate_spectrum, locate_peaks, prune_peaks

__version__ = "0.1.0"

__all__ = [
    "AlsReport",
    "Alignment",
    "ArrayGeometry",
    "ClusterResult",
    "ClusteringDegeneracyError",
    "DegenerateInputError",
    "DualProblem",
    "DualSolution",
    "DualSpectrum",
    "GridPrimalSolution",
    "InfeasibleConfigError",
    "Observation",
    "PeakSet",
    "Scene",
    "SceneConfig",
    "SolverError",
    "SolverOptions",
    "TrialMetrics",
    "UnderDetectionError",
    "UserChannel",
    "UserEstimate",
    "align",
    "build_user_estimates",
    "c_step",
    "chamfer_distance",
    "detection_rate",
    "dual_norm_on_grid",
    "evaluate_spectrum",
    "exhaustive_single_atom_fit",
    "fix_global_phase",
    "generate_scene",
    "grid_primal",
    "init_phi",
    "kmeans_angles",
    "locate_peaks",
    "nmse_all",
    "phi_step",
    "prune_peaks",
    "psd_project",
    "run_als",
    "solve_dual",
    "steering_matrix",
    "steering_vector",
    "synthesize",
    "toeplitz_adjoint",
]
