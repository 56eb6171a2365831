"""Near-field beam pattern design under a low exposure region (LER) constraint."""

from ._version import __version__
from .config import ConfigError, Scenario, ScenarioConfig, load_config, default_config, reduced_config
from .evaluation import EvaluationReport, achievable_power_map, evaluate, threshold_sweep, timing_benchmark
from .field import beam_pattern, received_power, steering_matrix, steering_vector
from .geometry import ArrayGeometry, GeometryError, antenna_positions, fraunhofer_distance
from .kernels import BACKEND
from .precoder import (
    Method,
    PrecoderError,
    PrecoderResult,
    ThresholdSpec,
    dosp,
    mrt,
    ridge_baseline,
    zf,
)
from .region import RectRegion, SampledRegion, default_scenario_region, sample_region
from .socp import SocpProblem, SocpSolution, kkt_residuals, solve_p2
from .subspace import SubspaceBasis, compute_basis, project_out

__all__ = [
    "__version__", "BACKEND",
    "ArrayGeometry", "GeometryError", "antenna_positions", "fraunhofer_distance",
    "steering_vector", "steering_matrix", "received_power", "beam_pattern",
    "RectRegion", "SampledRegion", "sample_region", "default_scenario_region",
    "SubspaceBasis", "compute_basis", "project_out",
    "Method", "PrecoderError", "PrecoderResult", "ThresholdSpec", "mrt", "zf", "dosp", "ridge_baseline",
    "SocpProblem", "SocpSolution", "solve_p2", "kkt_residuals",
    "ScenarioConfig", "Scenario", "ConfigError", "load_config", "default_config", "reduced_config",
    "EvaluationReport", "evaluate", "threshold_sweep", "achievable_power_map", "timing_benchmark",
]
