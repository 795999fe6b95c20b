"""Linear partial Gromov-Wasserstein embeddings and exact GW/PGW solvers."""

from .fw_solvers import (
    FwConfig,
    Init,
    LargeLambdaWarning,
    SolveReport,
    Termination,
    gw_gradient,
    gw_objective,
    pgw_gradient,
    pgw_objective,
    solve_gw,
    solve_pgw,
)
from .gmspace import GaugeKind, GmSpace, MalformedInput, NoScale, from_points, normalize_mass, normalize_scale, uniform
from .linearize import (
    LgwEmbedding,
    LpgwEmbedding,
    algw_distance,
    alpgw_distance,
    barycentric_project,
    embed_lgw,
    embed_lpgw,
    recover_pgw_from_embedding,
)
from .reference import BarycenterConfig, classical_mds, gw_barycenter
from .transport_lp import KERNEL, MarginalMismatch, SolverFailure, TransportPlan, solve_ot, solve_partial_ot

__version__ = "0.1.0"

__all__ = [
    "BarycenterConfig",
    "FwConfig",
    "GaugeKind",
    "GmSpace",
    "Init",
    "KERNEL",
    "LargeLambdaWarning",
    "LgwEmbedding",
    "LpgwEmbedding",
    "MalformedInput",
    "MarginalMismatch",
    "NoScale",
    "SolveReport",
    "SolverFailure",
    "Termination",
    "TransportPlan",
    "algw_distance",
    "alpgw_distance",
    "barycentric_project",
    "classical_mds",
    "embed_lgw",
    "embed_lpgw",
    "from_points",
    "gw_barycenter",
    "gw_gradient",
    "gw_objective",
    "normalize_mass",
    "normalize_scale",
    "pgw_gradient",
    "pgw_objective",
    "recover_pgw_from_embedding",
    "solve_gw",
    "solve_ot",
    "solve_partial_ot",
    "solve_pgw",
    "uniform",
]
