"""Forward kinematics of a four-cable sinking-winch platform with unknown tension state."""

from sinkwinch.equal_length import delta_t_min_grid, even_tension, tension_family
from sinkwinch.errors import (
    ConfigError,
    DimensionMismatch,
    GeometryInfeasible,
    NonFiniteResidual,
    RankCollapse,
    SinkwinchError,
    SolverFailed,
    ZeroLengthCable,
)
from sinkwinch.geometry import (
    CableLengths,
    FkSystem,
    MechanismConfig,
    PlatformPose,
    TautSet,
    fk_residual_system,
    structure_matrix,
)
from sinkwinch.planar import solve_adjacent_equal
from sinkwinch.single_cable import is_single_cable_suspended
from sinkwinch.solver import SolverOptions, SolveReport, Termination
from sinkwinch.traversal import (
    Definite,
    Infeasible,
    SingleCableIndefinite,
    TraversalOptions,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "CableLengths",
    "ConfigError",
    "Definite",
    "DimensionMismatch",
    "FkSystem",
    "GeometryInfeasible",
    "Infeasible",
    "MechanismConfig",
    "NonFiniteResidual",
    "PlatformPose",
    "RankCollapse",
    "SingleCableIndefinite",
    "SinkwinchError",
    "SolveReport",
    "SolverFailed",
    "SolverOptions",
    "TautSet",
    "Termination",
    "TraversalOptions",
    "ZeroLengthCable",
    "delta_t_min_grid",
    "even_tension",
    "fk_residual_system",
    "is_single_cable_suspended",
    "solve",
    "solve_adjacent_equal",
    "structure_matrix",
    "tension_family",
]
