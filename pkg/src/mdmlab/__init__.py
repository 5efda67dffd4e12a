"""Planar maximal distance minimizers: search for short networks covering a
sample within distance r, and grade them against the regularity properties
of (local) minimizers."""

__version__ = "0.1.0"

from .energy import CompactSample, PointKind, classify_point, direction_cone, f_m, is_feasible
from .errors import DomainError, IndeterminateError, MoveUnavailable, NotFoundError, UnsupportedError
from .network import Network
from .solver import SolverConfig, solve
from .steiner import cube_connector, steiner_tree_small
from .verifier import verify

__all__ = [
    "CompactSample",
    "DomainError",
    "IndeterminateError",
    "MoveUnavailable",
    "Network",
    "NotFoundError",
    "PointKind",
    "SolverConfig",
    "UnsupportedError",
    "classify_point",
    "cube_connector",
    "direction_cone",
    "f_m",
    "is_feasible",
    "solve",
    "steiner_tree_small",
    "verify",
]
