"""Constrained length minimization by local search."""
from .init import init_network, retract_leaves, subdivide
from .moves import (
    move_ball_replace,
    move_perturb_vertex,
    move_shortcut,
    move_steiner_local,
    with_connector,
)
from .relax import relax, spanning_tree
from .search import MOVES, MoveRecord, SolveResult, SolverConfig, solve

__all__ = [
    "MOVES",
    "MoveRecord",
    "SolveResult",
    "SolverConfig",
    "init_network",
    "move_ball_replace",
    "move_perturb_vertex",
    "move_shortcut",
    "move_steiner_local",
    "relax",
    "retract_leaves",
    "solve",
    "spanning_tree",
    "subdivide",
    "with_connector",
]
