"""Strict-improvement local search over the move set."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, Mapping

import numpy as np

from ..energy import CompactSample, Coverage, is_feasible
from ..errors import DomainError, IndeterminateError, MoveUnavailable, NotFoundError
from ..geom import enclosing_circle
from ..network import Network, find_nice_radius
from . import moves as mv
from .init import init_network, resample, subdivide
from .relax import relax, spanning_tree

MOVES = ("ball_replace", "perturb_vertex", "shortcut", "steiner_local")
INIT_MODES = ("mst_shrink", "star", "user_network")
REPAIRED = ("steiner_local",)  # moves whose infeasible candidates get a convex repair


@dataclass(frozen=True)
class SolverConfig:
    seed: int = 0
    max_iters: int = 200
    init_mode: str = "mst_shrink"
    move_weights: Mapping[str, float] = field(default_factory=lambda: {m: 1.0 for m in MOVES})
    step_scale: float = 1e-2  # perturbation step as a multiple of r
    cooling: float = 0.95
    tol_len: float = 1e-6
    temperature: float = 0.0  # > 0 enables annealed acceptance of uphill moves
    resolution: float | None = None  # longest edge kept after each accepted move; None -> r / 4
    tol_cone: float = mv.CONE_TOL

    def __post_init__(self):
        if self.init_mode not in INIT_MODES:
            raise DomainError(f"init_mode must be one of {INIT_MODES}")
        w = dict(self.move_weights)
        unknown = set(w) - set(MOVES)
        if unknown:
            raise DomainError(f"unknown moves {sorted(unknown)}")
        if any(not (v >= 0 and math.isfinite(v)) for v in w.values()) or not any(v > 0 for v in w.values()):
            raise DomainError("move weights must be non-negative with at least one positive")
        if not 0 < self.cooling < 1:
            raise DomainError("cooling must lie in (0, 1)")
        for name in ("step_scale", "tol_len", "tol_cone"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.temperature < 0:
            raise DomainError("temperature must be non-negative")
        if self.resolution is not None and not self.resolution > 0:
            raise DomainError("resolution must be positive")
        if self.max_iters < 0:
            raise DomainError("max_iters must be non-negative")
        object.__setattr__(self, "move_weights", {m: float(w.get(m, 0.0)) for m in MOVES})

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MoveRecord:
    iteration: int
    name: str
    site: int
    accepted: bool
    delta_length: float
    feasible_after: bool

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True, eq=False)
class SolveResult:
    network: Network
    moves: list[MoveRecord]
    converged: bool
    iterations: int

    def __iter__(self) -> Iterator:
        yield self.network
        yield self.moves


def _move_order(rng: np.random.Generator, weights: Mapping[str, float]) -> list[str]:
    """Weighted random permutation of the enabled moves."""
    names = [m for m in MOVES if weights[m] > 0]
    u = rng.random(len(names))
    keys = -np.log(u) / np.array([weights[m] for m in names])
    return [names[k] for k in np.argsort(keys, kind="stable")]


class _Search:
    def __init__(self, M: CompactSample, cfg: SolverConfig):
        self.M = M
        self.cfg = cfg
        self.h = cfg.resolution if cfg.resolution is not None else M.r / 4
        self.rng = np.random.default_rng(cfg.seed)
        self.records: list[MoveRecord] = []
        self.iteration = 0

    def log(self, name, site, accepted, delta, feasible):
        self.records.append(MoveRecord(self.iteration, name, int(site), bool(accepted), float(delta), bool(feasible)))

    def polish(self, net: Network) -> Network:
        """Subdivide to the working resolution and run the convex polish."""
        net = subdivide(net, self.h)
        out = relax(self.M, net, tol_len=0.1 * self.cfg.tol_len)
        return out if out is not None else net

    # candidate sites ----------------------------------------------------------

    def candidates(self, name: str, net: Network):
        M, cfg = self.M, self.cfg
        if name == "steiner_local":
            for vi in range(len(net.vertices)):
                if mv.is_sharp(net, vi):
                    yield vi, lambda vi=vi: mv.move_steiner_local(net, M, vi)
        elif name == "shortcut":
            cost = 2 * mv.connector_constant() * mv.CONNECTOR_MIN * M.r
            for chain in mv.shortcut_chains(net):
                if mv.shortcut_gain(net, chain) > cost + cfg.tol_len:
                    yield chain[2], lambda chain=chain: mv.move_shortcut(net, M, chain)
        elif name == "perturb_vertex":
            cov = Coverage(M, net)
            step = cfg.step_scale * M.r
            for vi in range(len(net.vertices)):
                if len(cov.corresponding(net.vertices[vi], 1e-3 * M.r)) == 0:
                    continue
                yield vi, lambda vi=vi: mv.move_perturb_vertex(net, M, vi, step, cfg.tol_cone)
        elif name == "ball_replace":
            for vi in range(len(net.vertices)):
                if net.degrees[vi] == 2 and not mv.is_sharp(net, vi):
                    # only a visibly bent degree-2 vertex can be straightened with profit
                    ang = mv.incident_angles(net, vi)[0]
                    if ang > math.pi - 1e-3:
                        continue
                x = net.vertices[vi]
                try:
                    eps = find_nice_radius(net, x, 2 * self.h).radius
                except (NotFoundError, IndeterminateError):
                    continue
                if mv.ball_replace_gain(net, x, eps, M.r) <= cfg.tol_len:
                    continue
                yield vi, lambda x=x, eps=eps: mv.move_ball_replace(net, M, x, eps)

    # evaluation ------------------------------------------------------------------

    def evaluate(self, cur: Network, cand: Network, repair: bool) -> tuple[Network, bool]:
        """Break cycles; polish an infeasible candidate when the move allows repair."""
        cand = spanning_tree(cand)
        if cand.length >= cur.length - self.cfg.tol_len:
            return cand, is_feasible(self.M, cand)
        if is_feasible(self.M, cand):
            return cand, True
        if not repair:
            return cand, False
        fixed = relax(self.M, cand, tol_len=0.1 * self.cfg.tol_len)
        if fixed is None:
            return cand, False
        return fixed, True

    def accept(self, delta: float, feasible: bool) -> bool:
        if not feasible:
            return False
        if delta <= -self.cfg.tol_len:
            return True
        T = self.cfg.temperature * self.cfg.cooling ** self.iteration
        if T > 0 and delta > 0:
            return bool(self.rng.random() < math.exp(-delta / T))
        return False

    def run(self, start: Network) -> SolveResult:
        cfg = self.cfg
        # work at the target resolution from the start; the convex repair
        # restores any coverage lost by resampling
        net = relax(self.M, resample(start, self.h), tol_len=0.1 * cfg.tol_len)
        if net is None or net.length > start.length:
            net = self.polish(start)
        self.log("relax", -1, True, net.length - start.length, True)
        best = net
        converged = False
        while self.iteration < cfg.max_iters:
            self.iteration += 1
            moved = False
            for name in _move_order(self.rng, cfg.move_weights):
                for site, build in self.candidates(name, net):
                    try:
                        raw = build()
                    except (MoveUnavailable, DomainError):
                        continue
                    cand, feasible = self.evaluate(net, raw, repair=name in REPAIRED)
                    delta = cand.length - net.length
                    ok = self.accept(delta, feasible)
                    self.log(name, site, ok, delta, feasible)
                    if ok:
                        polished = self.polish(cand)
                        self.log("relax", -1, True, polished.length - cand.length, True)
                        net = polished
                        moved = True
                        break
                if moved:
                    break
            if net.length < best.length:
                best = net
            if not moved:
                converged = True
                break
        return SolveResult(best, self.records, converged, self.iteration)


def solve(M: CompactSample, cfg: SolverConfig | None = None, network: Network | None = None) -> SolveResult:
    """Feasible network of locally minimal length within the move set."""
    cfg = cfg or SolverConfig()
    c, rad = enclosing_circle(M.points, seed=cfg.seed)
    if rad <= M.r:
        net = Network.point(c)
        if is_feasible(M, net):
            return SolveResult(net, [], True, 0)
    start = init_network(M, cfg.init_mode, network)
    return _Search(M, cfg).run(start)
