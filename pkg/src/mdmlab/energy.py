"""Coverage energy, corresponding points and the energetic-point taxonomy.

M is a finite sample of the compact set; every statement here is relative
to that sample.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .errors import DomainError
from .geom import as_point
from .kernels import SegmentIndex
from .network import Network, insert_vertex, locate

FEAS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CompactSample:
    points: np.ndarray
    r: float

    def __post_init__(self):
        p = np.array(self.points, dtype=float).reshape(-1, 2)
        if len(p) == 0:
            raise DomainError("the sample of M must be non-empty")
        if not np.all(np.isfinite(p)):
            raise DomainError("sample coordinates must be finite")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise DomainError("r must be a positive finite number")
        p.setflags(write=False)
        object.__setattr__(self, "points", p)
        object.__setattr__(self, "r", float(self.r))

    def __len__(self) -> int:
        return len(self.points)

    def covering_radius(self) -> float:
        """Largest gap between a sample and its nearest neighbour (fidelity indicator)."""
        if len(self.points) < 2:
            return 0.0
        from scipy.spatial import cKDTree

        d, _ = cKDTree(self.points).query(self.points, k=2)
        return float(d[:, 1].max())


class PointKind(str, enum.Enum):
    NON_ENERGETIC = "NonEnergetic"
    ISOLATED = "IsolatedEnergetic"
    NON_ISOLATED = "NonIsolatedEnergetic"


@dataclass(frozen=True, eq=False)
class PointClassification:
    point: np.ndarray
    kind: PointKind
    corresponding: np.ndarray

    @property
    def energetic(self) -> bool:
        return self.kind is not PointKind.NON_ENERGETIC


@dataclass(frozen=True, eq=False)
class WitnessSet:
    center: np.ndarray
    epsilon: float
    members: np.ndarray


@dataclass(frozen=True, eq=False)
class DirectionCone:
    """Conical hull of directions to corresponding points, and the tangent sum."""

    apex: np.ndarray
    generators: np.ndarray
    tangent_sum: np.ndarray
    gap: float  # distance from tangent_sum to the cone
    separating: np.ndarray | None = field(default=None)

    def contains(self, tol: float = 1e-3) -> bool:
        return self.gap <= tol


def default_tol_r(r: float) -> float:
    return 1e-3 * r


# energy -------------------------------------------------------------------


def f_m(M: CompactSample, net: Network | None) -> float:
    """Largest distance from a sample of M to the network (+inf for no network)."""
    if net is None:
        return math.inf
    return float(net.index.max_distance(M.points)[0])


def is_feasible(M: CompactSample, net: Network | None, tol: float = FEAS_TOL) -> bool:
    if net is None:
        return False
    worst, _ = net.index.max_distance(M.points, stop_above=M.r + tol)
    return worst <= M.r + tol


def _clip_outside(net: Network, x, rho: float, closed: bool = False):
    """Sub-segments of the network outside the ball around x.

    ``closed=False`` removes the open ball; ``closed=True`` the closed one.
    Returns (inside_a, inside_b, outside_a, outside_b).
    """
    a, b = net.seg_a, net.seg_b
    d = b - a
    f = a - x
    A = np.einsum("ij,ij->i", d, d)
    B = 2 * np.einsum("ij,ij->i", f, d)
    C = np.einsum("ij,ij->i", f, f) - rho * rho
    disc = B * B - 4 * A * C
    hit = disc > 0
    sq = np.sqrt(np.where(hit, disc, 0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = np.where(A > 0, (-B - sq) / (2 * A), 0.0)
        t1 = np.where(A > 0, (-B + sq) / (2 * A), 0.0)
    lo = np.clip(t0, 0, 1)
    hi = np.clip(t1, 0, 1)
    hit &= hi > lo
    point_in = (A == 0) & (C <= 0 if closed else C < 0)
    ins_a, ins_b, out_a, out_b = [], [], [], []
    for k in range(len(a)):
        if A[k] == 0:
            (ins_a if point_in[k] else out_a).append(a[k])
            (ins_b if point_in[k] else out_b).append(b[k])
            continue
        if not hit[k]:
            out_a.append(a[k])
            out_b.append(b[k])
            continue
        p0 = a[k] + lo[k] * d[k]
        p1 = a[k] + hi[k] * d[k]
        ins_a.append(p0)
        ins_b.append(p1)
        if lo[k] > 0:
            out_a.append(a[k])
            out_b.append(p0)
        if hi[k] < 1:
            out_a.append(p1)
            out_b.append(b[k])
    arr = lambda L: np.array(L, dtype=float).reshape(-1, 2)
    return arr(ins_a), arr(ins_b), arr(out_a), arr(out_b)


class Coverage:
    """Sample-to-network distances for one (M, network) pair, computed once."""

    def __init__(self, M: CompactSample, net: Network):
        self.M = M
        self.net = net
        self.dist, self.seg, self.t = net.index.nearest(M.points)
        self.value = float(self.dist.max())

    def energy_without_ball(self, x, rho: float) -> float:
        """F_M of the network with the open ball B_rho(x) removed."""
        x = as_point(x)
        pts = self.M.points
        affected = np.hypot(*(pts - x).T) <= self.dist + rho + 1e-12
        rest = self.dist[~affected]
        base = float(rest.max()) if len(rest) else -math.inf
        if not affected.any():
            return base
        _, _, oa, ob = _clip_outside(self.net, x, rho)
        keep = np.hypot(*(ob - oa).T) > 0 if len(oa) else np.zeros(0, dtype=bool)
        if len(self.net.edges) and not keep.any():
            return math.inf
        if len(self.net.edges) == 0:
            if len(oa) == 0:
                return math.inf
            keep = np.ones(len(oa), dtype=bool)
        idx = SegmentIndex(oa[keep], ob[keep])
        return max(base, float(idx.distances(pts[affected]).max()))

    def removal_raise(self, x, rho: float) -> float:
        return self.energy_without_ball(x, rho) - self.value

    def is_energetic(self, x, ladder, tol_e: float) -> bool:
        return all(self.removal_raise(x, rho) > tol_e for rho in ladder)

    def corresponding(self, x, tol_r: float) -> np.ndarray:
        x = as_point(x)
        r = self.M.r
        dx = np.hypot(*(self.M.points - x).T)
        mask = (np.abs(dx - r) <= tol_r) & (self.dist >= r - tol_r)
        return self.M.points[mask].copy()


def default_rho_ladder(r: float) -> list[float]:
    rho = 1e-3 * r
    return [rho, rho / 2, rho / 4]


def default_tol_e(r: float) -> float:
    return 1e-12 * max(r, 1.0)


def corresponding_points(M: CompactSample, net: Network, x, tol_r: float | None = None,
                         coverage: Coverage | None = None) -> np.ndarray:
    """Samples y with |xy| within tol_r of r whose r-ball (up to tol_r) misses the network."""
    locate(net, x)
    cov = coverage or Coverage(M, net)
    return cov.corresponding(x, default_tol_r(M.r) if tol_r is None else tol_r)


def _probe_points(net: Network, x, radius: float, step: float) -> list[tuple[np.ndarray, float]]:
    """Points along the network at arc length k*step (k >= 1) from x, within ``radius``."""
    net1, vi = insert_vertex(net, x)
    V = net1.vertices
    out = []
    # walk each branch by arc length; a tree walk with a distance budget
    stack = [(vi, w, 0.0) for w in net1.adjacency[vi]]
    seen_edges = set()
    while stack:
        u, w, s0 = stack.pop()
        key = (min(u, w), max(u, w))
        if key in seen_edges:
            continue
        seen_edges.add(key)
        L = math.hypot(*(V[w] - V[u]))
        k = math.floor(s0 / step) + 1
        while k * step <= s0 + L and k * step <= radius:
            p = V[u] + (k * step - s0) / L * (V[w] - V[u])
            out.append((p, k * step))
            k += 1
        if s0 + L < radius:
            stack.extend((w, z, s0 + L) for z in net1.adjacency[w] if z != u)
    return out


def classify_point(M: CompactSample, net: Network, x, rho_ladder=None, tol_r: float | None = None,
                   tol_e: float | None = None, coverage: Coverage | None = None) -> PointClassification:
    """Energetic / isolated-energetic / non-energetic classification of x on the network."""
    x = as_point(x)
    locate(net, x)
    cov = coverage or Coverage(M, net)
    ladder = list(rho_ladder) if rho_ladder is not None else default_rho_ladder(M.r)
    tol_r = default_tol_r(M.r) if tol_r is None else tol_r
    tol_e = default_tol_e(M.r) if tol_e is None else tol_e
    corr = cov.corresponding(x, tol_r)
    if not cov.is_energetic(x, ladder, tol_e):
        return PointClassification(x, PointKind.NON_ENERGETIC, corr)
    rho_min = min(ladder)
    for p, s in _probe_points(net, x, rho_min, rho_min / 10):
        if cov.is_energetic(p, [s / 2, s / 4, s / 8], tol_e):
            return PointClassification(x, PointKind.NON_ISOLATED, corr)
    return PointClassification(x, PointKind.ISOLATED, corr)


def witness_set(M: CompactSample, net: Network, x, eps: float, tol_r: float | None = None) -> WitnessSet:
    """Samples covered by the network inside the closed eps-ball and by nothing outside it."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    x = as_point(x)
    tol_r = default_tol_r(M.r) if tol_r is None else tol_r
    ia, ib, oa, ob = _clip_outside(net, x, eps, closed=True)
    if len(ia) == 0:
        return WitnessSet(x, float(eps), np.empty((0, 2)))
    d_in = SegmentIndex(ia, ib).distances(M.points)
    d_out = SegmentIndex(oa, ob).distances(M.points) if len(oa) else np.full(len(M.points), math.inf)
    mask = (d_in <= M.r + tol_r) & (d_out >= M.r - tol_r)
    return WitnessSet(x, float(eps), M.points[mask].copy())


def branch_directions(net: Network, x) -> np.ndarray:
    """Unit directions of the local branches of the network leaving x."""
    x = as_point(x)
    net1, vi = insert_vertex(net, x)
    dirs = [net1.vertices[w] - x for w in net1.adjacency[vi]]
    return np.array([d / math.hypot(*d) for d in dirs]).reshape(-1, 2)


def cone_projection(generators: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Euclidean projection of s onto the conical hull of the generators."""
    if len(generators) == 0:
        return np.zeros(2)
    lam, _ = nnls(np.asarray(generators, dtype=float).T, np.asarray(s, dtype=float))
    return generators.T @ lam


def direction_cone(M: CompactSample, net: Network, x, tol_r: float | None = None, rho_ladder=None,
                   coverage: Coverage | None = None, require_energetic: bool = True) -> DirectionCone:
    """N(x) and s(x) at an energetic point, with a separating direction when s(x) is outside N(x).

    s(x) is the sum of unit vectors pointing from each branch towards x,
    i.e. minus the sum of outgoing branch directions; it is the gradient of
    the length with respect to moving x.
    """
    x = as_point(x)
    cov = coverage or Coverage(M, net)
    tol_r = default_tol_r(M.r) if tol_r is None else tol_r
    if require_energetic:
        cls = classify_point(M, net, x, rho_ladder=rho_ladder, tol_r=tol_r, coverage=cov)
        if not cls.energetic:
            raise DomainError(f"point {tuple(x)} is not energetic")
        ys = cls.corresponding
    else:
        ys = cov.corresponding(x, tol_r)
    gens = np.array([(y - x) / math.hypot(*(y - x)) for y in ys if math.hypot(*(y - x)) > 0]).reshape(-1, 2)
    s = -branch_directions(net, x).sum(axis=0) if len(net.edges) else np.zeros(2)
    proj = cone_projection(gens, s)
    gap = float(math.hypot(*(proj - s)))
    h = (proj - s) / gap if gap > 1e-15 else None
    return DirectionCone(x, gens, s, gap, h)
