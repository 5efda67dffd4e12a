"""Candidate sets as embedded piecewise-linear graphs.

For a PL network the order of a point collapses to combinatorics: an
interior point of a segment has two local branches and a vertex has as
many as its degree.  ``ordball_at`` recovers the same number from sphere
crossings along a shrinking ladder of radii and is kept as a cross-check.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, IndeterminateError, NotFoundError, UnsupportedError
from .geom import as_point
from .kernels import SegmentIndex

ON_TOL = 1e-9
MIN_EDGE = 1e-9
SCHEMA = "mdmlab.network/1"


@dataclass(frozen=True, eq=False)
class Network:
    """Connected embedded graph whose edges are straight segments.

    Immutable: ``vertices`` and ``edges`` are read-only arrays.  Use
    :meth:`build` to assemble one from loose parts (it merges coincident
    vertices and drops degenerate edges).
    """

    vertices: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        e = np.array(self.edges, dtype=np.int64).reshape(-1, 2)
        if len(v) == 0:
            raise DomainError("a network needs at least one vertex")
        if not np.all(np.isfinite(v)):
            raise DomainError("vertex coordinates must be finite")
        if len(e):
            if e.min() < 0 or e.max() >= len(v):
                raise DomainError("edge refers to a missing vertex")
            if np.any(e[:, 0] == e[:, 1]):
                raise DomainError("self-loop edge")
            e = np.sort(e, axis=1)
            if len(np.unique(e, axis=0)) != len(e):
                raise DomainError("duplicate edge")
            lens = np.hypot(*(v[e[:, 1]] - v[e[:, 0]]).T)
            if np.any(lens <= MIN_EDGE):
                raise DomainError("zero-length edge")
        v.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "edges", e)
        if not self._connected():
            raise DomainError("network is not connected")

    # construction -------------------------------------------------------

    @classmethod
    def build(cls, vertices, edges, merge_tol: float = MIN_EDGE) -> "Network":
        """Merge vertices closer than ``merge_tol``, drop loops/duplicates and unused vertices."""
        v = np.array(vertices, dtype=float).reshape(-1, 2)
        e = np.array(edges, dtype=np.int64).reshape(-1, 2)
        rep = np.arange(len(v))
        if len(v) > 1:
            from scipy.spatial import cKDTree

            pairs = cKDTree(v).query_pairs(merge_tol * 1.0000001, output_type="ndarray")
            parent = list(range(len(v)))

            def find(i):
                while parent[i] != i:
                    parent[i] = parent[parent[i]]
                    i = parent[i]
                return i

            for i, j in sorted(map(tuple, pairs)):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
            rep = np.array([find(i) for i in range(len(v))])
        e = rep[e] if len(e) else e
        if len(e):
            e = e[e[:, 0] != e[:, 1]]
            e = np.unique(np.sort(e, axis=1), axis=0)
        used = np.unique(e.ravel()) if len(e) else np.unique(rep)
        remap = -np.ones(len(v), dtype=np.int64)
        remap[used] = np.arange(len(used))
        return cls(v[used], remap[e] if len(e) else np.empty((0, 2), dtype=np.int64))

    @classmethod
    def point(cls, p) -> "Network":
        return cls(np.array([as_point(p)]), np.empty((0, 2), dtype=np.int64))

    @classmethod
    def polyline(cls, points) -> "Network":
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        edges = [(i, i + 1) for i in range(len(pts) - 1)]
        return cls(pts, np.array(edges, dtype=np.int64).reshape(-1, 2))

    @classmethod
    def star(cls, center, tips) -> "Network":
        pts = np.vstack([as_point(center), np.asarray(tips, dtype=float).reshape(-1, 2)])
        return cls(pts, np.array([(0, k) for k in range(1, len(pts))], dtype=np.int64).reshape(-1, 2))

    # derived data -------------------------------------------------------

    def _connected(self) -> bool:
        n = len(self.vertices)
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        stack = [0]
        adj = self.adjacency
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return bool(seen.all())

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(len(self.vertices))]
        for i, j in self.edges:
            adj[i].append(int(j))
            adj[j].append(int(i))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.adjacency], dtype=np.int64)

    @cached_property
    def seg_a(self) -> np.ndarray:
        if len(self.edges) == 0:
            return self.vertices[:1].copy()
        return self.vertices[self.edges[:, 0]]

    @cached_property
    def seg_b(self) -> np.ndarray:
        if len(self.edges) == 0:
            return self.vertices[:1].copy()
        return self.vertices[self.edges[:, 1]]

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        if len(self.edges) == 0:
            return np.zeros(0)
        return np.hypot(*(self.seg_b - self.seg_a).T)

    @cached_property
    def index(self) -> SegmentIndex:
        return SegmentIndex(self.seg_a, self.seg_b)

    @property
    def length(self) -> float:
        return float(self.edge_lengths.sum())

    @cached_property
    def scale(self) -> float:
        span = np.ptp(self.vertices, axis=0).max() if len(self.vertices) > 1 else 0.0
        return float(max(span, 1.0))

    def distance(self, points) -> np.ndarray:
        return self.index.distances(points)

    # serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "vertices": [[float(x), float(y)] for x, y in self.vertices],
            "edges": [[int(i), int(j)] for i, j in self.edges],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Network":
        schema = d.get("schema", SCHEMA)
        if schema != SCHEMA:
            raise DomainError(f"unrecognized network schema {schema!r}")
        return cls(np.array(d["vertices"], dtype=float), np.array(d["edges"], dtype=np.int64).reshape(-1, 2))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Network":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        return f"Network(V={len(self.vertices)}, E={len(self.edges)}, length={self.length:.6g})"


@dataclass(frozen=True)
class BallCrossing:
    center: tuple[float, float]
    radius: float
    crossing_count: int


@dataclass(frozen=True)
class NiceRadius:
    center: tuple[float, float]
    radius: float
    crossing_count: int


# queries ----------------------------------------------------------------


def total_length(net: Network) -> float:
    return net.length


def locate(net: Network, x, tol: float = ON_TOL):
    """Where x sits on the network: ('vertex', i) or ('edge', k, t).

    Raises DomainError if x is farther than ``tol`` from every segment.
    """
    x = as_point(x)
    dv = np.hypot(*(net.vertices - x).T)
    i = int(np.argmin(dv))
    if dv[i] <= tol:
        return ("vertex", i)
    d, k, t = net.index.nearest(x[None])
    if d[0] > tol:
        raise DomainError(f"point {tuple(x)} is not on the network (distance {d[0]:.3g})")
    return ("edge", int(k[0]), float(t[0]))


def _edges_through(net: Network, x, tol: float = ON_TOL):
    """Per edge containing x: 1 if x is one of its endpoints, 2 if interior."""
    if len(net.edges) == 0:
        return np.zeros(0, dtype=np.int64)
    a, b = net.seg_a, net.seg_b
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    t = np.clip(np.einsum("ij,ij->i", x - a, d) / dd, 0, 1)
    q = a + t[:, None] * d
    on = np.hypot(*(x - q).T) <= tol
    at_end = (np.hypot(*(x - a).T) <= tol) | (np.hypot(*(x - b).T) <= tol)
    return np.where(on, np.where(at_end, 1, 2), 0)


def ord_at(net: Network, x, tol: float = ON_TOL) -> int:
    """Number of local branches of the network at x."""
    x = as_point(x)
    locate(net, x, tol)
    return int(_edges_through(net, x, tol).sum())


def crossing_points(net: Network, center, radius: float) -> np.ndarray:
    """Distinct points of the network on the circle of given center and radius."""
    c = as_point(center)
    if len(net.edges) == 0:
        p = net.vertices[0]
        return p[None].copy() if abs(math.hypot(*(p - c)) - radius) <= 1e-12 * max(1, radius) else np.empty((0, 2))
    a, b = net.seg_a, net.seg_b
    d = b - a
    f = a - c
    A = np.einsum("ij,ij->i", d, d)
    B = 2 * np.einsum("ij,ij->i", f, d)
    C = np.einsum("ij,ij->i", f, f) - radius * radius
    disc = B * B - 4 * A * C
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    q = -0.5 * (B + np.copysign(sq, B))
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(q != 0, q / A, -B / (2 * A))
        t2 = np.where(q != 0, C / q, -B / (2 * A))
    ts, ks = [], []
    for t in (t1, t2):
        good = ok & (t >= -1e-12) & (t <= 1 + 1e-12)
        ts.append(np.clip(t[good], 0, 1))
        ks.append(np.nonzero(good)[0])
    t = np.concatenate(ts)
    k = np.concatenate(ks)
    if len(t) == 0:
        return np.empty((0, 2))
    pts = a[k] + t[:, None] * d[k]
    tol = 1e-10 * max(1.0, radius)
    out: list[np.ndarray] = []
    for p in pts[np.lexsort((pts[:, 1], pts[:, 0]))]:
        if not any(math.hypot(*(p - o)) <= tol for o in out[-8:]):
            out.append(p)
    return np.array(out)


def crossing_count(net: Network, center, radius: float) -> BallCrossing:
    c = as_point(center)
    return BallCrossing(tuple(c), float(radius), len(crossing_points(net, c, radius)))


def local_feature_size(net: Network, x, tol: float = ON_TOL) -> float:
    """Distance from x to the nearest network feature not incident to it.

    Below this radius the network near x is a straight star.
    """
    x = as_point(x)
    dv = np.hypot(*(net.vertices - x).T)
    far_v = dv[dv > tol]
    best = float(far_v.min()) if len(far_v) else math.inf
    if len(net.edges):
        through = _edges_through(net, x, tol)
        a, b = net.seg_a, net.seg_b
        d = b - a
        dd = np.einsum("ij,ij->i", d, d)
        t = np.clip(np.einsum("ij,ij->i", x - a, d) / dd, 0, 1)
        dist = np.hypot(*(x - (a + t[:, None] * d)).T)
        others = dist[through == 0]
        if len(others):
            best = min(best, float(others.min()))
    if not math.isfinite(best):
        best = net.scale
    return best


def default_ladder(net: Network, x, steps: int = 3) -> list[float]:
    rho = 0.5 * local_feature_size(net, x)
    return [rho / 2**k for k in range(steps)]


def ordball_at(net: Network, x, ladder=None) -> int:
    """Stabilized sphere-crossing count at x along a decreasing ladder of radii."""
    x = as_point(x)
    o = ord_at(net, x)
    ladder = list(ladder) if ladder is not None else default_ladder(net, x)
    if not ladder or any(r <= 0 for r in ladder) or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise DomainError("ladder must be positive and strictly decreasing")
    counts = [crossing_count(net, x, r).crossing_count for r in ladder]
    if len(counts) > 1 and counts[-1] != counts[-2]:
        raise IndeterminateError(f"crossing counts {counts} did not stabilize")
    if counts[-1] < o:
        raise IndeterminateError(f"crossing count {counts[-1]} below ord {o}: ladder not fine enough")
    return counts[-1]


def is_acyclic(net: Network) -> bool:
    return len(net.edges) == len(net.vertices) - 1


def insert_vertex(net: Network, x, tol: float = ON_TOL) -> tuple[Network, int]:
    """Network with x promoted to a vertex (splitting every edge through it)."""
    x = as_point(x)
    where = locate(net, x, tol)
    if where[0] == "vertex":
        return net, where[1]
    through = _edges_through(net, x, tol)
    v = np.vstack([net.vertices, x])
    new = len(net.vertices)
    edges = []
    for k, (i, j) in enumerate(net.edges):
        if through[k] == 2:
            edges.extend([(i, new), (new, j)])
        else:
            edges.append((i, j))
    return Network(v, np.array(edges)), new


def components_without(net: Network, vi: int) -> list[list[int]]:
    """Vertex sets of the connected components left after deleting vertex vi."""
    adj = net.adjacency
    seen = {vi}
    comps = []
    for s in adj[vi]:
        if s in seen:
            continue
        comp = [s]
        seen.add(s)
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.append(w)
                    dq.append(w)
        comps.append(comp)
    return comps


def path_between(net: Network, a, b) -> np.ndarray:
    """The unique arc from a to b as an (n, 2) polyline."""
    if not is_acyclic(net):
        raise UnsupportedError("path_between needs an acyclic network")
    a, b = as_point(a), as_point(b)
    locate(net, a)
    locate(net, b)
    if math.hypot(*(a - b)) <= ON_TOL:
        return a[None].copy()
    net1, ia = insert_vertex(net, a)
    net2, ib = insert_vertex(net1, b)
    ia = int(np.argmin(np.hypot(*(net2.vertices - a).T)))
    parent = {ia: -1}
    dq = deque([ia])
    while dq:
        u = dq.popleft()
        if u == ib:
            break
        for w in net2.adjacency[u]:
            if w not in parent:
                parent[w] = u
                dq.append(w)
    path = [ib]
    while parent[path[-1]] != -1:
        path.append(parent[path[-1]])
    return net2.vertices[path[::-1]].copy()


def polyline_length(points) -> float:
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    return float(np.hypot(*np.diff(p, axis=0).T).sum()) if len(p) > 1 else 0.0


def length_in_ball(net: Network, x, eps: float) -> float:
    """Exact length of the network inside the disk of radius eps around x."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    if len(net.edges) == 0:
        return 0.0
    c = as_point(x)
    a, b = net.seg_a, net.seg_b
    d = b - a
    f = a - c
    A = np.einsum("ij,ij->i", d, d)
    # foot of the perpendicular and half-chord; stable when eps << |d|
    tf = -np.einsum("ij,ij->i", f, d) / A
    foot = f + tf[:, None] * d
    h2 = eps * eps - np.einsum("ij,ij->i", foot, foot)
    ok = h2 > 0
    half = np.sqrt(np.where(ok, h2, 0) / A)
    t0 = np.clip(tf - half, 0, 1)
    t1 = np.clip(tf + half, 0, 1)
    frac = np.where(ok, np.maximum(t1 - t0, 0), 0)
    return float((frac * np.sqrt(A)).sum())


def _branch_reach(net: Network, x) -> list[float]:
    net1, vi = insert_vertex(net, x)
    comps = components_without(net1, vi)
    return [float(np.hypot(*(net1.vertices[c] - x).T).max()) for c in comps]


def is_nice_radius(net: Network, x, eps: float) -> bool:
    """The eps-sphere meets the network in ordball points and every branch reaches it."""
    x = as_point(x)
    try:
        target = ordball_at(net, x)
    except IndeterminateError:
        return False
    cnt = crossing_count(net, x, eps).crossing_count
    return cnt == target and all(r >= eps for r in _branch_reach(net, x))


def find_nice_radius(net: Network, x, eps0: float, ratio: float = 0.9) -> NiceRadius:
    """Largest radius eps0 * ratio**k at which the sphere meets each branch once."""
    if eps0 <= 0:
        raise DomainError("eps0 must be positive")
    x = as_point(x)
    target = ordball_at(net, x)
    reach = _branch_reach(net, x)
    eps = eps0
    floor = 1e-6 * eps0
    while eps >= floor:
        cnt = crossing_count(net, x, eps).crossing_count
        if cnt == target and all(r >= eps for r in reach):
            return NiceRadius(tuple(x), float(eps), cnt)
        eps *= ratio
    raise NotFoundError(f"no nice radius in [{floor:.3g}, {eps0:.3g}] at {tuple(x)}")
