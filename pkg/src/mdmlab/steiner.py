"""Exact Euclidean Steiner trees for up to five terminals.

Small instances are solved by enumerating every full Steiner topology and
relaxing each one with Gauss-Seidel Fermat-point updates.  Because each
update is the exact Fermat-Torricelli point of the three neighbours
(snapping to a neighbour when its angle reaches 2pi/3), degenerate
optima are reached without the singularities of Weiszfeld iteration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, UnsupportedError
from .geom import angle, as_point, cross
from .kernels import SegmentIndex

TWO_PI_3 = 2 * math.pi / 3
MAX_TERMINALS = 5
CUBE_OFFSET = 4 * math.sqrt(2)  # c' = 4 sqrt(n) for n = 2

DAMPING = 0.5
STEP_TOL = 1e-12
MAX_SWEEPS = 10_000
MERGE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SteinerTree:
    """A tree over ``points = terminals + steiner_points``; edges index into points."""

    terminals: np.ndarray
    steiner_points: np.ndarray
    edges: tuple[tuple[int, int], ...]

    @property
    def points(self) -> np.ndarray:
        return np.vstack([self.terminals, self.steiner_points.reshape(-1, 2)])

    @property
    def segments(self) -> list[tuple[np.ndarray, np.ndarray]]:
        p = self.points
        return [(p[i], p[j]) for i, j in self.edges]

    @property
    def length(self) -> float:
        p = self.points
        return float(sum(math.hypot(*(p[i] - p[j])) for i, j in self.edges))

    def degree(self, k: int) -> int:
        return sum(k in e for e in self.edges)

    def neighbours(self, k: int) -> list[int]:
        return [j if i == k else i for i, j in self.edges if k in (i, j)]

    def steiner_angles(self) -> list[list[float]]:
        """Pairwise incident-edge angles at every Steiner point."""
        p = self.points
        n = len(self.terminals)
        out = []
        for s in range(n, len(p)):
            nb = self.neighbours(s)
            out.append([angle(p[a], p[s], p[b]) for ia, a in enumerate(nb) for b in nb[ia + 1:]])
        return out

    def transformed(self, scale: float, shift) -> "SteinerTree":
        shift = as_point(shift)
        return SteinerTree(self.terminals * scale + shift, self.steiner_points * scale + shift, self.edges)

    def to_dict(self) -> dict:
        return {
            "schema": "mdmlab.steiner/1",
            "terminals": self.terminals.tolist(),
            "steiner_points": self.steiner_points.reshape(-1, 2).tolist(),
            "edges": [list(e) for e in self.edges],
            "length": self.length,
        }


# three terminals ---------------------------------------------------------


def _check_distinct(points, tol=0.0):
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if math.hypot(*(points[i] - points[j])) <= tol:
                raise DomainError("terminals must be pairwise distinct")


def fermat_point(a, b, c) -> np.ndarray:
    """Fermat-Torricelli point of a triangle.

    Returns the vertex whose angle is at least 2pi/3 when there is one, and
    the middle point for collinear input.
    """
    a, b, c = as_point(a), as_point(b), as_point(c)
    _check_distinct([a, b, c])
    return _fermat(a, b, c)


def _fermat(a, b, c) -> np.ndarray:
    # tolerant of coincident points; used inside relaxation
    pts = (a, b, c)
    la = math.hypot(*(b - c))
    lb = math.hypot(*(c - a))
    lc = math.hypot(*(a - b))
    scale = max(la, lb, lc)
    if scale == 0.0:
        return a.copy()
    if min(la, lb, lc) <= 1e-15 * scale:
        # two coincide: the doubled point wins
        if lc <= 1e-15 * scale:
            return a.copy()
        if la <= 1e-15 * scale:
            return b.copy()
        return c.copy()
    if abs(cross(b - a, c - a)) <= 1e-14 * scale * scale:
        # collinear: the middle point
        order = np.argsort([-la, -lb, -lc])
        return pts[int(order[0])].copy()
    ang = (angle(b, a, c), angle(a, b, c), angle(a, c, b))
    k = int(np.argmax(ang))
    if ang[k] >= TWO_PI_3:
        return pts[k].copy()
    w = np.array([la / math.sin(ang[0] + math.pi / 3),
                  lb / math.sin(ang[1] + math.pi / 3),
                  lc / math.sin(ang[2] + math.pi / 3)])
    f = (w[0] * a + w[1] * b + w[2] * c) / w.sum()
    # two Newton polish steps on the sum of distances
    for _ in range(2):
        g = np.zeros(2)
        hess = np.zeros((2, 2))
        for p in pts:
            v = f - p
            n = math.hypot(*v)
            u = v / n
            g += u
            hess += (np.eye(2) - np.outer(u, u)) / n
        f = f - np.linalg.solve(hess, g)
    return f


def steiner_tree_3(a, b, c) -> SteinerTree:
    a, b, c = as_point(a), as_point(b), as_point(c)
    _check_distinct([a, b, c])
    f = _fermat(a, b, c)
    terms = np.array([a, b, c])
    for k in range(3):
        if math.hypot(*(f - terms[k])) <= MERGE_TOL * max(1.0, np.ptp(terms, axis=0).max()):
            others = [i for i in range(3) if i != k]
            return SteinerTree(terms, np.empty((0, 2)), ((others[0], k), (k, others[1])))
    return SteinerTree(terms, f[None], ((0, 3), (1, 3), (2, 3)))


def steiner_defect(a, b, c) -> float:
    """(2 eps - |St(A, B, C)|) / eps for |AB| = |BC| = eps."""
    a, b, c = as_point(a), as_point(b), as_point(c)
    _check_distinct([a, b, c])
    e1, e2 = math.hypot(*(a - b)), math.hypot(*(c - b))
    if abs(e1 - e2) > 1e-9 * max(e1, e2):
        raise DomainError("steiner_defect needs |AB| = |BC|")
    if max(angle(b, a, c), angle(a, b, c), angle(a, c, b)) >= TWO_PI_3:
        raise DomainError("steiner_defect needs all triangle angles below 2pi/3")
    eps = 0.5 * (e1 + e2)
    return (2 * eps - steiner_tree_3(a, b, c).length) / eps


# small instances by topology enumeration ----------------------------------


@lru_cache(maxsize=None)
def full_topologies(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """All full Steiner topologies on terminals 0..n-1 with Steiner nodes n..2n-3."""
    if n < 3:
        raise DomainError("full topologies need at least 3 terminals")
    tops = [((0, n), (1, n), (2, n))]
    for k in range(3, n):
        nxt = []
        for top in tops:
            s = n + k - 2
            for idx, (u, v) in enumerate(top):
                rest = top[:idx] + top[idx + 1:]
                nxt.append(rest + ((u, s), (s, v), (k, s)))
        tops = nxt
    return tuple(tops)


def _relax(terms: np.ndarray, top, n: int) -> tuple[np.ndarray, int]:
    m = n - 2
    nbrs = [[] for _ in range(n + m)]
    for u, v in top:
        nbrs[u].append(v)
        nbrs[v].append(u)
    pos = np.vstack([terms, np.zeros((m, 2))])
    centroid = terms.mean(axis=0)
    for s in range(n, n + m):
        pos[s] = centroid + 1e-3 * np.array([math.cos(s), math.sin(s)])
    for _ in range(50):
        for s in range(n, n + m):
            pos[s] = pos[nbrs[s]].mean(axis=0)
    sweeps = 0
    for sweeps in range(1, MAX_SWEEPS + 1):
        step = 0.0
        for s in range(n, n + m):
            i, j, k = nbrs[s]
            f = _fermat(pos[i], pos[j], pos[k])
            new = pos[s] + DAMPING * (f - pos[s])
            step = max(step, math.hypot(*(new - pos[s])))
            pos[s] = new
        if step < STEP_TOL:
            break
    return pos, sweeps


def _collapse(terms: np.ndarray, pos: np.ndarray, top, n: int) -> SteinerTree:
    """Merge Steiner points that converged onto terminals or onto each other."""
    total = len(pos)
    rep = list(range(total))

    def find(i):
        while rep[i] != i:
            i = rep[i]
        return i

    for s in range(n, total):
        for k in range(total):
            if k == s:
                continue
            if math.hypot(*(pos[s] - pos[k])) <= MERGE_TOL:
                rs, rk = find(s), find(k)
                if rs != rk:
                    # terminals absorb Steiner points; lower index wins otherwise
                    if rk < n or (rs >= n and rk < rs):
                        rep[rs] = rk
                    else:
                        rep[rk] = rs
    edges = set()
    for u, v in top:
        a, b = find(u), find(v)
        if a != b:
            edges.add((min(a, b), max(a, b)))
    keep = sorted({find(s) for s in range(n, total)} - set(range(n)))
    remap = {i: i for i in range(n)}
    for idx, s in enumerate(keep):
        remap[s] = n + idx
    steiner = pos[keep] if keep else np.empty((0, 2))
    edges = tuple(sorted((remap[a], remap[b]) for a, b in edges))
    return SteinerTree(terms.copy(), np.array(steiner).reshape(-1, 2), edges)


def steiner_tree_small(terminals) -> SteinerTree:
    """Minimal Steiner tree for 2 to 5 distinct terminals."""
    terms = np.asarray(terminals, dtype=float).reshape(-1, 2)
    n = len(terms)
    if n > MAX_TERMINALS:
        raise UnsupportedError(f"steiner_tree_small handles at most {MAX_TERMINALS} terminals")
    if n < 2:
        raise DomainError("need at least 2 terminals")
    if not np.all(np.isfinite(terms)):
        raise DomainError("terminals must be finite")
    _check_distinct(list(terms))
    if n == 2:
        return SteinerTree(terms.copy(), np.empty((0, 2)), ((0, 1),))
    # relax in normalized coordinates so tolerances are relative
    center = terms.mean(axis=0)
    scale = float(np.abs(terms - center).max())
    unit_terms = (terms - center) / scale
    best, best_len = None, math.inf
    for top in full_topologies(n):
        pos, _ = _relax(unit_terms, top, n)
        tree = _collapse(unit_terms, pos, top, n)
        length = tree.length
        if length < best_len - 1e-13:
            best, best_len = tree, length
    out = best.transformed(scale, center)
    return SteinerTree(terms.copy(), out.steiner_points, out.edges)


def terminal_unit_vector_sum(tree: SteinerTree) -> np.ndarray:
    """Sum over terminals A and incident edges XA of the unit vector along XA."""
    p = tree.points
    total = np.zeros(2)
    for k in range(len(tree.terminals)):
        for x in tree.neighbours(k):
            v = p[k] - p[x]
            total += v / math.hypot(*v)
    return total


def mst_length(points) -> float:
    from scipy.sparse.csgraph import minimum_spanning_tree
    from scipy.spatial.distance import cdist

    p = np.asarray(points, dtype=float).reshape(-1, 2)
    return float(minimum_spanning_tree(cdist(p, p)).sum())


# connector sets --------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConnectorSet:
    anchor: np.ndarray
    epsilon: float
    tree: SteinerTree
    margin: float  # r - max sampled distance; positive means covered

    @property
    def length(self) -> float:
        return self.tree.length


@lru_cache(maxsize=None)
def _unit_connector() -> SteinerTree:
    c = CUBE_OFFSET
    corners = [(c, c), (-c, c), (-c, -c), (c, -c), (0.0, 0.0)]
    return steiner_tree_small(corners)


def connector_constant() -> float:
    """Length of the connector per unit epsilon (measured, not assumed)."""
    return _unit_connector().length


def _coverage_margin(tree: SteinerTree, center, radius: float, r: float, samples: int) -> float:
    th = 2 * math.pi * np.arange(samples) / samples
    ys = as_point(center) + radius * np.column_stack([np.cos(th), np.sin(th)])
    segs = tree.segments
    idx = SegmentIndex(np.array([s[0] for s in segs]), np.array([s[1] for s in segs]))
    return r - float(idx.distances(ys).max())


@lru_cache(maxsize=None)
def connector_limit_ratio(samples: int = 10_000) -> float:
    """Largest eps / r for which the connector covers the (r + eps)-ball (bisection)."""
    unit = _unit_connector()
    ok = lambda q: _coverage_margin(unit.transformed(q, (0, 0)), (0, 0), 1 + q, 1.0, samples) > 0
    lo, hi = 0.0, 1.0
    while ok(hi):
        hi *= 2
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


def cube_connector(x, eps: float, r: float, samples: int = 10_000) -> ConnectorSet:
    """Steiner tree on x and the four points offset by +-c'eps per coordinate.

    Its r-neighbourhood covers the closed (r + eps)-ball around x; checked on
    ``samples`` boundary points.
    """
    x = as_point(x)
    if eps <= 0 or r <= 0:
        raise DomainError("eps and r must be positive")
    tree = _unit_connector().transformed(eps, x)
    margin = _coverage_margin(tree, x, r + eps, r, samples)
    if margin <= 0:
        limit = connector_limit_ratio(samples) * r
        raise DomainError(f"eps={eps:.6g} too large for coverage at r={r:.6g}; largest valid eps ~ {limit:.6g}")
    return ConnectorSet(x, float(eps), tree, float(margin))
