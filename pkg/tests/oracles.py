"""Independent reference computations used to freeze expected values.

Nothing here calls into the package's numerical code; each oracle takes a
different route (plain loops, dense sampling, a generic convex solver).
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def seg_dist(p, a, b) -> float:
    """Point-segment distance by minimizing |p - (a + t (b - a))| over a dense t grid, then refining."""
    p, a, b = (np.asarray(v, dtype=float) for v in (p, a, b))
    d = b - a
    L2 = float(d @ d)
    if L2 == 0:
        return float(math.dist(p, a))
    # the squared distance is a quadratic in t; its vertex clipped to [0, 1] is the minimizer
    t = min(1.0, max(0.0, float((p - a) @ d) / L2))
    return float(math.dist(p, a + t * d))


def energy(points, segments) -> float:
    """max over samples of min over segments, with plain loops."""
    worst = 0.0
    for p in points:
        best = min(seg_dist(p, a, b) for a, b in segments)
        worst = max(worst, best)
    return worst


def net_segments(net):
    if len(net.edges) == 0:
        v = net.vertices[0]
        return [(v, v)]
    return [(net.vertices[i], net.vertices[j]) for i, j in net.edges]


def sampled_length_in_ball(segments, x, eps, n=200_000) -> float:
    """Midpoint-rule length of the part of the segments inside the closed disk."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    t = (np.arange(n) + 0.5) / n
    for a, b in segments:
        a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
        pts = a + t[:, None] * (b - a)
        inside = np.hypot(*(pts - x).T) <= eps
        total += math.dist(a, b) * inside.mean()
    return total


def fermat_point(a, b, c) -> np.ndarray:
    """Weiszfeld iteration with a vertex test (a vertex wins when the pull of the other two is <= 1)."""
    P = np.array([a, b, c], dtype=float)
    for k in range(3):
        others = [P[j] - P[k] for j in range(3) if j != k]
        pull = sum(o / np.linalg.norm(o) for o in others)
        if np.linalg.norm(pull) <= 1:
            return P[k].copy()
    y = P.mean(axis=0)
    for _ in range(20000):
        w = 1 / np.linalg.norm(P - y, axis=1)
        y_new = (P * w[:, None]).sum(axis=0) / w.sum()
        if np.linalg.norm(y_new - y) < 1e-15:
            break
        y = y_new
    return y


def _full_topologies(n: int):
    """Full topologies by explicit listing for n = 3, 4, 5 (Steiner nodes are n, n+1, ...)."""
    if n == 3:
        yield [(0, 3), (1, 3), (2, 3)]
    elif n == 4:
        for (a, b), (c, d) in [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))]:
            yield [(a, 4), (b, 4), (c, 5), (d, 5), (4, 5)]
    elif n == 5:
        for mid in range(5):
            rest = [k for k in range(5) if k != mid]
            a = rest[0]
            for b in rest[1:]:
                c, d = [k for k in rest[1:] if k != b]
                yield [(a, 5), (b, 5), (mid, 6), (c, 7), (d, 7), (5, 6), (6, 7)]
    else:
        raise ValueError(n)


def steiner_length(terminals) -> float:
    """Minimum over full topologies of the convex program in the Steiner point positions."""
    import cvxpy as cp

    T = np.asarray(terminals, dtype=float)
    n = len(T)
    if n == 2:
        return float(np.linalg.norm(T[0] - T[1]))
    best = math.inf
    for top in _full_topologies(n):
        S = cp.Variable((n - 2, 2))
        pos = lambda k: T[k] if k < n else S[k - n]
        cost = sum(cp.norm(pos(i) - pos(j)) for i, j in top)
        prob = cp.Problem(cp.Minimize(cost))
        prob.solve(solver=cp.CVXOPT)  # default tolerances, about 1e-7 relative
        best = min(best, float(prob.value))
    return best


def mst_length(points) -> float:
    """Prim's algorithm, O(n^2), plain Python."""
    P = [np.asarray(p, dtype=float) for p in points]
    n = len(P)
    if n < 2:
        return 0.0
    inside = {0}
    dist = {k: math.dist(P[0], P[k]) for k in range(1, n)}
    total = 0.0
    while dist:
        k = min(dist, key=dist.get)
        total += dist.pop(k)
        inside.add(k)
        for j in dist:
            dist[j] = min(dist[j], math.dist(P[k], P[j]))
    return total


def enclosing_circle(points):
    """Smallest enclosing circle by trying every pair and triple (small inputs only)."""
    P = np.asarray(points, dtype=float)
    if len(P) == 1:
        return P[0].copy(), 0.0
    cands = []
    for i, j in itertools.combinations(range(len(P)), 2):
        c = 0.5 * (P[i] + P[j])
        cands.append((c, 0.5 * math.dist(P[i], P[j])))
    for i, j, k in itertools.combinations(range(len(P)), 3):
        A = 2 * np.array([P[j] - P[i], P[k] - P[i]])
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        rhs = np.array([P[j] @ P[j] - P[i] @ P[i], P[k] @ P[k] - P[i] @ P[i]])
        c = np.linalg.solve(A, rhs)
        cands.append((c, math.dist(c, P[i])))
    ok = [(c, rad) for c, rad in cands if all(math.dist(c, p) <= rad * (1 + 1e-9) + 1e-12 for p in P)]
    return min(ok, key=lambda cr: cr[1])


def square_steiner_length(side: float) -> float:
    """Steiner tree of a square: two Steiner points on a midline, (1 + sqrt 3) * side."""
    return (1 + math.sqrt(3)) * side
