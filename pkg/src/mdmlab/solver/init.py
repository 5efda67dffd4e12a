"""Feasible starting networks."""
from __future__ import annotations

import math

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import cdist

from ..energy import CompactSample, is_feasible
from ..errors import DomainError
from ..network import Network

_DENSE_LIMIT = 3000


def _mst_edges(pts: np.ndarray) -> np.ndarray:
    n = len(pts)
    if n <= _DENSE_LIMIT:
        g = minimum_spanning_tree(cdist(pts, pts))
    else:
        from scipy.sparse import coo_matrix
        from scipy.spatial import Delaunay

        tri = Delaunay(pts)
        s = tri.simplices
        pairs = np.vstack([s[:, [0, 1]], s[:, [1, 2]], s[:, [0, 2]]])
        pairs = np.unique(np.sort(pairs, axis=1), axis=0)
        w = np.hypot(*(pts[pairs[:, 0]] - pts[pairs[:, 1]]).T)
        g = minimum_spanning_tree(coo_matrix((w, (pairs[:, 0], pairs[:, 1])), shape=(n, n)))
    g = g.tocoo()
    e = np.sort(np.column_stack([g.row, g.col]), axis=1)
    return e[np.lexsort((e[:, 1], e[:, 0]))]


def _seg_dists(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from each point in p to the nearest of the segments a-b (brute force)."""
    if len(a) == 0:
        return np.full(len(p), math.inf)
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    f = p[:, None, :] - a[None, :, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(dd > 0, np.einsum("pij,ij->pi", f, d) / dd, 0.0)
    t = np.clip(t, 0, 1)
    q = a[None] + t[..., None] * d[None]
    return np.hypot(*(p[:, None, :] - q).transpose(2, 0, 1)).min(axis=1)


def retract_leaves(M: CompactSample, net: Network, margin: float = 1e-12) -> Network:
    """Pull every leaf toward its neighbour as far as coverage allows (bisection).

    Coverage is kept with a relative ``margin`` inside r so that rounding in
    the distance kernels cannot push the result over the feasibility line.
    """
    pts = M.points
    r = M.r * (1 - margin)
    V = net.vertices.copy()
    adj = [set(a) for a in net.adjacency]
    alive = np.ones(len(V), dtype=bool)
    queue = [v for v in range(len(V)) if len(adj[v]) == 1]
    while queue:
        v = queue.pop(0)
        if not alive[v] or len(adj[v]) != 1:
            continue
        u = next(iter(adj[v]))
        edges = np.array([(i, j) for i in range(len(V)) if alive[i] for j in adj[i] if i < j])
        others = edges[~(((edges[:, 0] == v) & (edges[:, 1] == u)) | ((edges[:, 0] == u) & (edges[:, 1] == v)))]
        # samples whose coverage could depend on the leaf edge
        near = _seg_dists(pts, V[[v]], V[[u]]) <= r
        if not near.any():
            dependent = np.zeros(0, dtype=int)
        else:
            rest = _seg_dists(pts[near], V[others[:, 0]], V[others[:, 1]]) if len(others) else np.full(near.sum(), math.inf)
            rest = np.minimum(rest, np.hypot(*(pts[near] - V[u]).T))
            dependent = np.nonzero(near)[0][rest > r]
        if len(dependent) == 0:
            adj[u].discard(v)
            adj[v].clear()
            alive[v] = False
            if len(adj[u]) == 1:
                queue.append(u)
            continue
        P = pts[dependent]
        a0, b0 = V[v].copy(), V[u]
        ok = lambda s: bool(np.all(_seg_dists(P, (a0 + s * (b0 - a0))[None], b0[None]) <= r))
        lo, hi = 0.0, 1.0
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if ok(mid) else (lo, mid)
        V[v] = a0 + lo * (b0 - a0)
    keep = np.nonzero(alive)[0]
    remap = -np.ones(len(V), dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    E = [(remap[i], remap[j]) for i in keep for j in adj[i] if i < j]
    out = Network.build(V[keep], np.array(E, dtype=np.int64).reshape(-1, 2), merge_tol=2e-9 * net.scale)
    return out


def mst_network(M: CompactSample) -> Network:
    pts = np.unique(M.points, axis=0)
    if len(pts) == 1:
        return Network.point(pts[0])
    return Network(pts, _mst_edges(pts))


def star_network(M: CompactSample) -> Network:
    pts = np.unique(M.points, axis=0)
    c = pts.mean(axis=0)
    if len(pts) == 1:
        return Network.point(pts[0])
    V = np.vstack([c, pts])
    E = np.column_stack([np.zeros(len(pts), dtype=np.int64), np.arange(1, len(pts) + 1)])
    return Network.build(V, E, merge_tol=2e-9 * max(1.0, float(np.ptp(pts, axis=0).max())))


def init_network(M: CompactSample, mode: str = "mst_shrink", network: Network | None = None) -> Network:
    """A feasible network to start the search from."""
    if mode == "mst_shrink":
        net = mst_network(M)
    elif mode == "star":
        net = star_network(M)
    elif mode == "user_network":
        if network is None:
            raise DomainError("init_mode user_network needs a network")
        if not is_feasible(M, network):
            raise DomainError("the supplied network does not cover M")
        return network
    else:
        raise DomainError(f"unknown init mode {mode!r}")
    if len(net.edges) == 0:
        return net
    return retract_leaves(M, net)


def subdivide(net: Network, h: float) -> Network:
    """Split every edge longer than h into equal pieces (same point set)."""
    V = [*net.vertices]
    E = []
    for (i, j), L in zip(net.edges, net.edge_lengths):
        m = int(math.ceil(L / h - 1e-9))
        if m <= 1:
            E.append((i, j))
            continue
        a, b = net.vertices[i], net.vertices[j]
        prev = i
        for s in range(1, m):
            V.append(a + (b - a) * (s / m))
            E.append((prev, len(V) - 1))
            prev = len(V) - 1
        E.append((prev, j))
    return Network(np.array(V), np.array(E, dtype=np.int64).reshape(-1, 2))



def _chains(net: Network) -> list[list[int]]:
    """Maximal paths whose interior vertices have degree 2 (the network is a tree)."""
    adj = net.adjacency
    ends = [v for v in range(len(net.vertices)) if len(adj[v]) != 2]
    seen: set[tuple[int, int]] = set()
    out = []
    for s in ends:
        for w in adj[s]:
            if (s, w) in seen:
                continue
            path = [s, w]
            while len(adj[path[-1]]) == 2:
                a, b = adj[path[-1]]
                path.append(b if a == path[-2] else a)
            seen.add((path[-1], path[-2]))
            seen.add((s, w))
            out.append(path)
    return out


def resample(net: Network, h: float) -> Network:
    """Redistribute the vertices of each degree-2 chain at equal arc-length spacing <= h.

    Junctions and leaves stay put; the geometry changes by at most the
    sagitta of the replaced bends, so coverage may need repairing afterwards.
    """
    if len(net.edges) == 0:
        return net
    if len(net.edges) != len(net.vertices) - 1:
        return subdivide(net, h)
    V = [*net.vertices]
    E = []
    for path in _chains(net):
        P = net.vertices[path]
        seg = np.hypot(*np.diff(P, axis=0).T)
        s = np.concatenate([[0.0], np.cumsum(seg)])
        m = max(1, int(math.ceil(s[-1] / h - 1e-9)))
        prev = path[0]
        for k in range(1, m):
            q = s[-1] * k / m
            j = min(int(np.searchsorted(s, q, side="right")) - 1, len(seg) - 1)
            p = P[j] + (q - s[j]) / seg[j] * (P[j + 1] - P[j])
            V.append(p)
            E.append((prev, len(V) - 1))
            prev = len(V) - 1
        E.append((prev, path[-1]))
    return Network.build(np.array(V), np.array(E, dtype=np.int64), merge_tol=2e-9 * net.scale)
