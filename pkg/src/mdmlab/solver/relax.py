"""Convex polish of a network with frozen combinatorics.

With the edges fixed and every sample pinned to a point (edge, t) of the
network, minimizing length under coverage is a second-order cone program:
one cone per edge (length epigraph) and one per sample (pinned point within
r of the sample).  Alternating the SOCP with re-pinning every sample to its
nearest point never loses feasibility and never increases length.
"""
from __future__ import annotations

import math

import clarabel
import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import minimum_spanning_tree

from ..energy import CompactSample, is_feasible
from ..network import Network

MARGIN = 1e-6  # relative shrink of r inside the cone program
MERGE = 1e-7  # relative merge distance for collapsed edges


def _settings() -> "clarabel.DefaultSettings":
    s = clarabel.DefaultSettings()
    s.verbose = False
    s.max_iter = 200
    s.tol_gap_abs = 1e-10
    s.tol_gap_rel = 1e-10
    s.tol_feas = 1e-10
    s.max_threads = 1
    return s


def _socp(V: np.ndarray, E: np.ndarray, pts: np.ndarray, pins_i, pins_j, pins_t, r: float):
    """Minimize sum of edge lengths; returns new vertex array or None."""
    nv, ne, ns = len(V), len(E), len(pts)
    n = 2 * nv + ne
    rows, cols, vals = [], [], []
    b = np.zeros(3 * (ne + ns))
    if ne:
        base = 3 * np.arange(ne)
        rows += [base, base + 1, base + 1, base + 2, base + 2]
        cols += [2 * nv + np.arange(ne), 2 * E[:, 0], 2 * E[:, 1], 2 * E[:, 0] + 1, 2 * E[:, 1] + 1]
        vals += [-np.ones(ne), -np.ones(ne), np.ones(ne), -np.ones(ne), np.ones(ne)]
    base = 3 * ne + 3 * np.arange(ns)
    b[base] = r
    b[base + 1] = -pts[:, 0]
    b[base + 2] = -pts[:, 1]
    for ax in (0, 1):
        rows += [base + 1 + ax, base + 1 + ax]
        cols += [2 * pins_i + ax, 2 * pins_j + ax]
        vals += [-(1 - pins_t), -pins_t]
    A = sparse.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(3 * (ne + ns), n)
    )
    q = np.concatenate([np.zeros(2 * nv), np.ones(ne)])
    P = sparse.csc_matrix((n, n))
    cones = [clarabel.SecondOrderConeT(3)] * (ne + ns)
    sol = clarabel.DefaultSolver(P, q, A, b, cones, _settings()).solve()
    if str(sol.status) not in ("Solved", "AlmostSolved"):
        return None
    x = np.asarray(sol.x)
    if not np.all(np.isfinite(x)):
        return None
    return x[: 2 * nv].reshape(nv, 2)


def spanning_tree(net: Network) -> Network:
    """Drop the longest edge of every cycle (the minimum spanning tree of the graph)."""
    if len(net.edges) < len(net.vertices):
        return net
    n = len(net.vertices)
    g = sparse.coo_matrix((net.edge_lengths, (net.edges[:, 0], net.edges[:, 1])), shape=(n, n))
    t = minimum_spanning_tree(g).tocoo()
    edges = np.sort(np.column_stack([t.row, t.col]), axis=1)
    return Network(net.vertices, edges[np.lexsort((edges[:, 1], edges[:, 0]))])


def _frame(M: CompactSample):
    shift = M.points.mean(axis=0)
    scale = max(float(np.abs(M.points - shift).max()), M.r)
    return shift, scale


def polish_once(M: CompactSample, net: Network, margin: float = MARGIN) -> Network | None:
    """One SOCP solve with samples pinned to their current nearest points."""
    shift, scale = _frame(M)
    _, k, t = net.index.nearest(M.points)
    if len(net.edges):
        pi, pj = net.edges[k, 0], net.edges[k, 1]
    else:
        pi = pj = np.zeros(len(M.points), dtype=np.int64)
        t = np.zeros(len(M.points))
    X = _socp((net.vertices - shift) / scale, net.edges, (M.points - shift) / scale,
              pi, pj, t, M.r / scale * (1 - margin))
    if X is None:
        return None
    X = X * scale + shift
    out = Network.build(X, net.edges, merge_tol=MERGE * scale)
    return spanning_tree(out)


def relax(M: CompactSample, net: Network, max_rounds: int = 30, tol_len: float | None = None) -> Network | None:
    """Alternate pinning and SOCP until the length stalls.

    Returns the best feasible network found, or None when no round produced
    a feasible one (an infeasible input that cannot be repaired in place).
    """
    tol = 1e-9 * M.r if tol_len is None else tol_len
    best = net if is_feasible(M, net) else None
    cur = net
    for _ in range(max_rounds):
        cand = None
        for margin in (MARGIN, 10 * MARGIN, 100 * MARGIN):
            c = polish_once(M, cur, margin)
            if c is not None and is_feasible(M, c):
                cand = c
                break
        if cand is None:
            break
        gain = (best.length - cand.length) if best is not None else math.inf
        if gain <= 0:
            break
        best = cur = cand
        if gain <= tol:
            break
    return best
