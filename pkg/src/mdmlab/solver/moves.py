"""Local moves on a network.

Each move is a construction that shortens a non-minimal configuration while
keeping coverage, possibly after adding a small connector near the edited
site.  Moves only build candidates; whether a candidate is kept is decided
by the search loop.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from ..energy import CompactSample, _clip_outside, classify_point, direction_cone, f_m, witness_set
from ..errors import DomainError, IndeterminateError, MoveUnavailable, NotFoundError, UnsupportedError
from ..geom import as_point, vector_angle
from ..network import (
    Network,
    crossing_points,
    find_nice_radius,
    insert_vertex,
    is_nice_radius,
    length_in_ball,
    ord_at,
)
from ..steiner import MAX_TERMINALS, TWO_PI_3, connector_constant, cube_connector, steiner_tree_small

ANGLE_SLACK = 1e-3  # radians below 2pi/3 before a junction counts as sharp
CONE_TOL = 1e-3  # dimensionless: |s(x) - proj| compared with a sum of unit vectors
CONNECTOR_MIN = 1e-6  # connector eps bounds, as multiples of r
CONNECTOR_MAX = 1e-2


def connector_eps(slack: float, r: float) -> float:
    return min(max(slack, CONNECTOR_MIN * r), CONNECTOR_MAX * r)


def _merge_tol(net: Network) -> float:
    return 1e-9 * net.scale


def _assemble(pieces_a: np.ndarray, pieces_b: np.ndarray, tol: float) -> Network:
    """Network from a bag of segments whose shared endpoints coincide up to tol."""
    n = len(pieces_a)
    V = np.vstack([pieces_a, pieces_b])
    E = np.column_stack([np.arange(n), np.arange(n, 2 * n)])
    keep = np.hypot(*(pieces_b - pieces_a).T) > tol
    if not keep.any():
        return Network.point(pieces_a[0])
    return Network.build(V, E[keep], merge_tol=tol)


def nearest_vertex(net: Network, p) -> int:
    return int(np.argmin(np.hypot(*(net.vertices - as_point(p)).T)))


def with_connector(net: Network, vi: int, eps: float, r: float) -> Network:
    """Attach the cube connector of size eps at vertex vi."""
    x = net.vertices[vi]
    tree = cube_connector(x, eps, r).tree
    pts = tree.points
    anchor = int(np.argmin(np.hypot(*(pts - x).T)))
    idx = {}
    V = [*net.vertices]
    for k in range(len(pts)):
        if k == anchor:
            idx[k] = vi
        else:
            idx[k] = len(V)
            V.append(pts[k])
    E = [*map(tuple, net.edges)] + [(idx[i], idx[j]) for i, j in tree.edges]
    return Network.build(np.array(V), np.array(E), merge_tol=_merge_tol(net))


def incident_angles(net: Network, vi: int) -> list[float]:
    x = net.vertices[vi]
    dirs = [net.vertices[w] - x for w in net.adjacency[vi]]
    return [vector_angle(u, v) for u, v in itertools.combinations(dirs, 2)]


def is_sharp(net: Network, vi: int) -> bool:
    ang = incident_angles(net, vi)
    return bool(ang) and min(ang) < TWO_PI_3 - ANGLE_SLACK


# shortcut --------------------------------------------------------------------


def move_shortcut(net: Network, M: CompactSample, chain) -> Network:
    """Replace [x2 x3] + [x3 x4] by the chord [x2 x4]; connectors at x1 and x5."""
    chain = [int(c) for c in chain]
    if len(chain) != 5 or len(set(chain)) != 5:
        raise DomainError("shortcut needs five distinct vertices")
    adj = net.adjacency
    for u, w in zip(chain, chain[1:]):
        if w not in adj[u]:
            raise DomainError(f"vertices {u} and {w} are not adjacent")
    if any(len(adj[c]) != 2 for c in chain[1:4]):
        raise DomainError("the three middle vertices of a shortcut chain must have degree 2")
    x1, x2, x3, x4, x5 = chain
    drop = {tuple(sorted((x2, x3))), tuple(sorted((x3, x4)))}
    E = [tuple(e) for e in net.edges if tuple(e) not in drop] + [(x2, x4)]
    base = Network.build(net.vertices, np.array(E), merge_tol=_merge_tol(net))
    eps = connector_eps(f_m(M, base) - M.r, M.r)
    p1, p5 = net.vertices[x1], net.vertices[x5]
    out = with_connector(base, nearest_vertex(base, p1), eps, M.r)
    return with_connector(out, nearest_vertex(out, p5), eps, M.r)


def shortcut_gain(net: Network, chain) -> float:
    _, x2, x3, x4, _ = chain
    V = net.vertices
    return math.hypot(*(V[x3] - V[x2])) + math.hypot(*(V[x4] - V[x3])) - math.hypot(*(V[x4] - V[x2]))


def shortcut_chains(net: Network) -> list[tuple[int, ...]]:
    """Every x1..x5 path whose middle three vertices have degree 2, keyed by x3."""
    adj = net.adjacency
    out = []
    for x3 in range(len(net.vertices)):
        if len(adj[x3]) != 2:
            continue
        x2, x4 = adj[x3]
        if len(adj[x2]) != 2 or len(adj[x4]) != 2:
            continue
        x1 = next(w for w in adj[x2] if w != x3)
        x5 = next(w for w in adj[x4] if w != x3)
        if len({x1, x2, x3, x4, x5}) == 5:
            out.append((x1, x2, x3, x4, x5))
    return out


# vertex perturbation ----------------------------------------------------------


def move_perturb_vertex(net: Network, M: CompactSample, vi: int, step: float,
                        tol_cone: float = CONE_TOL) -> Network:
    """Slide an energetic vertex along the direction separating s(x) from N(x)."""
    x = net.vertices[vi]
    cone = direction_cone(M, net, x)  # DomainError when x is not energetic
    if cone.separating is None or cone.gap <= tol_cone:
        raise MoveUnavailable(f"s(x) lies in N(x) at vertex {vi}")
    xp = x + step * cone.separating
    V = net.vertices.copy()
    V[vi] = xp
    try:
        base = Network(V, net.edges)
    except DomainError as exc:
        raise MoveUnavailable(str(exc)) from exc
    U = witness_set(M, net, x, step).members
    slack = float(np.hypot(*(U - xp).T).max()) - M.r if len(U) else 0.0
    return with_connector(base, vi, connector_eps(slack, M.r), M.r)


# local Steiner replacement ------------------------------------------------------


def _outside_pieces(net: Network, x, eps: float):
    _, _, oa, ob = _clip_outside(net, x, eps, closed=False)
    keep = np.hypot(*(ob - oa).T) > 0 if len(oa) else np.zeros(0, dtype=bool)
    return oa[keep], ob[keep]


def move_steiner_local(net: Network, M: CompactSample, vi: int, eps0: float | None = None,
                       keep_apex: bool | None = None) -> Network:
    """Replace the star at a sharp junction by a Steiner tree inside a nice ball.

    The terminals are the boundary crossings plus, when ``keep_apex`` holds,
    the junction itself.  By default the junction is kept exactly when it is
    energetic, since dropping it would uncover its witnesses.
    """
    if not is_sharp(net, vi):
        raise MoveUnavailable(f"vertex {vi} has no pair of branches meeting below 2pi/3")
    x = net.vertices[vi]
    if keep_apex is None:
        keep_apex = classify_point(M, net, x).energetic
    try:
        eps = find_nice_radius(net, x, M.r if eps0 is None else eps0).radius
    except (NotFoundError, IndeterminateError) as exc:
        raise MoveUnavailable(str(exc)) from exc
    A = crossing_points(net, x, eps)
    terms = np.vstack([A, x[None]]) if keep_apex else A
    if len(terms) > MAX_TERMINALS:
        raise MoveUnavailable(f"{len(terms)} terminals exceed the small-instance cap")
    if len(terms) == 2:
        tree_a, tree_b = terms[:1], terms[1:]
    else:
        try:
            tree = steiner_tree_small(terms)
        except (DomainError, UnsupportedError) as exc:
            raise MoveUnavailable(str(exc)) from exc
        segs = tree.segments
        tree_a = np.array([s[0] for s in segs])
        tree_b = np.array([s[1] for s in segs])
    oa, ob = _outside_pieces(net, x, eps)
    return _assemble(np.vstack([oa, tree_a]), np.vstack([ob, tree_b]), _merge_tol(net))


# ball replacement ------------------------------------------------------------------


def move_ball_replace(net: Network, M: CompactSample, x, eps: float) -> Network:
    """Straighten the network inside B_eps(x) into a star at x, plus a connector at x."""
    x = as_point(x)
    if not is_nice_radius(net, x, eps):
        raise MoveUnavailable(f"{eps:.3g} is not a nice radius at {tuple(x)}")
    A = crossing_points(net, x, eps)
    oa, ob = _outside_pieces(net, x, eps)
    star_a = np.repeat(x[None], len(A), axis=0)
    base = _assemble(np.vstack([oa, star_a]), np.vstack([ob, A]), _merge_tol(net))
    eps_c = connector_eps(f_m(M, base) - M.r, M.r)
    return with_connector(base, nearest_vertex(base, x), eps_c, M.r)


def ball_replace_gain(net: Network, x, eps: float, r: float) -> float:
    """Length saved by a ball replacement before any repair (negative: no gain)."""
    return length_in_ball(net, x, eps) - ord_at(net, x) * eps - connector_constant() * CONNECTOR_MIN * r
