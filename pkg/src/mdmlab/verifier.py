"""Regularity checks for a network claimed to be a (local) minimizer.

Each check returns a :class:`CheckRecord`; :func:`verify` bundles them into
a :class:`RegularityReport` whose header carries every tolerance used.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .energy import (
    CompactSample,
    Coverage,
    PointClassification,
    PointKind,
    _clip_outside,
    classify_point,
    default_tol_r,
    f_m,
)
from .errors import DomainError, IndeterminateError, NotFoundError
from .geom import AngleTolerance, as_point, cross, vector_angle
from .network import (
    Network,
    components_without,
    insert_vertex,
    is_acyclic,
    is_nice_radius,
    length_in_ball,
    local_feature_size,
    ord_at,
)
from .steiner import TWO_PI_3

ANGLE_TOL = AngleTolerance.degrees(2.0)
SLOPE_TOL = 0.05
FEAS_TOL = 1e-12
ROUNDOFF = 1e-12  # radians; lets exact fixtures pass at zero tolerance


@dataclass(frozen=True, eq=False)
class TangentEstimate:
    point: np.ndarray
    rays: np.ndarray
    residuals: np.ndarray


@dataclass(frozen=True, eq=False)
class AhlforsFit:
    point: np.ndarray
    ladder: np.ndarray
    lengths: np.ndarray
    ord: int
    slope: float
    residual: float
    trend_ok: bool

    def to_dict(self) -> dict:
        return {
            "point": [float(c) for c in self.point],
            "ladder": [float(v) for v in self.ladder],
            "lengths": [float(v) for v in self.lengths],
            "ord": self.ord,
            "slope": self.slope,
            "residual": self.residual,
            "trend_ok": self.trend_ok,
        }


@dataclass(frozen=True)
class CheckRecord:
    name: str
    passed: bool
    measured: float | None
    tolerance: float | None
    violations: tuple = ()
    enforced: bool = True
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.passed and not self.violations:
            raise DomainError(f"check {self.name} failed without a violation location")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "enforced": self.enforced,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "violations": [_jsonable(v) for v in self.violations],
            "detail": _jsonable(self.detail),
        }


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, dict):
        return {k: _jsonable(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(w) for w in v]
    if isinstance(v, np.generic):
        return v.item()
    return v


@dataclass(frozen=True)
class RegularityReport:
    header: dict
    checks: tuple[CheckRecord, ...]

    def __post_init__(self):
        names = [c.name for c in self.checks]
        if len(set(names)) != len(names):
            raise DomainError("a check may appear only once in a report")

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.enforced)

    def __getitem__(self, name: str) -> CheckRecord:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> dict:
        return {c.name: c.passed for c in self.checks}

    def to_dict(self) -> dict:
        return {
            "header": _jsonable(self.header),
            "passed": self.passed,
            "summary": self.summary(),
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _pt(p) -> list[float]:
    return [float(p[0]), float(p[1])]


# tangent rays ---------------------------------------------------------------


def estimate_tangent_rays(net: Network, x, eps_fit: float) -> TangentEstimate:
    """One ray per component of the network inside B_eps(x) minus x.

    The ray points at the component's crossing with the sphere; the residual
    is the largest angle between the ray and any vertex of the component.
    """
    x = as_point(x)
    if eps_fit <= 0 or not is_nice_radius(net, x, eps_fit):
        raise NotFoundError(f"{eps_fit:.3g} is not a nice radius at {tuple(x)}")
    net1, _ = insert_vertex(net, x)
    ia, ib, _, _ = _clip_outside(net1, x, eps_fit, closed=True)
    keep = np.hypot(*(ib - ia).T) > 0
    ia, ib = ia[keep], ib[keep]
    V = np.vstack([ia, ib])
    E = np.column_stack([np.arange(len(ia)), np.arange(len(ia), 2 * len(ia))])
    inner = Network.build(V, E, merge_tol=1e-12 * net.scale)
    xi = int(np.argmin(np.hypot(*(inner.vertices - x).T)))
    rays, res = [], []
    for comp in components_without(inner, xi):
        P = inner.vertices[comp] - x
        far = P[int(np.argmax(np.hypot(*P.T)))]
        ray = far / math.hypot(*far)
        rays.append(ray)
        res.append(max(vector_angle(p, ray) for p in P))
    order = np.lexsort((np.array([r[1] for r in rays]), np.array([r[0] for r in rays])))
    return TangentEstimate(x, np.array(rays)[order].reshape(-1, 2), np.array(res)[order])


def _vertex_rays(net: Network, vi: int) -> list[np.ndarray]:
    x = net.vertices[vi]
    return [net.vertices[w] - x for w in net.adjacency[vi]]


def _min_pair_angle(dirs) -> float:
    return min((vector_angle(u, v) for u, v in itertools.combinations(dirs, 2)), default=math.pi)


# individual checks --------------------------------------------------------------


def check_feasible(net: Network, M: CompactSample, tol: float = FEAS_TOL) -> CheckRecord:
    cov = Coverage(M, net)
    worst = int(np.argmax(cov.dist))
    ok = cov.value <= M.r + tol
    return CheckRecord("feasible", ok, cov.value, M.r + tol, () if ok else (_pt(M.points[worst]),))


def check_angles(net: Network, tol: AngleTolerance | float = ANGLE_TOL) -> CheckRecord:
    """Every pair of tangent rays meets at >= 2pi/3 - tol.

    On a piecewise-linear network the tangent rays at a vertex are its edge
    directions and every interior point of an edge has two opposite rays, so
    the vertices carry the whole check.
    """
    t = float(tol)
    bound = TWO_PI_3 - t
    worst = math.pi
    bad = []
    for vi in range(len(net.vertices)):
        if net.degrees[vi] < 2:
            continue
        a = _min_pair_angle(_vertex_rays(net, vi))
        worst = min(worst, a)
        if a < bound - ROUNDOFF:
            bad.append({"vertex": vi, "point": _pt(net.vertices[vi]), "angle_deg": math.degrees(a)})
    return CheckRecord("angles", not bad, math.degrees(worst), math.degrees(bound), tuple(bad))


def check_degree(net: Network) -> CheckRecord:
    deg = net.degrees
    if len(net.vertices) == 1:
        return CheckRecord("degree", True, 0.0, 3.0)
    bad = [{"vertex": int(v), "point": _pt(net.vertices[v]), "degree": int(deg[v])}
           for v in np.nonzero((deg < 1) | (deg > 3))[0]]
    return CheckRecord("degree", not bad, float(deg.max()), 3.0, tuple(bad))


def check_acyclic(net: Network) -> CheckRecord:
    ok = is_acyclic(net)
    excess = len(net.edges) - (len(net.vertices) - 1)
    bad = () if ok else ({"independent_cycles": int(excess)},)
    return CheckRecord("acyclic", ok, float(excess), 0.0, bad)


def self_intersections(net: Network, chunk: int = 512) -> list[np.ndarray]:
    """Points where two non-adjacent edges touch (proper crossings and overlaps)."""
    E = net.edges
    if len(E) < 2:
        return []
    a, b = net.seg_a, net.seg_b
    d = b - a
    out = []
    for s in range(0, len(E), chunk):
        sl = slice(s, s + chunk)
        A, D, Es = a[sl, None], d[sl, None], E[sl, None]
        adjacent = (Es[..., 0] == E[None, :, 0]) | (Es[..., 0] == E[None, :, 1]) | \
                   (Es[..., 1] == E[None, :, 0]) | (Es[..., 1] == E[None, :, 1])
        later = np.arange(s, min(s + chunk, len(E)))[:, None] < np.arange(len(E))[None, :]
        denom = D[..., 0] * d[None, :, 1] - D[..., 1] * d[None, :, 0]
        w = a[None] - A
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (w[..., 0] * d[None, :, 1] - w[..., 1] * d[None, :, 0]) / denom
            u = (w[..., 0] * D[..., 1] - w[..., 1] * D[..., 0]) / denom
        hit = later & ~adjacent & (denom != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
        # parallel overlaps: collinear and sharing a stretch
        coll = later & ~adjacent & (denom == 0) & (np.abs(w[..., 0] * D[..., 1] - w[..., 1] * D[..., 0]) <= 1e-12 * net.scale ** 2)
        for i, j in zip(*np.nonzero(hit)):
            out.append(a[s + i] + t[i, j] * d[s + i])
        for i, j in zip(*np.nonzero(coll)):
            dd = float(d[s + i] @ d[s + i])
            p = sorted([float((a[j] - a[s + i]) @ d[s + i]) / dd, float((b[j] - a[s + i]) @ d[s + i]) / dd])
            if p[1] >= 0 and p[0] <= 1:
                out.append(a[s + i] + max(p[0], 0.0) * d[s + i])
    return out


def check_simple(net: Network, enforced: bool = False) -> CheckRecord:
    pts = self_intersections(net)
    return CheckRecord("simple", not pts, float(len(pts)), 0.0, tuple(_pt(p) for p in pts), enforced=enforced)


def _fit_ladder(net: Network, x) -> list[float]:
    rho = 0.5 * local_feature_size(net, x)
    return [rho / 2 ** k for k in range(4)]


def check_ahlfors(net: Network, x_sites=None, ladder=None, tol: float = SLOPE_TOL) -> tuple[CheckRecord, list[AhlforsFit]]:
    """Length inside B_eps(x) against eps along a ladder: slope should be ord(x)."""
    if len(net.edges) == 0:
        return CheckRecord("ahlfors", True, 0.0, tol), []
    sites = net.vertices if x_sites is None else np.asarray(x_sites, dtype=float).reshape(-1, 2)
    fits, bad = [], []
    worst = 0.0
    for x in sites:
        lad = np.array(sorted(ladder if ladder is not None else _fit_ladder(net, x), reverse=True), dtype=float)
        if len(lad) < 2 or np.any(np.diff(lad) >= 0) or lad[-1] <= 0:
            raise DomainError("ladder must be positive and strictly decreasing")
        L = np.array([length_in_ball(net, x, e) for e in lad])
        o = ord_at(net, x)
        slope = float(L @ lad / (lad @ lad))
        residual = float(np.sqrt(np.mean((L - slope * lad) ** 2)))
        dev = np.abs(L / lad - o)
        trend = bool(np.all(np.diff(dev) <= 1e-9 * max(1.0, o)))
        fit = AhlforsFit(as_point(x), lad, L, o, slope, residual, trend)
        fits.append(fit)
        rel = abs(slope - o) / max(o, 1)
        worst = max(worst, rel)
        if rel > tol or not trend:
            bad.append({"point": _pt(x), "ord": o, "slope": slope, "trend_ok": trend})
    return CheckRecord("ahlfors", not bad, worst, tol, tuple(bad), detail={"sites": len(fits)}), fits


def _classify_vertices(net: Network, M: CompactSample, tol_r: float, rho_ladder=None,
                       coverage: Coverage | None = None) -> list[PointClassification]:
    cov = coverage or Coverage(M, net)
    return [classify_point(M, net, v, rho_ladder=rho_ladder, tol_r=tol_r, coverage=cov) for v in net.vertices]


def check_tripods(net: Network, M: CompactSample, tol: AngleTolerance | float = ANGLE_TOL,
                  tol_r: float | None = None, classes: list[PointClassification] | None = None) -> CheckRecord:
    """Junctions are regular non-energetic tripods; isolated energetic points have straight branches."""
    t = float(tol)
    tol_r = default_tol_r(M.r) if tol_r is None else tol_r
    classes = classes if classes is not None else _classify_vertices(net, M, tol_r)
    bad = []
    worst = 0.0
    for vi, cls in enumerate(classes):
        x = net.vertices[vi]
        if net.degrees[vi] == 3:
            dirs = _vertex_rays(net, vi)
            dev = max(abs(vector_angle(u, v) - TWO_PI_3) for u, v in itertools.combinations(dirs, 2))
            worst = max(worst, dev)
            if cls.energetic:
                bad.append({"vertex": vi, "point": _pt(x), "reason": "energetic junction"})
            if dev > t + ROUNDOFF:
                bad.append({"vertex": vi, "point": _pt(x), "reason": "irregular tripod", "deviation_deg": math.degrees(dev)})
        elif cls.kind is PointKind.ISOLATED and net.degrees[vi] >= 1:
            fit = 0.5 * local_feature_size(net, x)
            try:
                est = estimate_tangent_rays(net, x, fit)
            except (NotFoundError, IndeterminateError):
                bad.append({"vertex": vi, "point": _pt(x), "reason": "no nice radius"})
                continue
            r = float(est.residuals.max()) if len(est.residuals) else 0.0
            worst = max(worst, r)
            if r > t:
                bad.append({"vertex": vi, "point": _pt(x), "reason": "curved branch", "residual_deg": math.degrees(r)})
    return CheckRecord("tripods", not bad, math.degrees(worst), math.degrees(t), tuple(bad))


def check_empty_balls(net: Network, M: CompactSample, tol_r: float | None = None,
                      classes: list[PointClassification] | None = None) -> CheckRecord:
    """Every corresponding point y of an energetic point keeps the open r-ball clear of the network."""
    tol_r = default_tol_r(M.r) if tol_r is None else tol_r
    classes = classes if classes is not None else _classify_vertices(net, M, tol_r)
    bad = []
    worst = math.inf
    for cls in classes:
        if not cls.energetic or len(cls.corresponding) == 0:
            continue
        d = net.distance(cls.corresponding)
        worst = min(worst, float(d.min()))
        for y, dy in zip(cls.corresponding, d):
            if dy < M.r - tol_r:
                bad.append({"point": _pt(cls.point), "witness": _pt(y), "distance": float(dy)})
    measured = None if math.isinf(worst) else worst
    return CheckRecord("empty_balls", not bad, measured, M.r - tol_r, tuple(bad))


def count_branching(net: Network) -> tuple[int, CheckRecord]:
    n = int((net.degrees == 3).sum())
    density = n / net.length if net.length > 0 else 0.0
    rec = CheckRecord("branching", True, float(n), None, (), enforced=False,
                      detail={"count": n, "per_unit_length": density,
                              "points": [_pt(p) for p in net.vertices[net.degrees == 3]]})
    return n, rec


def _chains(net: Network, members: set[int]) -> list[list[int]]:
    """Maximal paths through degree-2 vertices drawn from ``members``."""
    adj = net.adjacency
    seen: set[int] = set()
    out = []
    for v in sorted(members):
        if v in seen or net.degrees[v] != 2:
            continue
        path = [v]
        seen.add(v)
        for direction in (0, 1):
            prev, cur = v, adj[v][direction]
            ext = []
            while cur in members and cur not in seen and net.degrees[cur] == 2:
                ext.append(cur)
                seen.add(cur)
                prev, cur = cur, next(w for w in adj[cur] if w != prev)
            path = path + ext if direction == 0 else ext[::-1] + path
        out.append(path)
    return out


def check_convex_energetic_arcs(net: Network, M: CompactSample, tol_r: float | None = None, rho_ladder=None,
                                classes: list[PointClassification] | None = None) -> CheckRecord:
    """Arcs of non-isolated energetic vertices with one-sided witnesses turn one way only."""
    tol_r = default_tol_r(M.r) if tol_r is None else tol_r
    classes = classes if classes is not None else _classify_vertices(net, M, tol_r, rho_ladder)
    members = {i for i, c in enumerate(classes) if c.kind is PointKind.NON_ISOLATED}
    V = net.vertices
    bad = []
    arcs = 0
    for path in _chains(net, members):
        if len(path) < 2:
            continue
        ext = [next(w for w in net.adjacency[path[0]] if w not in path[1:2])] + path + \
              [next(w for w in net.adjacency[path[-1]] if w not in path[-2:-1])]
        sides = set()
        for k in range(1, len(ext) - 1):
            tan = V[ext[k + 1]] - V[ext[k - 1]]
            for y in classes[ext[k]].corresponding:
                c = cross(tan, y - V[ext[k]])
                if c != 0:
                    sides.add(c > 0)
        if len(sides) != 1:
            continue
        arcs += 1
        turns = [cross(V[ext[k]] - V[ext[k - 1]], V[ext[k + 1]] - V[ext[k]]) for k in range(1, len(ext) - 1)]
        tiny = 1e-12 * net.scale ** 2
        signs = {t > 0 for t in turns if abs(t) > tiny}
        if len(signs) > 1:
            bad.append({"arc": [_pt(V[v]) for v in path]})
    return CheckRecord("convexity", not bad, float(arcs), 0.0, tuple(bad))


# report -----------------------------------------------------------------------------


def verify(net: Network, M: CompactSample, angle_tol: AngleTolerance | float = ANGLE_TOL,
           slope_tol: float = SLOPE_TOL, tol_r: float | None = None, convexity: bool = False,
           strict: bool = False) -> RegularityReport:
    """Run every check; ``strict`` also enforces the self-intersection check."""
    tol_r = default_tol_r(M.r) if tol_r is None else tol_r
    cov = Coverage(M, net)
    classes = _classify_vertices(net, M, tol_r, coverage=cov)
    ahl, fits = check_ahlfors(net, tol=slope_tol)
    checks = [
        check_feasible(net, M),
        check_angles(net, angle_tol),
        check_degree(net),
        check_acyclic(net),
        ahl,
        check_tripods(net, M, angle_tol, tol_r, classes),
        check_empty_balls(net, M, tol_r, classes),
        check_simple(net, enforced=strict),
        count_branching(net)[1],
    ]
    if convexity:
        checks.append(check_convex_energetic_arcs(net, M, tol_r, classes=classes))
    kinds = {k.value: sum(c.kind is k for c in classes) for k in PointKind}
    header = {
        "angle_tol_deg": math.degrees(float(angle_tol)),
        "slope_tol": slope_tol,
        "tol_r": tol_r,
        "r": M.r,
        "samples": len(M),
        "sample_covering_radius": M.covering_radius(),
        "energy": f_m(M, net),
        "length": net.length,
        "vertices": len(net.vertices),
        "edges": len(net.edges),
        "vertex_kinds": kinds,
        "strict": strict,
    }
    return RegularityReport(header, tuple(checks))
