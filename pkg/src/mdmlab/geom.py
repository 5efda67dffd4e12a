"""Planar primitives.

Points are anything convertible to a length-2 float array.  Angles are
computed from atan2(|cross|, dot), which stays accurate near 0 and pi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

ZERO_TOL = 1e-15


def as_point(p) -> np.ndarray:
    a = np.asarray(p, dtype=float).reshape(2)
    if not np.all(np.isfinite(a)):
        raise DomainError(f"non-finite point {p!r}")
    return a


@dataclass(frozen=True)
class Ray:
    origin: tuple[float, float]
    direction: tuple[float, float]

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        if abs(math.hypot(*d) - 1.0) > 1e-12:
            raise DomainError("ray direction must be a unit vector")

    @classmethod
    def through(cls, origin, point) -> "Ray":
        o, p = as_point(origin), as_point(point)
        return cls(tuple(o), tuple(unit(p - o)))


@dataclass(frozen=True)
class AngleTolerance:
    radians: float

    def __post_init__(self):
        if not (0.0 <= self.radians < math.pi / 2):
            raise DomainError("angle tolerance must lie in [0, pi/2)")

    @classmethod
    def degrees(cls, deg: float) -> "AngleTolerance":
        return cls(math.radians(deg))

    def __float__(self) -> float:
        return self.radians


def _tol(t) -> float:
    return float(t.radians if isinstance(t, AngleTolerance) else AngleTolerance(float(t)).radians)


def norm(v) -> float:
    return float(math.hypot(v[0], v[1]))


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = math.hypot(v[0], v[1])
    if n <= ZERO_TOL:
        raise DomainError("zero vector has no direction")
    return v / n


def cross(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def vector_angle(u, v) -> float:
    """Angle between two non-zero vectors, in [0, pi]."""
    if norm(u) <= ZERO_TOL or norm(v) <= ZERO_TOL:
        raise DomainError("angle with a zero vector is undefined")
    return math.atan2(abs(cross(u, v)), float(u[0] * v[0] + u[1] * v[1]))


def angle(a, b, c) -> float:
    """The angle ABC, i.e. between vectors BA and BC."""
    a, b, c = as_point(a), as_point(b), as_point(c)
    try:
        return vector_angle(a - b, c - b)
    except DomainError:
        raise DomainError("angle(A, B, C) needs A != B and C != B") from None


def line_angle(l1, l2) -> float:
    """Acute angle between lines given as point pairs ((p, q), (p', q'))."""
    (p1, q1), (p2, q2) = l1, l2
    u = as_point(q1) - as_point(p1)
    v = as_point(q2) - as_point(p2)
    try:
        t = vector_angle(u, v)
    except DomainError:
        raise DomainError("a line needs two distinct points") from None
    return min(t, math.pi - t)


def is_gamma_orthogonal(u, v, gamma) -> bool:
    t = vector_angle(u, v)
    return abs(min(t, math.pi - t) - math.pi / 2) <= _tol(gamma)


def is_gamma_parallel(u, v, gamma) -> bool:
    """Lines spanned by u and v differ by at most gamma."""
    t = vector_angle(u, v)
    return min(t, math.pi - t) <= _tol(gamma)


def dist_point_segment(p, a, b) -> float:
    p, a, b = as_point(p), as_point(a), as_point(b)
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return norm(p - a)
    t = min(1.0, max(0.0, float((p - a) @ d) / dd))
    return norm(p - (a + t * d))


def closest_point_segment(p, a, b) -> tuple[np.ndarray, float]:
    """Closest point of [ab] to p, with its parameter t in [0, 1]."""
    p, a, b = as_point(p), as_point(a), as_point(b)
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return a.copy(), 0.0
    t = min(1.0, max(0.0, float((p - a) @ d) / dd))
    return a + t * d, t


def segment_circle_params(a, b, center, radius) -> list[float]:
    """Parameters t in [0, 1] where the segment a + t(b - a) meets the circle."""
    a, b, c = as_point(a), as_point(b), as_point(center)
    d = b - a
    f = a - c
    A = float(d @ d)
    if A == 0.0:
        return [0.0] if abs(norm(f) - radius) <= 1e-12 * max(1.0, radius) else []
    B = 2.0 * float(f @ d)
    C = float(f @ f) - radius * radius
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    # stable quadratic roots
    q = -0.5 * (B + math.copysign(sq, B)) if B != 0 else -0.5 * sq
    roots = []
    if q != 0:
        roots.extend([q / A, C / q])
    else:
        roots.append(0.0)
    out = sorted({min(1.0, max(0.0, t)) for t in roots if -1e-12 <= t <= 1 + 1e-12})
    return out


def clip_segment_to_disk(a, b, center, radius) -> tuple[float, float] | None:
    """Parameter interval of [ab] lying in the closed disk, or None."""
    a, b, c = as_point(a), as_point(b), as_point(center)
    d = b - a
    f = a - c
    A = float(d @ d)
    C = float(f @ f) - radius * radius
    if A == 0.0:
        return (0.0, 1.0) if C <= 0 else None
    B = 2.0 * float(f @ d)
    disc = B * B - 4 * A * C
    if disc <= 0:
        return None
    sq = math.sqrt(disc)
    t0 = (-B - sq) / (2 * A)
    t1 = (-B + sq) / (2 * A)
    lo, hi = max(0.0, t0), min(1.0, t1)
    if lo >= hi:
        return None
    return lo, hi


def rotate(v, theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def _circle2(a, b):
    c = 0.5 * (a + b)
    return c, norm(a - c)


def _circle3(a, b, c):
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) <= ZERO_TOL:
        # collinear: the widest pair decides
        pairs = [(a, b), (a, c), (b, c)]
        p, q = max(pairs, key=lambda pq: norm(pq[0] - pq[1]))
        return _circle2(p, q)
    s2 = lambda p: p[0] ** 2 + p[1] ** 2
    ux = (s2(a) * (by - cy) + s2(b) * (cy - ay) + s2(c) * (ay - by)) / d
    uy = (s2(a) * (cx - bx) + s2(b) * (ax - cx) + s2(c) * (bx - ax)) / d
    u = np.array([ux, uy])
    return u, max(norm(a - u), norm(b - u), norm(c - u))


def enclosing_circle(points, seed: int = 0) -> tuple[np.ndarray, float]:
    """Smallest circle containing the points (randomized incremental, expected linear)."""
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(p) == 0:
        raise DomainError("no points")
    p = p[np.random.default_rng(seed).permutation(len(p))]
    inside = lambda q, c, rad: norm(q - c) <= rad * (1 + 1e-12) + 1e-15
    c, rad = p[0].copy(), 0.0
    for i in range(1, len(p)):
        if inside(p[i], c, rad):
            continue
        c, rad = p[i].copy(), 0.0
        for j in range(i):
            if inside(p[j], c, rad):
                continue
            c, rad = _circle2(p[i], p[j])
            for k in range(j):
                if not inside(p[k], c, rad):
                    c, rad = _circle3(p[i], p[j], p[k])
    return c, rad
