"""Pure numpy implementations of the nearest-segment kernels.

Brute force over all segments, chunked over query points to bound memory.
Same contract as the compiled core: exact distances, lowest segment index
on ties.
"""
from __future__ import annotations

import numpy as np

_CHUNK = 2048


def _block(pts, a, d, dd):
    # pts (n, 2); a, d (m, 2); dd (m,)
    rel = pts[:, None, :] - a[None, :, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.einsum("nmk,mk->nm", rel, d) / dd[None, :]
    t = np.where(dd[None, :] > 0, np.clip(t, 0.0, 1.0), 0.0)
    q = a[None, :, :] + t[:, :, None] * d[None, :, :]
    diff = pts[:, None, :] - q
    dist = np.hypot(diff[..., 0], diff[..., 1])
    return dist, t


def nearest(pts, a, b, grid=None):
    pts = np.ascontiguousarray(pts, dtype=float)
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    n = len(pts)
    out_d = np.empty(n)
    out_i = np.empty(n, dtype=np.int64)
    out_t = np.empty(n)
    d = b - a
    dd = np.einsum("mk,mk->m", d, d)
    for s in range(0, n, _CHUNK):
        dist, t = _block(pts[s:s + _CHUNK], a, d, dd)
        idx = np.argmin(dist, axis=1)
        rows = np.arange(len(idx))
        out_d[s:s + _CHUNK] = dist[rows, idx]
        out_i[s:s + _CHUNK] = idx
        out_t[s:s + _CHUNK] = t[rows, idx]
    return out_d, out_i, out_t


def max_min_distance(pts, a, b, stop_above=np.inf, grid=None):
    """Largest nearest-segment distance over pts, and where it occurs.

    Returns early (with a value > stop_above) once any point exceeds
    stop_above.
    """
    pts = np.ascontiguousarray(pts, dtype=float)
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    d = b - a
    dd = np.einsum("mk,mk->m", d, d)
    best, arg = -np.inf, -1
    for s in range(0, len(pts), _CHUNK):
        dist, _ = _block(pts[s:s + _CHUNK], a, d, dd)
        m = dist.min(axis=1)
        k = int(np.argmax(m))
        if m[k] > best:
            best, arg = float(m[k]), s + k
        if best > stop_above:
            break
    return best, arg
