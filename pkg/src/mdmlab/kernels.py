"""Backend selection for the nearest-segment kernels.

The compiled core (``_ckernels``, Cython) is used when it imports; the
numpy fallback otherwise.  ``MDMLAB_PURE=1`` forces the fallback.
"""
from __future__ import annotations

import math
import os

import numpy as np

from . import _kernels_py

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on build
    _ckernels = None

HAVE_COMPILED = _ckernels is not None
BACKEND = "compiled" if HAVE_COMPILED and not os.environ.get("MDMLAB_PURE") else "python"

_MAX_CELLS_PER_AXIS = 256


def set_backend(name: str) -> None:
    global BACKEND
    if name not in ("compiled", "python"):
        raise ValueError(name)
    if name == "compiled" and not HAVE_COMPILED:
        raise RuntimeError("compiled kernels are not built")
    BACKEND = name


class SegmentIndex:
    """Exact nearest-segment queries over a fixed set of segments.

    Degenerate segments (a == b) stand for isolated points.
    """

    def __init__(self, a, b, backend: str | None = None):
        self.a = np.ascontiguousarray(a, dtype=float).reshape(-1, 2)
        self.b = np.ascontiguousarray(b, dtype=float).reshape(-1, 2)
        if len(self.a) == 0:
            raise ValueError("SegmentIndex needs at least one segment")
        self.backend = backend or BACKEND
        self._grid = self._build_grid() if self.backend == "compiled" else None

    def _build_grid(self):
        lo = np.minimum(self.a, self.b)
        hi = np.maximum(self.a, self.b)
        x0, y0 = lo.min(axis=0)
        x1, y1 = hi.max(axis=0)
        span = max(x1 - x0, y1 - y0, 1e-12)
        m = len(self.a)
        per_axis = int(min(_MAX_CELLS_PER_AXIS, max(1, math.ceil(math.sqrt(m)))))
        h = span / per_axis * (1 + 1e-9)
        nx = max(1, int(math.ceil((x1 - x0) / h)) or 1)
        ny = max(1, int(math.ceil((y1 - y0) / h)) or 1)
        i0 = np.clip(np.floor((lo[:, 0] - x0) / h).astype(np.int64), 0, nx - 1)
        i1 = np.clip(np.floor((hi[:, 0] - x0) / h).astype(np.int64), 0, nx - 1)
        j0 = np.clip(np.floor((lo[:, 1] - y0) / h).astype(np.int64), 0, ny - 1)
        j1 = np.clip(np.floor((hi[:, 1] - y0) / h).astype(np.int64), 0, ny - 1)
        # one (cell, segment) pair per cell of each segment's bounding box
        cy = j1 - j0 + 1
        count = (i1 - i0 + 1) * cy
        items = np.repeat(np.arange(m, dtype=np.int64), count)
        k = np.arange(len(items), dtype=np.int64) - np.repeat(np.cumsum(count) - count, count)
        cells = (i0[items] + k // cy[items]) * ny + j0[items] + k % cy[items]
        order = np.lexsort((items, cells))
        cells, items = cells[order], items[order]
        start = np.zeros(nx * ny + 1, dtype=np.int64)
        np.add.at(start, cells + 1, 1)
        start = np.cumsum(start)
        return (float(x0), float(y0), float(h), nx, ny, start, np.ascontiguousarray(items))

    def nearest(self, points):
        """(distance, segment index, parameter t) of the nearest segment per point."""
        pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            return np.empty(0), np.empty(0, dtype=np.int64), np.empty(0)
        if self._grid is None:
            return _kernels_py.nearest(pts, self.a, self.b)
        return _ckernels.nearest(pts, self.a, self.b, *self._grid)

    def distances(self, points) -> np.ndarray:
        return self.nearest(points)[0]

    def max_distance(self, points, stop_above: float = math.inf) -> tuple[float, int]:
        pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            return -math.inf, -1
        if self._grid is None:
            return _kernels_py.max_min_distance(pts, self.a, self.b, stop_above)
        return _ckernels.max_min_distance(pts, self.a, self.b, *self._grid, float(stop_above))
