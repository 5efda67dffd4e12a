# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled nearest-segment kernels over a uniform bucket grid.

The grid is built in Python (see kernels.SegmentIndex); every segment is
registered in each cell its bounding box touches.  Queries walk square
rings of cells outward and stop once the distance from the query point to
the boundary of the visited block exceeds the best distance found, so
pruning only ever discards provably farther segments.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport hypot, INFINITY, floor

cnp.import_array()


cdef inline double _seg_dist(double px, double py, double ax, double ay,
                             double bx, double by, double* tout) noexcept nogil:
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double dd = dx * dx + dy * dy
    cdef double t = 0.0
    if dd > 0.0:
        t = ((px - ax) * dx + (py - ay) * dy) / dd
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    tout[0] = t
    return hypot(px - (ax + t * dx), py - (ay + t * dy))


cdef inline long _clampi(long v, long lo, long hi) noexcept nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef inline void _scan_cell(double px, double py,
                            const double[:, ::1] a, const double[:, ::1] b,
                            long c, long j, long ny,
                            const long[::1] cstart, const long[::1] citems,
                            long[::1] stamp, long qid,
                            double* best, long* besti, double* bestt) noexcept nogil:
    cdef long p, s
    cdef double d, t
    if j < 0 or j >= ny:
        return
    for p in range(cstart[c], cstart[c + 1]):
        s = citems[p]
        if stamp[s] == qid:
            continue
        stamp[s] = qid
        d = _seg_dist(px, py, a[s, 0], a[s, 1], b[s, 0], b[s, 1], &t)
        if d < best[0] or (d == best[0] and s < besti[0]):
            best[0] = d
            besti[0] = s
            bestt[0] = t


cdef double _query(double px, double py,
                   const double[:, ::1] a, const double[:, ::1] b,
                   double x0, double y0, double h, long nx, long ny,
                   const long[::1] cstart, const long[::1] citems,
                   long[::1] stamp, long qid,
                   long* iout, double* tout) noexcept nogil:
    cdef long ci = _clampi(<long>floor((px - x0) / h), 0, nx - 1)
    cdef long cj = _clampi(<long>floor((py - y0) / h), 0, ny - 1)
    cdef double best = INFINITY
    cdef long besti = -1
    cdef double bestt = 0.0
    cdef long k = 0
    cdef long i, j, lo_i, hi_i, lo_j, hi_j
    cdef double lb, rx0, rx1, ry0, ry1
    while True:
        lo_i = ci - k
        hi_i = ci + k
        lo_j = cj - k
        hi_j = cj + k
        for i in range(lo_i, hi_i + 1):
            if i < 0 or i >= nx:
                continue
            _scan_cell(px, py, a, b, i * ny + lo_j, lo_j, ny, cstart, citems, stamp, qid, &best, &besti, &bestt)
            if hi_j != lo_j:
                _scan_cell(px, py, a, b, i * ny + hi_j, hi_j, ny, cstart, citems, stamp, qid, &best, &besti, &bestt)
        for j in range(lo_j + 1, hi_j):
            if j < 0 or j >= ny:
                continue
            if lo_i >= 0:
                _scan_cell(px, py, a, b, lo_i * ny + j, j, ny, cstart, citems, stamp, qid, &best, &besti, &bestt)
            if hi_i != lo_i and hi_i < nx:
                _scan_cell(px, py, a, b, hi_i * ny + j, j, ny, cstart, citems, stamp, qid, &best, &besti, &bestt)
        if lo_i <= 0 and lo_j <= 0 and hi_i >= nx - 1 and hi_j >= ny - 1:
            break
        # lower bound on the distance to any cell outside the visited block
        rx0 = x0 + lo_i * h
        rx1 = x0 + (hi_i + 1) * h
        ry0 = y0 + lo_j * h
        ry1 = y0 + (hi_j + 1) * h
        if px > rx0 and px < rx1 and py > ry0 and py < ry1:
            lb = px - rx0
            if rx1 - px < lb:
                lb = rx1 - px
            if py - ry0 < lb:
                lb = py - ry0
            if ry1 - py < lb:
                lb = ry1 - py
            if best < lb:
                break
        k += 1
    iout[0] = besti
    tout[0] = bestt
    return best


def nearest(const double[:, ::1] pts, const double[:, ::1] a, const double[:, ::1] b,
            double x0, double y0, double h, long nx, long ny,
            const long[::1] cstart, const long[::1] citems):
    cdef Py_ssize_t n = pts.shape[0]
    out_d = np.empty(n, dtype=np.float64)
    out_i = np.empty(n, dtype=np.int64)
    out_t = np.empty(n, dtype=np.float64)
    cdef double[::1] od = out_d
    cdef long[::1] oi = out_i
    cdef double[::1] ot = out_t
    stamp_arr = np.full(a.shape[0], -1, dtype=np.int64)
    cdef long[::1] stamp = stamp_arr
    cdef Py_ssize_t q
    cdef long idx
    cdef double t
    with nogil:
        for q in range(n):
            od[q] = _query(pts[q, 0], pts[q, 1], a, b, x0, y0, h, nx, ny,
                           cstart, citems, stamp, q, &idx, &t)
            oi[q] = idx
            ot[q] = t
    return out_d, out_i, out_t


def max_min_distance(const double[:, ::1] pts, const double[:, ::1] a, const double[:, ::1] b,
                     double x0, double y0, double h, long nx, long ny,
                     const long[::1] cstart, const long[::1] citems,
                     double stop_above):
    cdef Py_ssize_t n = pts.shape[0]
    stamp_arr = np.full(a.shape[0], -1, dtype=np.int64)
    cdef long[::1] stamp = stamp_arr
    cdef double best = -INFINITY
    cdef long arg = -1
    cdef Py_ssize_t q
    cdef long idx
    cdef double t, d
    with nogil:
        for q in range(n):
            d = _query(pts[q, 0], pts[q, 1], a, b, x0, y0, h, nx, ny,
                       cstart, citems, stamp, q, &idx, &t)
            if d > best:
                best = d
                arg = q
                if best > stop_above:
                    break
    return best, arg
