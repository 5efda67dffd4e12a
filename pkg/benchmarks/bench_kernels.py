"""Compiled vs pure-Python nearest-segment kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the median wall time per query batch for both backends and checks
that they return the same distances.
"""
import argparse
import statistics
import time

import numpy as np

from mdmlab import kernels
from mdmlab.kernels import SegmentIndex


def polygon_segments(n, rng):
    th = np.sort(rng.uniform(0, 2 * np.pi, n))
    p = np.column_stack([np.cos(th), np.sin(th)]) * rng.uniform(0.9, 1.1, (n, 1))
    return p, np.roll(p, -1, axis=0)


def timed(fn, repeat):
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.HAVE_COMPILED:
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(0)
    print(f"{'segments':>9} {'points':>8} {'query':>8} {'python s':>10} {'compiled s':>11} {'speedup':>8}")
    for m, n in [(100, 1000), (1000, 1000), (1000, 10000), (5000, 20000)]:
        a, b = polygon_segments(m, rng)
        pts = rng.uniform(-1.3, 1.3, (n, 2))
        py = SegmentIndex(a, b, backend="python")
        cc = SegmentIndex(a, b, backend="compiled")
        assert np.allclose(py.distances(pts), cc.distances(pts), rtol=0, atol=1e-12)
        for name, q in [("nearest", lambda i: i.nearest(pts)), ("max", lambda i: i.max_distance(pts))]:
            tp = timed(lambda: q(py), args.repeat)
            tc = timed(lambda: q(cc), args.repeat)
            print(f"{m:>9} {n:>8} {name:>8} {tp:>10.4f} {tc:>11.4f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
