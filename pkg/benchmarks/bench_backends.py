#!/usr/bin/env python3
"""Timing comparison between the numba and numpy kernel lanes.

Runs the three hot kernels on representative workloads: a center-bundle
sweep over a 256x256 grid, a batch of line-field traces, and a tube-area
raster of an iterated curve.  Each lane gets a warmup call first so numba
compilation never counts against the timed runs.

Usage: python benchmarks/bench_backends.py [--runs N]
"""
import argparse
import time

import numpy as np

from toruslab.kernels import build_buckets, get_impl


def make_workloads():
    lin = np.array([[3.0, 0.0], [0.0, 1.0]])
    ptx = np.array([[0.0, 1.0, 0.05, 0.0]])
    pty = np.array([[1.0, 0.0, 0.0, 0.05]])
    axes = np.zeros((1, 1))
    hws = np.full((1, 1), np.pi / 8)

    n = 128
    t = (np.arange(n) + 0.5) / n
    gx, gy = np.meshgrid(t, t)
    sweep = dict(seed_x=gx.ravel(), seed_y=gy.ravel(), lin=lin, ptx=ptx,
                 pty=pty, axes=axes, hws=hws, depth=60, tol=1e-10)

    rng = np.random.default_rng(42)
    k = 64
    angles = np.full((k, k), 0.5 * np.pi)
    angles += 0.05 * np.sin(2 * np.pi * (np.arange(k) + 0.5)[None, :] / k)
    trace = dict(seed_x=rng.random(16), seed_y=rng.random(16), angles=angles,
                 step=1e-3, max_steps=4000, closure_tol=1e-5, dir_tol=1e-3,
                 min_steps=500)

    # snaking polyline, ~40 length units
    s = np.linspace(0.0, 40.0, 20_000)
    pts = np.stack([s, 0.4 * np.sin(0.8 * s)], axis=1)
    segs = np.concatenate([pts[:-1], pts[1:]], axis=1)
    x0 = float(pts[:, 0].min()) - 1.02
    y0 = float(pts[:, 1].min()) - 1.02
    x1 = float(pts[:, 0].max()) + 1.02
    y1 = float(pts[:, 1].max()) + 1.02
    cell = 0.02
    bptr, bidx, bx, by = build_buckets(segs, x0, y0, x1 - x0, y1 - y0)
    tube = dict(segs=segs, cell=cell, x0=x0, y0=y0,
                nx=int(np.ceil((x1 - x0) / cell)),
                ny=int(np.ceil((y1 - y0) / cell)),
                bptr=bptr, bidx=bidx, bx=bx, by=by)
    return {"center_sweep": sweep, "trace_batch": trace, "tube_count": tube}


def bench(fn, kwargs, runs):
    fn(**kwargs)  # warmup, includes JIT for the numba lane
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn(**kwargs)
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=3,
                        help="timed repetitions per kernel (best is reported)")
    args = parser.parse_args()

    workloads = make_workloads()
    lanes = {}
    for lane in ("numpy", "numba"):
        try:
            lanes[lane] = get_impl(lane)
        except ImportError:
            print(f"({lane} lane unavailable, skipping)")

    print(f"{'kernel':<14} " + " ".join(f"{ln + ' (s)':>12}" for ln in lanes)
          + ("     speedup" if len(lanes) == 2 else ""))
    print("-" * (15 + 13 * len(lanes) + 12))
    for name, kwargs in workloads.items():
        row = [f"{name:<14}"]
        results = {}
        for lane, impl in lanes.items():
            results[lane] = bench(getattr(impl, name), kwargs, args.runs)
            row.append(f"{results[lane]:>12.4f}")
        if len(results) == 2:
            row.append(f"{results['numpy'] / results['numba']:>10.1f}x")
        print(" ".join(row))


if __name__ == "__main__":
    main()
