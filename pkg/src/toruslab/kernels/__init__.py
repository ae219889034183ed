"""Backend dispatch for the hot kernels.

Two interchangeable implementations live here: a numba-compiled lane and a
pure-numpy lane.  Set TORUSLAB_NUMBA=0 (or "false", "no", "off") to force the
numpy lane; anything else, or an absent variable, selects numba when it
imports cleanly.  Both lanes expose center_sweep, trace_batch, tube_count
with identical signatures and agree to roundoff.
"""
from __future__ import annotations

import os

import numpy as np

from . import _numpy

_FALSY = {"0", "false", "no", "off"}


def _want_numba() -> bool:
    return os.environ.get("TORUSLAB_NUMBA", "1").strip().lower() not in _FALSY


_impl = _numpy
_backend_name = "numpy"
if _want_numba():
    try:
        from . import _numba as _numba_mod
        _impl = _numba_mod
        _backend_name = "numba"
    except ImportError:
        pass


def backend() -> str:
    """Name of the active lane: "numba" or "numpy"."""
    return _backend_name


def get_impl(name: str):
    """Fetch a specific lane by name, for parity tests and benchmarks."""
    if name == "numpy":
        return _numpy
    if name == "numba":
        from . import _numba as mod
        return mod
    raise ValueError(f"unknown backend {name!r}")


def center_sweep(seed_x, seed_y, lin, ptx, pty, axes, hws, depth, tol):
    return _impl.center_sweep(seed_x, seed_y, lin, ptx, pty, axes, hws, depth, tol)


def trace_batch(seed_x, seed_y, angles, step, max_steps, closure_tol, dir_tol, min_steps):
    return _impl.trace_batch(seed_x, seed_y, angles, step, max_steps,
                             closure_tol, dir_tol, min_steps)


def tube_count(segs, cell, x0, y0, nx, ny, bptr, bidx, bx, by):
    return _impl.tube_count(segs, cell, x0, y0, nx, ny, bptr, bidx, bx, by)


def build_buckets(segs, x0, y0, width, height):
    """Index segments into a grid of unit-square buckets.

    Each segment lands in every bucket its bounding box, inflated by the tube
    radius 1 plus a guard, overlaps.  Returns (bptr, bidx, bx, by) in CSR
    layout: bucket b holds bidx[bptr[b]:bptr[b+1]].
    """
    segs = np.asarray(segs, dtype=float)
    bx = max(int(np.ceil(width)), 1)
    by = max(int(np.ceil(height)), 1)
    pad = 1.0 + 1e-9
    bucket_of = []
    seg_of = []
    for s in range(segs.shape[0]):
        xlo = min(segs[s, 0], segs[s, 2]) - pad - x0
        xhi = max(segs[s, 0], segs[s, 2]) + pad - x0
        ylo = min(segs[s, 1], segs[s, 3]) - pad - y0
        yhi = max(segs[s, 1], segs[s, 3]) + pad - y0
        i0 = max(int(np.floor(xlo)), 0)
        i1 = min(int(np.floor(xhi)), bx - 1)
        j0 = max(int(np.floor(ylo)), 0)
        j1 = min(int(np.floor(yhi)), by - 1)
        for j in range(j0, j1 + 1):
            for i in range(i0, i1 + 1):
                bucket_of.append(j * bx + i)
                seg_of.append(s)
    nb = bx * by
    if not bucket_of:
        return np.zeros(nb + 1, dtype=np.int64), np.zeros(0, dtype=np.int64), bx, by
    bucket_of = np.asarray(bucket_of, dtype=np.int64)
    seg_of = np.asarray(seg_of, dtype=np.int64)
    order = np.argsort(bucket_of, kind="stable")
    bidx = seg_of[order]
    counts = np.bincount(bucket_of, minlength=nb)
    bptr = np.zeros(nb + 1, dtype=np.int64)
    np.cumsum(counts, out=bptr[1:])
    return bptr, bidx, bx, by
