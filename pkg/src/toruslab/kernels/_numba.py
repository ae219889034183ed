"""Numba backend for the hot kernels.

Scalar loops compiled with @njit; per-element arithmetic mirrors
kernels._numpy expression for expression so both lanes agree to roundoff.
Kernels stay single-threaded: reduction order is part of the byte-level
reproducibility contract.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

PI = np.pi
TWO_PI = 2.0 * np.pi
AMBIGUOUS_DOT = 0.05


@njit(cache=True)
def _trig_value(terms, x, y):
    out = 0.0
    for k in range(terms.shape[0]):
        phase = TWO_PI * (terms[k, 0] * x + terms[k, 1] * y)
        out += terms[k, 2] * math.sin(phase) + terms[k, 3] * math.cos(phase)
    return out


@njit(cache=True)
def _trig_dx(terms, x, y):
    out = 0.0
    for k in range(terms.shape[0]):
        phase = TWO_PI * (terms[k, 0] * x + terms[k, 1] * y)
        out += TWO_PI * terms[k, 0] * (terms[k, 2] * math.cos(phase) - terms[k, 3] * math.sin(phase))
    return out


@njit(cache=True)
def _trig_dy(terms, x, y):
    out = 0.0
    for k in range(terms.shape[0]):
        phase = TWO_PI * (terms[k, 0] * x + terms[k, 1] * y)
        out += TWO_PI * terms[k, 1] * (terms[k, 2] * math.cos(phase) - terms[k, 3] * math.sin(phase))
    return out


@njit(cache=True)
def _angle_interp(angles, x, y):
    h, w = angles.shape
    u = x * w - 0.5
    v = y * h - 0.5
    i0 = int(math.floor(u))
    j0 = int(math.floor(v))
    fu = u - i0
    fv = v - j0
    i0m, i1m = i0 % w, (i0 + 1) % w
    j0m, j1m = j0 % h, (j0 + 1) % h
    c = ((1 - fu) * (1 - fv) * math.cos(2.0 * angles[j0m, i0m])
         + fu * (1 - fv) * math.cos(2.0 * angles[j0m, i1m])
         + (1 - fu) * fv * math.cos(2.0 * angles[j1m, i0m])
         + fu * fv * math.cos(2.0 * angles[j1m, i1m]))
    s = ((1 - fu) * (1 - fv) * math.sin(2.0 * angles[j0m, i0m])
         + fu * (1 - fv) * math.sin(2.0 * angles[j0m, i1m])
         + (1 - fu) * fv * math.sin(2.0 * angles[j1m, i0m])
         + fu * fv * math.sin(2.0 * angles[j1m, i1m]))
    return (0.5 * math.atan2(s, c)) % PI


@njit(cache=True)
def _scalar_interp(values, x, y):
    h, w = values.shape
    u = x * w - 0.5
    v = y * h - 0.5
    i0 = int(math.floor(u))
    j0 = int(math.floor(v))
    fu = u - i0
    fv = v - j0
    i0m, i1m = i0 % w, (i0 + 1) % w
    j0m, j1m = j0 % h, (j0 + 1) % h
    return ((1 - fu) * (1 - fv) * values[j0m, i0m] + fu * (1 - fv) * values[j0m, i1m]
            + (1 - fu) * fv * values[j1m, i0m] + fu * fv * values[j1m, i1m])


@njit(cache=True)
def _arc_between(b1, b2, m):
    bb1, bb2, mm = 2.0 * b1, 2.0 * b2, 2.0 * m
    span = (bb2 - bb1) % TWO_PI
    pos = (mm - bb1) % TWO_PI
    if pos <= span:
        c2 = bb1 + 0.5 * span
        h2 = 0.5 * span
    else:
        c2 = bb2 + 0.5 * (TWO_PI - span)
        h2 = 0.5 * (TWO_PI - span)
    return (0.5 * c2) % PI, 0.5 * h2


@njit(cache=True)
def _intersect(ca, ha, cb, hb):
    ca2, cb2 = 2.0 * ca, 2.0 * cb
    ha2, hb2 = 2.0 * ha, 2.0 * hb
    d = (cb2 - ca2 + PI) % TWO_PI - PI
    lo = max(-ha2, d - hb2)
    hi = min(ha2, d + hb2)
    if lo > hi:
        if ha2 <= hb2:
            return (0.5 * ca2) % PI, 0.5 * ha2
        return (0.5 * cb2) % PI, 0.5 * hb2
    c2 = ca2 + 0.5 * (lo + hi)
    h2 = 0.5 * (hi - lo)
    return (0.5 * c2) % PI, 0.5 * h2


@njit(cache=True)
def center_sweep(seed_x, seed_y, lin, ptx, pty, axes, hws, depth, tol):
    n = seed_x.shape[0]
    out_a = np.empty(n)
    out_w = np.empty(n)
    for i in range(n):
        px = seed_x[i] % 1.0
        py = seed_y[i] % 1.0
        ca = _angle_interp(axes, px, py)
        ch = _scalar_interp(hws, px, py)
        ic = (ca + 0.5 * PI) % PI
        ih = 0.5 * PI - ch
        m00, m01, m10, m11 = 1.0, 0.0, 0.0, 1.0
        for _ in range(depth):
            if 2.0 * ih < tol:
                break
            j00 = lin[0, 0] + _trig_dx(ptx, px, py)
            j01 = lin[0, 1] + _trig_dy(ptx, px, py)
            j10 = lin[1, 0] + _trig_dx(pty, px, py)
            j11 = lin[1, 1] + _trig_dy(pty, px, py)
            det = j00 * j11 - j01 * j10
            i00 = j11 / det
            i01 = -j01 / det
            i10 = -j10 / det
            i11 = j00 / det
            n00 = m00 * i00 + m01 * i10
            n01 = m00 * i01 + m01 * i11
            n10 = m10 * i00 + m11 * i10
            n11 = m10 * i01 + m11 * i11
            norm = max(max(abs(n00), abs(n01)), max(abs(n10), abs(n11)))
            m00, m01, m10, m11 = n00 / norm, n01 / norm, n10 / norm, n11 / norm

            xn = (lin[0, 0] * px + lin[0, 1] * py + _trig_value(ptx, px, py)) % 1.0
            yn = (lin[1, 0] * px + lin[1, 1] * py + _trig_value(pty, px, py)) % 1.0
            px, py = xn, yn

            ta = (_angle_interp(axes, px, py) + 0.5 * PI) % PI
            th = 0.5 * PI - _scalar_interp(hws, px, py)
            t1 = ta - th
            v1x, v1y = math.cos(t1), math.sin(t1)
            d1 = math.atan2(m10 * v1x + m11 * v1y, m00 * v1x + m01 * v1y) % PI
            t2 = ta + th
            v2x, v2y = math.cos(t2), math.sin(t2)
            d2 = math.atan2(m10 * v2x + m11 * v2y, m00 * v2x + m01 * v2y) % PI
            vmx, vmy = math.cos(ta), math.sin(ta)
            dm = math.atan2(m10 * vmx + m11 * vmy, m00 * vmx + m01 * vmy) % PI
            pa, ph = _arc_between(d1, d2, dm)
            ic, ih = _intersect(ic, ih, pa, ph)
        out_a[i] = ic % PI
        out_w[i] = 2.0 * ih
    return out_a, out_w


@njit(cache=True)
def _oriented_at(angles, x, y, pdx, pdy):
    a = _angle_interp(angles, x % 1.0, y % 1.0)
    vx, vy = math.cos(a), math.sin(a)
    dot = vx * pdx + vy * pdy
    amb = abs(dot) < AMBIGUOUS_DOT
    if dot < 0.0:
        vx, vy = -vx, -vy
    return vx, vy, amb


@njit(cache=True)
def trace_batch(seed_x, seed_y, angles, step, max_steps, closure_tol, dir_tol, min_steps):
    n = seed_x.shape[0]
    paths = np.zeros((n, max_steps + 1, 2))
    npts = np.ones(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    klass = np.zeros((n, 2), dtype=np.int64)
    cos_dir = math.cos(dir_tol)

    for i in range(n):
        x0, y0 = seed_x[i], seed_y[i]
        paths[i, 0, 0] = x0
        paths[i, 0, 1] = y0
        a0 = _angle_interp(angles, x0 % 1.0, y0 % 1.0)
        dx0, dy0 = math.cos(a0), math.sin(a0)
        dx, dy = dx0, dy0
        x, y = x0, y0
        for k in range(1, max_steps + 1):
            k1x, k1y, a1 = _oriented_at(angles, x, y, dx, dy)
            k2x, k2y, a2 = _oriented_at(angles, x + 0.5 * step * k1x, y + 0.5 * step * k1y, k1x, k1y)
            k3x, k3y, a3 = _oriented_at(angles, x + 0.5 * step * k2x, y + 0.5 * step * k2y, k2x, k2y)
            k4x, k4y, a4 = _oriented_at(angles, x + step * k3x, y + step * k3y, k3x, k3y)
            xn = x + (step / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            yn = y + (step / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            dnx, dny, a5 = _oriented_at(angles, xn, yn, dx, dy)

            paths[i, k, 0] = xn
            paths[i, k, 1] = yn
            npts[i] = k + 1
            if a1 or a2 or a3 or a4 or a5:
                status[i] = 2
                break

            if k >= min_steps:
                ddx = xn - x0
                ddy = yn - y0
                nvx = math.floor(ddx + 0.5)
                nvy = math.floor(ddy + 0.5)
                rx = ddx - nvx
                ry = ddy - nvy
                if math.hypot(rx, ry) <= 1.5 * step:
                    wx = x0 + nvx
                    wy = y0 + nvy
                    abx = xn - x
                    aby = yn - y
                    denom = abx * abx + aby * aby
                    if denom == 0.0:
                        denom = 1.0
                    t = ((wx - x) * abx + (wy - y) * aby) / denom
                    t = min(max(t, 0.0), 1.0)
                    qx = x + t * abx
                    qy = y + t * aby
                    dist = math.hypot(wx - qx, wy - qy)
                    dirok = dnx * dx0 + dny * dy0 >= cos_dir
                    if dist < closure_tol and dirok and (nvx != 0.0 or nvy != 0.0):
                        paths[i, k, 0] = wx
                        paths[i, k, 1] = wy
                        status[i] = 1
                        klass[i, 0] = np.int64(nvx)
                        klass[i, 1] = np.int64(nvy)
                        break
            x, y, dx, dy = xn, yn, dnx, dny
    return paths, npts, status, klass


@njit(cache=True)
def tube_count(segs, cell, x0, y0, nx, ny, bptr, bidx, bx, by):
    count = 0
    inv = 1.0 / cell
    for bj in range(by):
        jlo = int(math.ceil(bj * inv - 0.5 - 1e-12))
        jhi = int(math.ceil((bj + 1) * inv - 0.5 - 1e-12))
        if jlo < 0:
            jlo = 0
        if jhi > ny:
            jhi = ny
        if jlo >= jhi:
            continue
        for bi in range(bx):
            b = bj * bx + bi
            s0, s1 = bptr[b], bptr[b + 1]
            if s0 == s1:
                continue
            ilo = int(math.ceil(bi * inv - 0.5 - 1e-12))
            ihi = int(math.ceil((bi + 1) * inv - 0.5 - 1e-12))
            if ilo < 0:
                ilo = 0
            if ihi > nx:
                ihi = nx
            if ilo >= ihi:
                continue
            for ii in range(ilo, ihi):
                cx = x0 + (ii + 0.5) * cell
                for jj in range(jlo, jhi):
                    cy = y0 + (jj + 0.5) * cell
                    best = 1e300
                    for si in range(s0, s1):
                        s = bidx[si]
                        ax = segs[s, 0]
                        ay = segs[s, 1]
                        ux = segs[s, 2] - ax
                        uy = segs[s, 3] - ay
                        ll = ux * ux + uy * uy
                        if ll == 0.0:
                            ll = 1.0
                        t = ((cx - ax) * ux + (cy - ay) * uy) / ll
                        if t < 0.0:
                            t = 0.0
                        elif t > 1.0:
                            t = 1.0
                        ddx = cx - (ax + t * ux)
                        ddy = cy - (ay + t * uy)
                        d2 = ddx * ddx + ddy * ddy
                        if d2 < best:
                            best = d2
                            if best < 1.0:
                                break
                    if best < 1.0:
                        count += 1
    return count
