"""Pure-numpy backend for the hot kernels.

Mirrors kernels._numba function for function with identical semantics.
Where the numba lane loops over seeds or cells, this lane vectorizes across
them; per-element arithmetic is kept expression-for-expression identical so
the two backends agree to roundoff and parity tests can pin them together.
"""
from __future__ import annotations

import numpy as np

PI = np.pi
TWO_PI = 2.0 * np.pi

# |cos| below this between consecutive directions means the line field turned
# essentially perpendicular within one step: orientation can't be continued.
AMBIGUOUS_DOT = 0.05


def _trig_value(terms, x, y):
    out = np.zeros_like(x)
    for k in range(terms.shape[0]):
        fx, fy, s, c = terms[k, 0], terms[k, 1], terms[k, 2], terms[k, 3]
        phase = TWO_PI * (fx * x + fy * y)
        out = out + s * np.sin(phase) + c * np.cos(phase)
    return out


def _trig_dx(terms, x, y):
    out = np.zeros_like(x)
    for k in range(terms.shape[0]):
        fx, fy, s, c = terms[k, 0], terms[k, 1], terms[k, 2], terms[k, 3]
        phase = TWO_PI * (fx * x + fy * y)
        out = out + TWO_PI * fx * (s * np.cos(phase) - c * np.sin(phase))
    return out


def _trig_dy(terms, x, y):
    out = np.zeros_like(x)
    for k in range(terms.shape[0]):
        fx, fy, s, c = terms[k, 0], terms[k, 1], terms[k, 2], terms[k, 3]
        phase = TWO_PI * (fx * x + fy * y)
        out = out + TWO_PI * fy * (s * np.cos(phase) - c * np.sin(phase))
    return out


def _angle_interp(angles, x, y):
    # bilinear on doubled angles, grid sampled at cell centers, both axes periodic
    h, w = angles.shape
    u = x * w - 0.5
    v = y * h - 0.5
    i0 = np.floor(u).astype(np.int64)
    j0 = np.floor(v).astype(np.int64)
    fu = u - i0
    fv = v - j0
    i0m, i1m = np.mod(i0, w), np.mod(i0 + 1, w)
    j0m, j1m = np.mod(j0, h), np.mod(j0 + 1, h)
    c2 = np.cos(2.0 * angles)
    s2 = np.sin(2.0 * angles)
    c = ((1 - fu) * (1 - fv) * c2[j0m, i0m] + fu * (1 - fv) * c2[j0m, i1m]
         + (1 - fu) * fv * c2[j1m, i0m] + fu * fv * c2[j1m, i1m])
    s = ((1 - fu) * (1 - fv) * s2[j0m, i0m] + fu * (1 - fv) * s2[j0m, i1m]
         + (1 - fu) * fv * s2[j1m, i0m] + fu * fv * s2[j1m, i1m])
    return np.mod(0.5 * np.arctan2(s, c), PI)


def _scalar_interp(values, x, y):
    h, w = values.shape
    u = x * w - 0.5
    v = y * h - 0.5
    i0 = np.floor(u).astype(np.int64)
    j0 = np.floor(v).astype(np.int64)
    fu = u - i0
    fv = v - j0
    i0m, i1m = np.mod(i0, w), np.mod(i0 + 1, w)
    j0m, j1m = np.mod(j0, h), np.mod(j0 + 1, h)
    return ((1 - fu) * (1 - fv) * values[j0m, i0m] + fu * (1 - fv) * values[j0m, i1m]
            + (1 - fu) * fv * values[j1m, i0m] + fu * fv * values[j1m, i1m])


def _arc_between(b1, b2, m):
    # doubled-angle arc bounded by b1, b2 containing witness m; all mod pi in/out
    bb1, bb2, mm = 2.0 * b1, 2.0 * b2, 2.0 * m
    span = np.mod(bb2 - bb1, TWO_PI)
    inside = np.mod(mm - bb1, TWO_PI) <= span
    c2 = np.where(inside, bb1 + 0.5 * span, bb2 + 0.5 * (TWO_PI - span))
    h2 = np.where(inside, 0.5 * span, 0.5 * (TWO_PI - span))
    return np.mod(0.5 * c2, PI), 0.5 * h2


def _intersect(ca, ha, cb, hb):
    ca2, cb2 = 2.0 * ca, 2.0 * cb
    ha2, hb2 = 2.0 * ha, 2.0 * hb
    d = np.mod(cb2 - ca2 + PI, TWO_PI) - PI
    lo = np.maximum(-ha2, d - hb2)
    hi = np.minimum(ha2, d + hb2)
    empty = lo > hi
    a_narrower = ha2 <= hb2
    c2 = np.where(empty, np.where(a_narrower, ca2, cb2), ca2 + 0.5 * (lo + hi))
    h2 = np.where(empty, np.where(a_narrower, ha2, hb2), 0.5 * (hi - lo))
    return np.mod(0.5 * c2, PI), 0.5 * h2


def center_sweep(seed_x, seed_y, lin, ptx, pty, axes, hws, depth, tol):
    """Center direction and width bound at each seed point.

    Pulls the complement of the cone back through inverse Jacobians along the
    forward orbit of each seed, intersecting as it goes, until the interval
    width drops below tol or the depth cap is reached.

    Returns:
        (angles, widths): direction mod pi and full angular width per seed.
    """
    px = np.mod(np.asarray(seed_x, dtype=float), 1.0)
    py = np.mod(np.asarray(seed_y, dtype=float), 1.0)
    n = px.shape[0]

    ca = _angle_interp(axes, px, py)
    ch = _scalar_interp(hws, px, py)
    ic = np.mod(ca + 0.5 * PI, PI)
    ih = 0.5 * PI - ch

    m00 = np.ones(n)
    m01 = np.zeros(n)
    m10 = np.zeros(n)
    m11 = np.ones(n)

    active = 2.0 * ih >= tol
    for _ in range(depth):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        x, y = px[idx], py[idx]
        j00 = lin[0, 0] + _trig_dx(ptx, x, y)
        j01 = lin[0, 1] + _trig_dy(ptx, x, y)
        j10 = lin[1, 0] + _trig_dx(pty, x, y)
        j11 = lin[1, 1] + _trig_dy(pty, x, y)
        det = j00 * j11 - j01 * j10
        i00 = j11 / det
        i01 = -j01 / det
        i10 = -j10 / det
        i11 = j00 / det
        a00, a01, a10, a11 = m00[idx], m01[idx], m10[idx], m11[idx]
        n00 = a00 * i00 + a01 * i10
        n01 = a00 * i01 + a01 * i11
        n10 = a10 * i00 + a11 * i10
        n11 = a10 * i01 + a11 * i11
        norm = np.maximum(np.maximum(np.abs(n00), np.abs(n01)),
                          np.maximum(np.abs(n10), np.abs(n11)))
        n00, n01, n10, n11 = n00 / norm, n01 / norm, n10 / norm, n11 / norm
        m00[idx], m01[idx], m10[idx], m11[idx] = n00, n01, n10, n11

        xn = np.mod(lin[0, 0] * x + lin[0, 1] * y + _trig_value(ptx, x, y), 1.0)
        yn = np.mod(lin[1, 0] * x + lin[1, 1] * y + _trig_value(pty, x, y), 1.0)
        px[idx], py[idx] = xn, yn

        ta = np.mod(_angle_interp(axes, xn, yn) + 0.5 * PI, PI)
        th = 0.5 * PI - _scalar_interp(hws, xn, yn)
        dirs = []
        for t in (ta - th, ta + th, ta):
            vx, vy = np.cos(t), np.sin(t)
            ux = n00 * vx + n01 * vy
            uy = n10 * vx + n11 * vy
            dirs.append(np.mod(np.arctan2(uy, ux), PI))
        pa, ph = _arc_between(dirs[0], dirs[1], dirs[2])
        nc, nh = _intersect(ic[idx], ih[idx], pa, ph)
        ic[idx], ih[idx] = nc, nh
        active[idx] = 2.0 * nh >= tol
    return np.mod(ic, PI), 2.0 * ih


def _oriented_unit(angles, X, prev):
    """Unit vector of the line field at X, signed to align with prev.

    Returns (vectors, ambiguous_mask)."""
    a = _angle_interp(angles, np.mod(X[:, 0], 1.0), np.mod(X[:, 1], 1.0))
    v = np.stack([np.cos(a), np.sin(a)], axis=1)
    dot = np.sum(v * prev, axis=1)
    amb = np.abs(dot) < AMBIGUOUS_DOT
    v = np.where((dot < 0.0)[:, None], -v, v)
    return v, amb


def trace_batch(seed_x, seed_y, angles, step, max_steps, closure_tol, dir_tol, min_steps):
    """Integrate the line field from each seed until closure or the step cap.

    Fourth-order stepping with orientation continued stage to stage.  A loop
    is detected when the polyline passes within closure_tol of the lifted
    start point shifted by a nonzero integer vector, with the travel
    direction matching the initial one within dir_tol radians; the final
    vertex is snapped onto that shifted start.

    Returns:
        paths: (n, max_steps + 1, 2) lifted vertices.
        npts: number of valid vertices per seed.
        status: 0 = open (cap reached), 1 = closed, 2 = orientation ambiguity.
        klass: (n, 2) integer loop displacement (zeros unless closed).
    """
    n = len(seed_x)
    paths = np.zeros((n, max_steps + 1, 2))
    npts = np.ones(n, dtype=np.int64)
    status = np.zeros(n, dtype=np.int64)
    klass = np.zeros((n, 2), dtype=np.int64)

    X = np.stack([np.asarray(seed_x, dtype=float), np.asarray(seed_y, dtype=float)], axis=1)
    paths[:, 0] = X
    a0 = _angle_interp(angles, np.mod(X[:, 0], 1.0), np.mod(X[:, 1], 1.0))
    d = np.stack([np.cos(a0), np.sin(a0)], axis=1)
    d0 = d.copy()
    X0 = X.copy()
    running = np.ones(n, dtype=bool)
    cos_dir = np.cos(dir_tol)

    for k in range(1, max_steps + 1):
        idx = np.flatnonzero(running)
        if idx.size == 0:
            break
        Xi, di = X[idx], d[idx]
        k1, amb1 = _oriented_unit(angles, Xi, di)
        k2, amb2 = _oriented_unit(angles, Xi + 0.5 * step * k1, k1)
        k3, amb3 = _oriented_unit(angles, Xi + 0.5 * step * k2, k2)
        k4, amb4 = _oriented_unit(angles, Xi + step * k3, k3)
        Xn = Xi + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        dn, amb5 = _oriented_unit(angles, Xn, di)
        amb = amb1 | amb2 | amb3 | amb4 | amb5

        paths[idx, k] = Xn
        npts[idx] = k + 1
        X[idx], d[idx] = Xn, dn

        stopped = amb.copy()
        status[idx[amb]] = 2

        if k >= min_steps:
            delta = Xn - X0[idx]
            nvec = np.round(delta)
            resid = delta - nvec
            near = (np.hypot(resid[:, 0], resid[:, 1]) <= 1.5 * step) & ~amb
            if np.any(near):
                sub = np.flatnonzero(near)
                W = X0[idx[sub]] + nvec[sub]
                A = Xi[sub]
                B = Xn[sub]
                AB = B - A
                denom = np.sum(AB * AB, axis=1)
                t = np.clip(np.sum((W - A) * AB, axis=1) / np.where(denom == 0.0, 1.0, denom),
                            0.0, 1.0)
                proj = A + t[:, None] * AB
                dist = np.hypot(W[:, 0] - proj[:, 0], W[:, 1] - proj[:, 1])
                dirok = np.sum(dn[sub] * d0[idx[sub]], axis=1) >= cos_dir
                nontrivial = (nvec[sub, 0] != 0.0) | (nvec[sub, 1] != 0.0)
                closed = (dist < closure_tol) & dirok & nontrivial
                for j, c in zip(sub, closed):
                    if c:
                        gi = idx[j]
                        paths[gi, k] = X0[gi] + nvec[j]
                        status[gi] = 1
                        klass[gi, 0] = np.int64(nvec[j, 0])
                        klass[gi, 1] = np.int64(nvec[j, 1])
                        stopped[j] = True
        running[idx] = ~stopped
    return paths, npts, status, klass


def tube_count(segs, cell, x0, y0, nx, ny, bptr, bidx, bx, by):
    """Count raster cell centers within distance 1 of the segment set.

    The raster covers [x0, x0 + nx*cell) x [y0, y0 + ny*cell) with cell
    centers at offsets (i + 0.5) * cell.  Buckets are unit squares anchored
    at (x0, y0); bptr/bidx list, per bucket, every segment whose inflated
    bounding box meets it, so cells need only consult their own bucket.
    """
    count = 0
    inv = 1.0 / cell
    for bj in range(by):
        jlo = int(np.ceil(bj * inv - 0.5 - 1e-12))
        jhi = int(np.ceil((bj + 1) * inv - 0.5 - 1e-12))
        jlo, jhi = max(jlo, 0), min(jhi, ny)
        if jlo >= jhi:
            continue
        ys = y0 + (np.arange(jlo, jhi) + 0.5) * cell
        for bi in range(bx):
            b = bj * bx + bi
            s0, s1 = bptr[b], bptr[b + 1]
            if s0 == s1:
                continue
            ilo = int(np.ceil(bi * inv - 0.5 - 1e-12))
            ihi = int(np.ceil((bi + 1) * inv - 0.5 - 1e-12))
            ilo, ihi = max(ilo, 0), min(ihi, nx)
            if ilo >= ihi:
                continue
            xs = x0 + (np.arange(ilo, ihi) + 0.5) * cell
            cx = np.repeat(xs, jhi - jlo)
            cy = np.tile(ys, ihi - ilo)
            local = segs[bidx[s0:s1]]
            ax, ay = local[:, 0], local[:, 1]
            ux, uy = local[:, 2] - ax, local[:, 3] - ay
            ll = ux * ux + uy * uy
            ll = np.where(ll == 0.0, 1.0, ll)
            t = ((cx[:, None] - ax) * ux + (cy[:, None] - ay) * uy) / ll
            t = np.clip(t, 0.0, 1.0)
            dx = cx[:, None] - (ax + t * ux)
            dy = cy[:, None] - (ay + t * uy)
            d2 = dx * dx + dy * dy
            count += int(np.sum(np.min(d2, axis=1) < 1.0))
    return count
