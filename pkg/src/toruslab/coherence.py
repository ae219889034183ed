"""Geometric experiments: center curves, invariant circles, growth bounds.

Three instruments share this module.  A tracer integrates the center line
field into polylines and detects closed loops with their homotopy class.  A
hunter filters those loops down to circles the map actually preserves and
measures the degree and Jacobian identities of the restriction.  A growth rig
pushes a cone-tangent segment forward, logging curve length against the area
of its unit neighborhood, and turns the two into the lower/upper bound
sequences whose divergence is the coherence obstruction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import projective
from .cones import CenterField, ConeField
from .errors import PreconditionError, StepSizeError, TangencyError
from .kernels import build_buckets, trace_batch, tube_count
from .semiconjugacy import SemiconjugacyResult, StripMap
from .torus_map import TorusMap

PI = np.pi


@dataclass(frozen=True, eq=False)
class CenterCurve:
    """Polyline tangent to the center field, lifted to the plane.

    homotopy_class is the integer displacement accumulated around the loop;
    it is None for curves that never closed.
    """

    points: np.ndarray
    closed: bool
    homotopy_class: tuple[int, int] | None

    @property
    def length(self) -> float:
        d = np.diff(self.points, axis=0)
        return float(np.sum(np.hypot(d[:, 0], d[:, 1])))


@dataclass(frozen=True)
class CircleRestrictionReport:
    """Degree and Jacobian bookkeeping for a map-invariant circle."""

    degree: int
    jacobian_integral: float
    arc_length: float
    max_jacobian: float
    invariance_hausdorff: float
    period: int


@dataclass(frozen=True, eq=False)
class GrowthReport:
    """Length and tube-area log of an iterated cone-tangent curve.

    lower_bounds, upper_bounds and crossover_n stay None until the report is
    completed against a strip map and its semiconjugacy.
    """

    ns: np.ndarray
    lengths: np.ndarray
    areas: np.ndarray
    cells: np.ndarray
    K_estimate: float
    lambda_fit: float
    j0: np.ndarray
    lower_bounds: np.ndarray | None = None
    upper_bounds: np.ndarray | None = None
    crossover_n: int | None = None
    K: float | None = None
    c: float | None = None
    ell: int | None = None
    u_sup: float | None = None
    len_h: float | None = None
    lam: float | None = None


def integrate_center_curve(field: CenterField, seed, step: float = 1e-3,
                           max_len: float = 20.0, closure_tol: float = 1e-5,
                           dir_tol: float = 1e-3,
                           tangency_tol: float = 0.05) -> CenterCurve:
    """Trace the center field from seed until it closes up or runs out.

    Closure requires returning within closure_tol of the start shifted by a
    nonzero integer vector with the travel direction within dir_tol of the
    initial one; the final vertex is then snapped onto the exact return
    point, so a closed curve's endpoints differ by its homotopy class.
    """
    if step <= 0.0 or max_len <= step:
        raise PreconditionError("need 0 < step < max_len")
    wmax = float(np.max(field.widths))
    if wmax > tangency_tol:
        raise TangencyError(
            f"center direction uncertain: width bound {wmax:.2e} exceeds "
            f"tangency tolerance {tangency_tol:.2e}")

    max_steps = int(math.ceil(max_len / step))
    min_steps = max(1, int(math.ceil(0.5 / step)))
    sx = np.array([float(seed[0])])
    sy = np.array([float(seed[1])])
    paths, npts, status, klass = trace_batch(
        sx, sy, field.angles, step, max_steps, closure_tol, dir_tol, min_steps)
    if status[0] == 2:
        raise StepSizeError(
            "line field turned near-perpendicular within one step; "
            "reduce step or refine the field grid")
    pts = paths[0, :npts[0]].copy()
    closed = status[0] == 1
    cls = (int(klass[0, 0]), int(klass[0, 1])) if closed else None
    return CenterCurve(pts, closed, cls)


def _resample(points: np.ndarray, spacing: float) -> np.ndarray:
    """Uniform arclength resampling of a polyline, endpoints preserved."""
    d = np.hypot(*np.diff(points, axis=0).T)
    s = np.concatenate([[0.0], np.cumsum(d)])
    total = s[-1]
    if total == 0.0:
        return points[:1].copy()
    m = max(2, int(math.ceil(total / spacing)) + 1)
    t = np.linspace(0.0, total, m)
    return np.stack([np.interp(t, s, points[:, 0]),
                     np.interp(t, s, points[:, 1])], axis=1)


def _seg_tiles_mod1(points: np.ndarray) -> np.ndarray:
    """Segments of a lifted polyline, recentered mod 1 and tiled to 3x3."""
    a = points[:-1]
    b = points[1:]
    mid = 0.5 * (a + b)
    shift = np.floor(mid)
    a = a - shift
    b = b - shift
    segs = np.concatenate([a, b], axis=1)
    tiles = []
    for ox in (-1.0, 0.0, 1.0):
        for oy in (-1.0, 0.0, 1.0):
            t = segs.copy()
            t[:, 0] += ox
            t[:, 2] += ox
            t[:, 1] += oy
            t[:, 3] += oy
            tiles.append(t)
    return np.concatenate(tiles, axis=0)


def _points_to_segs(pts: np.ndarray, segs: np.ndarray) -> float:
    """Max over pts of the distance to the nearest segment."""
    ax, ay = segs[:, 0], segs[:, 1]
    ux, uy = segs[:, 2] - ax, segs[:, 3] - ay
    ll = ux * ux + uy * uy
    ll = np.where(ll == 0.0, 1.0, ll)
    worst = 0.0
    chunk = 2048
    for lo in range(0, pts.shape[0], chunk):
        p = pts[lo:lo + chunk]
        t = ((p[:, 0:1] - ax) * ux + (p[:, 1:2] - ay) * uy) / ll
        t = np.clip(t, 0.0, 1.0)
        dx = p[:, 0:1] - (ax + t * ux)
        dy = p[:, 1:2] - (ay + t * uy)
        d = np.sqrt(np.min(dx * dx + dy * dy, axis=1))
        worst = max(worst, float(np.max(d)))
    return worst


def curve_hausdorff_mod1(pts_a: np.ndarray, pts_b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two polylines on the torus.

    Vertices of each curve are compared against the segments of the other,
    so the measurement floor is set by curvature, not by vertex spacing.
    """
    sa = _seg_tiles_mod1(pts_a)
    sb = _seg_tiles_mod1(pts_b)
    qa = np.mod(pts_a, 1.0)
    qb = np.mod(pts_b, 1.0)
    return max(_points_to_segs(qa, sb), _points_to_segs(qb, sa))


def _iterate_lift(tmap: TorusMap, pts: np.ndarray, k: int) -> np.ndarray:
    out = pts
    for _ in range(k):
        out = tmap.lift(out)
    return out


def circle_restriction_report(tmap: TorusMap, curve: CenterCurve,
                              period: int = 1, invariance_tol: float = 1e-3,
                              sample_spacing: float = 2e-3) -> CircleRestrictionReport:
    """Degree, arc length and Jacobian integral of the map along a circle.

    The degree is read off exactly in integer homology: the image of a loop
    of class w is a loop of class A^period w, which must be an integer
    multiple of w for an invariant circle.  The Jacobian integral uses
    midpoint quadrature per segment, spectrally accurate on a closed loop.
    """
    if not curve.closed or curve.homotopy_class is None:
        raise PreconditionError("restriction report needs a closed curve")
    if period < 1:
        raise PreconditionError(f"period must be positive, got {period}")
    w = curve.homotopy_class
    if w == (0, 0):
        raise PreconditionError("closed curve has trivial homotopy class")

    pts = _resample(curve.points, sample_spacing)
    img = _iterate_lift(tmap, pts, period)
    haus = curve_hausdorff_mod1(pts, img)
    if haus > invariance_tol:
        raise PreconditionError(
            f"curve moves by {haus:.2e} under {period} map step(s); "
            f"not invariant at tolerance {invariance_tol:.2e}")

    a = np.array(tmap.linear, dtype=object)
    mk = np.eye(2, dtype=object)
    for _ in range(period):
        mk = a @ mk
    iw = (int(mk[0, 0]) * w[0] + int(mk[0, 1]) * w[1],
          int(mk[1, 0]) * w[0] + int(mk[1, 1]) * w[1])
    if iw[0] * w[1] != iw[1] * w[0]:
        raise PreconditionError(
            f"homotopy class {w} is not preserved (image class {iw}); "
            "curve cannot be invariant")
    ref = w[0] if w[0] != 0 else w[1]
    num = iw[0] if w[0] != 0 else iw[1]
    if num % ref != 0:
        raise PreconditionError(f"image class {iw} is a fractional multiple of {w}")
    degree = num // ref

    mids = 0.5 * (pts[:-1] + pts[1:])
    seg = np.diff(pts, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    keep = seg_len > 0.0
    mids, seg, seg_len = mids[keep], seg[keep], seg_len[keep]
    tx = seg[:, 0] / seg_len
    ty = seg[:, 1] / seg_len

    vx, vy = tx, ty
    px, py = mids[:, 0], mids[:, 1]
    stretch = np.ones_like(seg_len)
    for _ in range(period):
        jac = tmap.jacobian_at(np.mod(px, 1.0), np.mod(py, 1.0))
        nvx = jac[:, 0, 0] * vx + jac[:, 0, 1] * vy
        nvy = jac[:, 1, 0] * vx + jac[:, 1, 1] * vy
        r = np.hypot(nvx, nvy)
        stretch = stretch * r
        vx, vy = nvx / r, nvy / r
        nxt = tmap.lift(np.stack([px, py], axis=1))
        px, py = nxt[:, 0], nxt[:, 1]

    arc_length = float(np.sum(seg_len))
    jac_integral = float(np.sum(stretch * seg_len))
    return CircleRestrictionReport(
        degree=degree,
        jacobian_integral=jac_integral,
        arc_length=arc_length,
        max_jacobian=float(np.max(stretch)),
        invariance_hausdorff=haus,
        period=period)


def hunt_invariant_circles(tmap: TorusMap, field: CenterField, seeds: int = 4,
                           period_max: int = 1, invariance_tol: float = 1e-3,
                           step: float = 1e-3, max_len: float = 20.0,
                           closure_tol: float = 1e-5, dir_tol: float = 1e-3,
                           tangency_tol: float = 0.05):
    """Search for center circles the map permutes back onto themselves.

    Curves are traced from the seeds x seeds lattice (i/seeds, j/seeds); the
    unjittered lattice deliberately includes rational loci like x = 0 and
    x = 1/2 where invariant circles of integer-spectrum examples sit.  Closed
    curves are deduplicated, then kept when some iterate f^k, k <= period_max,
    returns them to themselves within invariance_tol in Hausdorff distance.
    An empty result is the no-invariant-circle verdict at this resolution.
    """
    if seeds < 1:
        raise PreconditionError(f"seeds must be positive, got {seeds}")
    if period_max < 1:
        raise PreconditionError(f"period_max must be positive, got {period_max}")
    wmax = float(np.max(field.widths))
    if wmax > tangency_tol:
        raise TangencyError(
            f"center direction uncertain: width bound {wmax:.2e} exceeds "
            f"tangency tolerance {tangency_tol:.2e}")

    grid = np.arange(seeds) / seeds
    sx, sy = [g.ravel() for g in np.meshgrid(grid, grid)]
    max_steps = int(math.ceil(max_len / step))
    min_steps = max(1, int(math.ceil(0.5 / step)))
    paths, npts, status, klass = trace_batch(
        sx, sy, field.angles, step, max_steps, closure_tol, dir_tol, min_steps)

    kept: list[CenterCurve] = []
    kept_sampled: list[np.ndarray] = []
    for i in range(sx.size):
        if status[i] != 1:
            continue
        curve = CenterCurve(paths[i, :npts[i]].copy(), True,
                            (int(klass[i, 0]), int(klass[i, 1])))
        smp = _resample(curve.points, 2e-3)
        if any(curve_hausdorff_mod1(smp, other) < 10.0 * closure_tol
               for other in kept_sampled):
            continue
        kept.append(curve)
        kept_sampled.append(smp)

    found = []
    for curve, smp in zip(kept, kept_sampled):
        for k in range(1, period_max + 1):
            img = _iterate_lift(tmap, smp, k)
            if curve_hausdorff_mod1(smp, img) < invariance_tol:
                found.append((curve, circle_restriction_report(
                    tmap, curve, period=k, invariance_tol=invariance_tol)))
                break
    return found


def _segments(points: np.ndarray) -> np.ndarray:
    return np.concatenate([points[:-1], points[1:]], axis=1)


def tube_area(points: np.ndarray, cell: float = 0.01) -> float:
    """Area of the radius-1 neighborhood of a lifted polyline.

    Rasterized: cells of side `cell` whose center lies within distance 1 of
    the polyline are counted.  A single point degenerates to the unit disc.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise PreconditionError("tube_area expects an (n, 2) polyline")
    if cell <= 0.0:
        raise PreconditionError(f"cell must be positive, got {cell}")
    if pts.shape[0] == 1:
        pts = np.concatenate([pts, pts], axis=0)
    segs = _segments(pts)

    pad = 1.0 + 2.0 * cell
    x0 = float(np.min(pts[:, 0])) - pad
    y0 = float(np.min(pts[:, 1])) - pad
    x1 = float(np.max(pts[:, 0])) + pad
    y1 = float(np.max(pts[:, 1])) + pad
    nx = int(math.ceil((x1 - x0) / cell))
    ny = int(math.ceil((y1 - y0) / cell))
    bptr, bidx, bx, by = build_buckets(segs, x0, y0, x1 - x0, y1 - y0)
    hits = tube_count(segs, cell, x0, y0, nx, ny, bptr, bidx, bx, by)
    return float(hits) * cell * cell


def _auto_cell(points: np.ndarray, cell: float, budget: float) -> float:
    """Coarsen the raster cell in factor-2 steps until it fits the budget."""
    w = float(np.ptp(points[:, 0])) + 2.0
    h = float(np.ptp(points[:, 1])) + 2.0
    c = cell
    while ((w + 4.0 * c) / c) * ((h + 4.0 * c) / c) > budget:
        c *= 2.0
    return c


def grow_unstable_curve(tmap: TorusMap, cones: ConeField, j0, n_max: int = 12,
                        resample_step: float = 2e-3, cell: float = 0.01,
                        max_points: int = 4_000_000,
                        cell_budget: float = 2e7) -> GrowthReport:
    """Push a cone-tangent segment forward and log length vs tube area.

    The polyline is resampled after every pushforward; when the curve
    outgrows max_points the sampling step scales up with the length, and the
    tube raster cell coarsens in factor-2 steps under cell_budget, so memory
    stays bounded while relative accuracy degrades gracefully.  Tangency to
    the cone field is re-checked on every iterate.
    """
    j0 = np.asarray(j0, dtype=float)
    if j0.ndim != 2 or j0.shape[1] != 2 or j0.shape[0] < 2:
        raise PreconditionError("j0 must be a polyline of at least 2 points")
    if n_max < 1:
        raise PreconditionError(f"n_max must be positive, got {n_max}")

    def check_tangent(pts: np.ndarray, n: int, hard: bool):
        seg = np.diff(pts, axis=0)
        ok = np.hypot(seg[:, 0], seg[:, 1]) > 0.0
        base = pts[:-1][ok]
        ang = np.mod(np.arctan2(seg[ok, 1], seg[ok, 0]), PI)
        ax, hw = cones.at(np.mod(base[:, 0], 1.0), np.mod(base[:, 1], 1.0))
        gap = np.abs(projective.signed_gap(ang, ax))
        bad = gap > hw + 1e-9
        if np.any(bad):
            j = int(np.argmax(gap))
            msg = (f"segment direction left the cone at iterate {n}: "
                   f"gap {gap[j]:.3e} vs half-width {hw[j]:.3e} near "
                   f"({base[j, 0] % 1.0:.4f}, {base[j, 1] % 1.0:.4f})")
            if hard:
                raise TangencyError(msg)
            raise PreconditionError("j0 is not cone-tangent: " + msg)

    pts = _resample(j0, resample_step)
    check_tangent(pts, 0, hard=False)

    lengths, areas, cells = [], [], []
    for n in range(n_max + 1):
        d = np.diff(pts, axis=0)
        length = float(np.sum(np.hypot(d[:, 0], d[:, 1])))
        lengths.append(length)
        c_n = _auto_cell(pts, cell, cell_budget)
        coarse = _resample(pts, max(0.05, 2.0 * c_n))
        areas.append(tube_area(coarse, c_n))
        cells.append(c_n)
        if n == n_max:
            break
        pts = tmap.lift(pts)
        d = np.diff(pts, axis=0)
        new_len = float(np.sum(np.hypot(d[:, 0], d[:, 1])))
        pts = _resample(pts, max(resample_step, new_len / max_points))
        check_tangent(pts, n + 1, hard=True)

    ns = np.arange(n_max + 1)
    lengths = np.asarray(lengths)
    areas = np.asarray(areas)
    slope = np.polyfit(ns, np.log(lengths), 1)[0]
    return GrowthReport(
        ns=ns, lengths=lengths, areas=areas, cells=np.asarray(cells),
        K_estimate=float(np.min(areas / lengths)),
        lambda_fit=float(np.exp(slope)),
        j0=np.array([j0[0], j0[-1]]))


def contradiction_bounds(strip: StripMap, semi: SemiconjugacyResult,
                         growth: GrowthReport, K: float, c: float = 1.0,
                         lam: float | None = None) -> GrowthReport:
    """Complete a growth report with the lower/upper bound sequences.

    lower(n) = K c lam^n len(J) is the tube-area lower bound; upper(n) is
    the area of the rectangle that must contain the tube when the curve is
    semiconjugate to the linear stretch: width |ell|^n len_h + 2 u_sup + 2,
    height 2 u_sup + 2.  crossover_n is the first recorded n where the lower
    bound exceeds the upper bound; None means no contradiction in range,
    which is the expected outcome when lam <= |ell|.
    """
    if semi.strip.ell != strip.ell:
        raise PreconditionError(
            f"semiconjugacy was solved for ell={semi.strip.ell}, "
            f"strip has ell={strip.ell}")
    if K <= 0.0 or c <= 0.0:
        raise PreconditionError("K and c must be positive")
    y = growth.j0[:, 1]
    if np.min(y) < -1e-9 or np.max(y) > 1.0 + 1e-9:
        raise PreconditionError("growth segment endpoints leave the strip [0,1]")

    lam_used = growth.lambda_fit if lam is None else float(lam)
    h0 = float(semi.h(growth.j0[0, 0], growth.j0[0, 1]))
    h1 = float(semi.h(growth.j0[1, 0], growth.j0[1, 1]))
    len_h = abs(h1 - h0)
    len_j = growth.lengths[0]
    margin = 2.0 * semi.u_sup + 2.0

    ns = growth.ns
    lower = K * c * lam_used ** ns * len_j
    upper = (np.abs(strip.ell) ** ns.astype(float) * len_h + margin) * margin
    over = np.flatnonzero(lower > upper)
    crossover = int(ns[over[0]]) if over.size else None

    return replace(growth, lower_bounds=lower, upper_bounds=upper,
                   crossover_n=crossover, K=float(K), c=float(c),
                   ell=strip.ell, u_sup=semi.u_sup, len_h=len_h, lam=lam_used)
