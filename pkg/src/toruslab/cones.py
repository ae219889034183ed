"""Cone fields, expansion constants, center bundles, domination verdicts.

A cone here is the closed double cone of tangent vectors whose direction lies
within half_width of a projective axis.  Everything downstream (invariance
margins, expansion minima, center directions) reduces to arithmetic on these
angular intervals, which keeps all the checks closed-form on a sampling grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import projective
from .errors import MapValidationError, PreconditionError, SingularMatrixError
from .kernels import center_sweep
from .torus_map import TorusMap, evaluate

PI = np.pi

ABSOLUTE = "ABSOLUTE"
POINTWISE_ONLY = "POINTWISE_ONLY"
NOT_PH = "NOT_PH"


@dataclass(frozen=True)
class Cone:
    """Closed double cone: directions within half_width of axis (mod pi)."""

    axis: float
    half_width: float

    def __post_init__(self):
        if not np.isfinite(self.axis) or not np.isfinite(self.half_width):
            raise MapValidationError("cone parameters must be finite")
        if not 0.0 < self.half_width < 0.5 * PI:
            raise MapValidationError(
                f"half_width must lie in (0, pi/2), got {self.half_width}")
        object.__setattr__(self, "axis", float(np.mod(self.axis, PI)))
        object.__setattr__(self, "half_width", float(self.half_width))

    def contains(self, direction: float, slack: float = 0.0) -> bool:
        return projective.distance(direction, self.axis) <= self.half_width + slack


@dataclass(frozen=True, eq=False)
class ConeField:
    """Cone assignment over the torus: one constant cone or a sampled grid.

    Grid fields hold axis and half-width arrays sampled at cell centers
    ((i + 0.5)/W, (j + 0.5)/H) and are evaluated anywhere by bilinear
    interpolation of doubled angles.  Adjacent axes must stay within pi/4 of
    each other so the interpolation never straddles the projective branch cut.
    """

    axes: np.ndarray
    half_widths: np.ndarray

    @classmethod
    def constant(cls, cone: Cone) -> "ConeField":
        return cls(np.full((1, 1), cone.axis), np.full((1, 1), cone.half_width))

    @classmethod
    def from_grid(cls, axes, half_widths) -> "ConeField":
        axes = np.mod(np.asarray(axes, dtype=float), PI)
        hws = np.asarray(half_widths, dtype=float)
        if axes.ndim != 2 or axes.shape != hws.shape:
            raise MapValidationError("axis and half-width grids must share a 2-D shape")
        if np.any(~np.isfinite(axes)) or np.any(~np.isfinite(hws)):
            raise MapValidationError("cone grids must be finite")
        if np.any(hws <= 0.0) or np.any(hws >= 0.5 * PI):
            raise MapValidationError("grid half-widths must lie in (0, pi/2)")
        for shifted in (np.roll(axes, 1, axis=0), np.roll(axes, 1, axis=1)):
            gap = np.abs(projective.signed_gap(axes, shifted))
            if np.any(gap >= 0.25 * PI):
                raise MapValidationError(
                    "adjacent cone axes differ by >= pi/4; grid too coarse to interpolate")
        return cls(axes, hws)

    @property
    def is_constant(self) -> bool:
        return self.axes.shape == (1, 1)

    def at(self, x, y):
        """(axis, half_width) arrays at arbitrary torus points."""
        if self.is_constant:
            x = np.asarray(x, dtype=float)
            ax = np.broadcast_to(self.axes[0, 0], x.shape).copy()
            hw = np.broadcast_to(self.half_widths[0, 0], x.shape).copy()
            return ax, hw
        return (projective.interpolate_grid(self.axes, x, y),
                projective.interpolate_scalar_grid(self.half_widths, x, y))


def _grid_points(grid_n: int):
    t = (np.arange(grid_n) + 0.5) / grid_n
    gx, gy = np.meshgrid(t, t)
    return gx.ravel(), gy.ravel()


def cone_image(matrix, cone: Cone) -> Cone:
    """Smallest cone containing M applied to every vector of the input cone.

    The boundary rays map to the boundary rays of the image; the image of the
    axis picks which of the two complementary intervals is the image.
    """
    m = np.asarray(matrix, dtype=float)
    if m.shape != (2, 2):
        raise MapValidationError(f"expected a 2x2 matrix, got shape {m.shape}")
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if det == 0.0 or not np.isfinite(det):
        raise SingularMatrixError("matrix is singular; cone image undefined")

    out = []
    for t in (cone.axis - cone.half_width, cone.axis + cone.half_width, cone.axis):
        vx, vy = math.cos(t), math.sin(t)
        out.append(math.atan2(m[1, 0] * vx + m[1, 1] * vy,
                              m[0, 0] * vx + m[0, 1] * vy) % PI)
    center, half = projective.arc_between(out[0], out[1], out[2])
    return Cone(float(center), float(half))


@dataclass(frozen=True)
class InvarianceReport:
    """Outcome of the grid cone-invariance check."""

    invariant: bool
    margin: float
    worst_point: tuple[float, float]


def check_invariance(tmap: TorusMap, cones: ConeField, grid_n: int) -> InvarianceReport:
    """Does the derivative map each grid cone strictly inside the image cone.

    The margin is the smallest angular clearance between the image cone and
    the boundary of the cone at the image point; nonpositive margin means a
    violation at worst_point.
    """
    if grid_n < 16:
        raise PreconditionError(f"grid_n must be at least 16, got {grid_n}")
    px, py = _grid_points(grid_n)
    ax, hw = cones.at(px, py)
    jac = tmap.jacobian_at(px, py)

    dirs = []
    for t in (ax - hw, ax + hw, ax):
        vx, vy = np.cos(t), np.sin(t)
        dirs.append(np.mod(np.arctan2(jac[:, 1, 0] * vx + jac[:, 1, 1] * vy,
                                      jac[:, 0, 0] * vx + jac[:, 0, 1] * vy), PI))
    img_center, img_half = projective.arc_between(dirs[0], dirs[1], dirs[2])

    fp = evaluate(tmap, np.stack([px, py], axis=1))
    axf, hwf = cones.at(fp[:, 0], fp[:, 1])
    clearance = hwf - (np.abs(projective.signed_gap(img_center, axf)) + img_half)
    w = int(np.argmin(clearance))
    margin = float(clearance[w])
    return InvarianceReport(margin > 0.0, margin, (float(px[w]), float(py[w])))


def _expansion_grids(tmap: TorusMap, cones: ConeField, grid_n: int):
    """Min and max of ||Df v|| over unit cone vectors, per grid point.

    ||Df v(t)||^2 is a quadratic form in (cos t, sin t); its extrema over an
    angular interval sit at the form's critical angles (when inside) or at
    the interval endpoints, so both bounds are closed-form.
    """
    px, py = _grid_points(grid_n)
    ax, hw = cones.at(px, py)
    jac = tmap.jacobian_at(px, py)
    a = jac[:, 0, 0] ** 2 + jac[:, 1, 0] ** 2
    b = jac[:, 0, 0] * jac[:, 0, 1] + jac[:, 1, 0] * jac[:, 1, 1]
    c = jac[:, 0, 1] ** 2 + jac[:, 1, 1] ** 2

    crit = 0.5 * np.arctan2(2.0 * b, a - c)
    cands = np.stack([ax - hw, ax + hw, crit, crit + 0.5 * PI], axis=0)
    inside = np.abs(projective.signed_gap(cands, ax[None, :])) <= hw[None, :] + 1e-15
    inside[0] = True
    inside[1] = True

    q = (0.5 * (a + c)[None, :] + 0.5 * (a - c)[None, :] * np.cos(2.0 * cands)
         + b[None, :] * np.sin(2.0 * cands))
    q = np.maximum(q, 0.0)
    qmin = np.min(np.where(inside, q, np.inf), axis=0)
    qmax = np.max(np.where(inside, q, -np.inf), axis=0)
    n = grid_n
    return np.sqrt(qmin).reshape(n, n), np.sqrt(qmax).reshape(n, n)


def expansion_constants(tmap: TorusMap, cones: ConeField, grid_n: int):
    """(global minimum, per-grid-point grid) of cone-vector expansion."""
    lam, _ = _expansion_grids(tmap, cones, grid_n)
    return float(np.min(lam)), lam


@dataclass(frozen=True, eq=False)
class CenterField:
    """Grid-sampled center line field with per-point angular width bounds.

    widths[j, i] bounds how far the recorded angle can sit from the true
    center direction at that grid point given the pull-back depth reached.
    """

    angles: np.ndarray
    widths: np.ndarray
    depth: int
    tol: float

    @property
    def grid_n(self) -> int:
        return self.angles.shape[1]

    def direction_at(self, x, y):
        return projective.interpolate_grid(self.angles, x, y)

    def width_at(self, x, y):
        return projective.interpolate_scalar_grid(self.widths, x, y)


def _kernel_args(tmap: TorusMap, cones: ConeField):
    lin = np.asarray(tmap.linear, dtype=float)
    ptx = tmap.pert_x.terms.reshape(-1, 4).astype(float)
    pty = tmap.pert_y.terms.reshape(-1, 4).astype(float)
    return lin, ptx, pty, cones.axes, cones.half_widths


def center_directions_at(tmap: TorusMap, cones: ConeField, x, y,
                         depth: int = 60, tol: float = 1e-10):
    """Center direction and width at arbitrary points, no grid in between."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lin, ptx, pty, axes, hws = _kernel_args(tmap, cones)
    return center_sweep(x, y, lin, ptx, pty, axes, hws, depth, tol)


def compute_center_field(tmap: TorusMap, cones: ConeField, grid_n: int,
                         depth: int = 60, tol: float = 1e-10) -> CenterField:
    """Approximate the center bundle on a grid by complement-cone pull-back.

    At each grid point the complement of the cone at the n-th forward image
    is pulled back through the inverse Jacobians along the orbit; the nested
    intersection shrinks onto the center direction at the domination rate.
    A width that stalls above tol is reported as-is, not raised.
    """
    if grid_n < 1:
        raise PreconditionError(f"grid_n must be positive, got {grid_n}")
    if depth < 1:
        raise PreconditionError(f"depth must be positive, got {depth}")
    px, py = _grid_points(grid_n)
    lin, ptx, pty, axes, hws = _kernel_args(tmap, cones)
    ang, wid = center_sweep(px, py, lin, ptx, pty, axes, hws, depth, tol)
    return CenterField(ang.reshape(grid_n, grid_n), wid.reshape(grid_n, grid_n),
                       depth, tol)


@dataclass(frozen=True, eq=False)
class PHReport:
    """Full domination report over a sampling grid.

    delta_abs compares the worst center expansion anywhere against the worst
    cone expansion anywhere; delta_pointwise compares them at the same base
    point.  jacobian_osc bounds how much any derivative entry can move within
    one grid cell, so margin < jacobian_osc flags an unreliable verdict.
    """

    invariant: bool
    margin: float
    worst_point: tuple[float, float]
    lambda_abs: float
    lambda_grid: np.ndarray
    mu_abs: float
    mu_grid: np.ndarray
    delta_abs: float
    delta_pointwise: float
    classification: str
    expansion_max: float
    jacobian_osc: float
    margin_warning: bool
    center: CenterField
    grid_n: int
    depth: int


def classify(tmap: TorusMap, cones: ConeField, grid_n: int, depth: int = 60,
             tol: float = 1e-10) -> PHReport:
    """Assemble the invariance, expansion and domination verdict in one pass."""
    inv = check_invariance(tmap, cones, grid_n)
    lam_grid, big_grid = _expansion_grids(tmap, cones, grid_n)
    lambda_abs = float(np.min(lam_grid))
    expansion_max = float(np.max(big_grid))

    field = compute_center_field(tmap, cones, grid_n, depth, tol)
    px, py = _grid_points(grid_n)
    jac = tmap.jacobian_at(px, py)
    th = field.angles.ravel()
    vx, vy = np.cos(th), np.sin(th)
    mu = np.hypot(jac[:, 0, 0] * vx + jac[:, 0, 1] * vy,
                  jac[:, 1, 0] * vx + jac[:, 1, 1] * vy).reshape(grid_n, grid_n)
    mu_abs = float(np.max(mu))
    delta_abs = mu_abs / lambda_abs
    delta_pw = float(np.max(mu / lam_grid))

    if not inv.invariant:
        verdict = NOT_PH
    elif delta_abs < 1.0:
        verdict = ABSOLUTE
    elif delta_pw < 1.0:
        verdict = POINTWISE_ONLY
    else:
        verdict = NOT_PH

    hx = tmap.pert_x.hessian_bounds()
    hy = tmap.pert_y.hessian_bounds()
    lip = max(hx[0], hx[1], hy[0], hy[1])
    osc = lip * (1.0 / grid_n) / math.sqrt(2.0)

    return PHReport(
        invariant=inv.invariant,
        margin=inv.margin,
        worst_point=inv.worst_point,
        lambda_abs=lambda_abs,
        lambda_grid=lam_grid,
        mu_abs=mu_abs,
        mu_grid=mu,
        delta_abs=delta_abs,
        delta_pointwise=delta_pw,
        classification=verdict,
        expansion_max=expansion_max,
        jacobian_osc=osc,
        margin_warning=bool(inv.margin <= osc),
        center=field,
        grid_n=grid_n,
        depth=depth,
    )
