"""Torus endomorphisms with closed-form derivatives.

A map f of the 2-torus is stored as an integer linear part plus a
trigonometric-polynomial perturbation in each coordinate.  Its lift to the
plane is

    F(x, y) = L (x, y)^T + (p_x(x, y), p_y(x, y)),

with L a 2x2 integer matrix and p_x, p_y finite sums of
sin/cos(2 pi (m x + n y)).  The perturbations are Z^2-periodic by
construction, so F(v + k) = F(v) + L k for integer k, and every partial
derivative is available exactly.

Conventions: a point is a numpy array (x, y); torus points use the
representative in [0, 1)^2.  `TorusPoint` and `IntegerMatrix` below are
aliases documenting intent, not wrapper classes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MapValidationError

TorusPoint = np.ndarray
IntegerMatrix = np.ndarray

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class TrigPolynomial:
    """Finite sum of amp_sin*sin(2 pi (m x + n y)) + amp_cos*cos(...) terms.

    Stored as an (n, 4) float array [freq_x, freq_y, amp_sin, amp_cos];
    frequencies are integers (kept as floats for the numeric kernels).
    """

    terms: np.ndarray

    @classmethod
    def from_terms(cls, terms) -> "TrigPolynomial":
        arr = np.asarray(list(terms), dtype=float)
        if arr.size == 0:
            arr = np.zeros((0, 4))
        arr = arr.reshape(-1, 4)
        if arr.size and np.any(arr[:, :2] != np.round(arr[:, :2])):
            raise MapValidationError("trig frequencies must be integers")
        return cls(np.ascontiguousarray(arr))

    @classmethod
    def zero(cls) -> "TrigPolynomial":
        return cls(np.zeros((0, 4)))

    def value(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for fx, fy, s, c in self.terms:
            phase = TWO_PI * (fx * x + fy * y)
            out = out + s * np.sin(phase) + c * np.cos(phase)
        return out

    def dx(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for fx, fy, s, c in self.terms:
            phase = TWO_PI * (fx * x + fy * y)
            out = out + TWO_PI * fx * (s * np.cos(phase) - c * np.sin(phase))
        return out

    def dy(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for fx, fy, s, c in self.terms:
            phase = TWO_PI * (fx * x + fy * y)
            out = out + TWO_PI * fy * (s * np.cos(phase) - c * np.sin(phase))
        return out

    def gradient_bounds(self) -> tuple[float, float]:
        """Sup bounds for |d/dx| and |d/dy| from amplitudes and frequencies."""
        bx = by = 0.0
        for fx, fy, s, c in self.terms:
            r = math.hypot(s, c)
            bx += TWO_PI * abs(fx) * r
            by += TWO_PI * abs(fy) * r
        return bx, by

    def hessian_bounds(self) -> tuple[float, float]:
        """Sup bounds for |grad(d/dx)| and |grad(d/dy)|."""
        gx = gy = 0.0
        for fx, fy, s, c in self.terms:
            r = math.hypot(s, c)
            f = math.hypot(fx, fy)
            gx += TWO_PI * TWO_PI * abs(fx) * f * r
            gy += TWO_PI * TWO_PI * abs(fy) * f * r
        return gx, gy


@dataclass(frozen=True, eq=False)
class TorusMap:
    """Integer-linear torus endomorphism plus trig-polynomial perturbation."""

    linear: IntegerMatrix
    pert_x: TrigPolynomial
    pert_y: TrigPolynomial

    def lift(self, pts) -> np.ndarray:
        """Plane lift F applied to raw coordinates, shape (..., 2) preserved."""
        p = np.asarray(pts, dtype=float)
        x, y = p[..., 0], p[..., 1]
        a = self.linear
        out = np.empty(p.shape)
        out[..., 0] = a[0, 0] * x + a[0, 1] * y + self.pert_x.value(x, y)
        out[..., 1] = a[1, 0] * x + a[1, 1] * y + self.pert_y.value(x, y)
        return out

    def jacobian_at(self, x, y) -> np.ndarray:
        """DF at (x, y), shape (..., 2, 2); exact closed form."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        a = self.linear
        jac = np.empty(shape + (2, 2))
        jac[..., 0, 0] = a[0, 0] + self.pert_x.dx(x, y)
        jac[..., 0, 1] = a[0, 1] + self.pert_x.dy(x, y)
        jac[..., 1, 0] = a[1, 0] + self.pert_y.dx(x, y)
        jac[..., 1, 1] = a[1, 1] + self.pert_y.dy(x, y)
        return jac

    @property
    def degree(self) -> int:
        a = self.linear
        return int(a[0, 0]) * int(a[1, 1]) - int(a[0, 1]) * int(a[1, 0])


def evaluate(tmap: TorusMap, p, lift: bool = False) -> np.ndarray:
    """Apply the map to p (shape (..., 2)).

    The representative of p in [0, 1)^2 is taken first; with lift=True the
    plane image of that representative is returned, otherwise the torus
    image (coordinates mod 1).
    """
    rep = np.mod(np.asarray(p, dtype=float), 1.0)
    img = tmap.lift(rep)
    return img if lift else np.mod(img, 1.0)


def jacobian(tmap: TorusMap, p) -> np.ndarray:
    """DF at p, shape (..., 2, 2).  Periodic, so no reduction needed."""
    p = np.asarray(p, dtype=float)
    return tmap.jacobian_at(p[..., 0], p[..., 1])


def make_map(linear, pert_x=(), pert_y=(), *, allow_degree_one: bool = False,
             grid_n: int = 256, skip_validation: bool = False) -> TorusMap:
    """Build and validate a torus endomorphism.

    Args:
        linear: 2x2 integer matrix (nested lists or array).
        pert_x, pert_y: term iterables [(freq_x, freq_y, amp_sin, amp_cos), ...]
            or TrigPolynomial instances.
        allow_degree_one: accept |det| == 1 (diffeomorphism examples).
        grid_n: sampling resolution for the local-diffeomorphism certificate.
        skip_validation: bypass the Jacobian certificate (not the shape checks).

    Raises:
        MapValidationError: non-integer linear part, degenerate degree, or a
            Jacobian determinant that is not certifiably bounded away from 0.
    """
    arr = np.asarray(linear)
    if arr.shape != (2, 2):
        raise MapValidationError(f"linear part must be 2x2, got shape {arr.shape}")
    if not np.all(arr == np.round(np.asarray(arr, dtype=float))):
        raise MapValidationError(f"linear part must be integer, got {arr.tolist()}")
    lin = np.ascontiguousarray(np.round(np.asarray(arr, dtype=float)).astype(np.int64))

    px = pert_x if isinstance(pert_x, TrigPolynomial) else TrigPolynomial.from_terms(pert_x)
    py = pert_y if isinstance(pert_y, TrigPolynomial) else TrigPolynomial.from_terms(pert_y)
    tmap = TorusMap(lin, px, py)

    d = tmap.degree
    if d == 0:
        raise MapValidationError("linear part is singular (degree 0)")
    if abs(d) < 2 and not allow_degree_one:
        raise MapValidationError(
            f"|degree| = {abs(d)} < 2: not a strict endomorphism "
            "(pass allow_degree_one=True for diffeomorphism experiments)")

    if not skip_validation and (px.terms.size or py.terms.size):
        _certify_local_diffeo(tmap, grid_n)
    return tmap


def _certify_local_diffeo(tmap: TorusMap, grid_n: int) -> None:
    """Certify det DF != 0 on the torus: grid minimum beats the oscillation bound.

    The bound is Lipschitz: |det at p - det at nearest grid center| is at most
    L * h/sqrt(2) with h the cell size and L assembled from term amplitudes
    times frequencies, so a grid minimum above that margin excludes zeros
    (and sign changes) everywhere.
    """
    xs = (np.arange(grid_n) + 0.5) / grid_n
    gx, gy = np.meshgrid(xs, xs)
    jac = tmap.jacobian_at(gx, gy)
    dets = jac[..., 0, 0] * jac[..., 1, 1] - jac[..., 0, 1] * jac[..., 1, 0]
    min_det = float(np.min(np.abs(dets)))

    a = np.asarray(tmap.linear, dtype=float)
    bx_x, bx_y = tmap.pert_x.gradient_bounds()
    by_x, by_y = tmap.pert_y.gradient_bounds()
    gx_x, gx_y = tmap.pert_x.hessian_bounds()
    gy_x, gy_y = tmap.pert_y.hessian_bounds()
    sup = np.array([[abs(a[0, 0]) + bx_x, abs(a[0, 1]) + bx_y],
                    [abs(a[1, 0]) + by_x, abs(a[1, 1]) + by_y]])
    grad = np.array([[gx_x, gx_y], [gy_x, gy_y]])
    lip = (sup[0, 0] * grad[1, 1] + sup[1, 1] * grad[0, 0]
           + sup[0, 1] * grad[1, 0] + sup[1, 0] * grad[0, 1])
    margin = lip * (1.0 / grid_n) / math.sqrt(2.0)
    if min_det <= margin:
        raise MapValidationError(
            f"Jacobian determinant not certifiably nonzero: grid minimum "
            f"{min_det:.6g} vs oscillation margin {margin:.6g} at {grid_n}x{grid_n}")


def extract_linearization(tmap, base_point=(0.375, 0.6875), tol: float = 1e-9) -> IntegerMatrix:
    """Recover the integer linear part from lift displacements.

    Columns are F(p + e_i) - F(p); by equivariance these are the columns of
    the linear part at any base point.  Accepts anything with a `lift`
    method so malformed lifts can be diagnosed.

    Raises:
        MapValidationError: a displacement is farther than tol from an
            integer, i.e. the lift is not equivariant over Z^2.
    """
    p = np.asarray(base_point, dtype=float)
    base = tmap.lift(p)
    cols = []
    for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        disp = tmap.lift(p + e) - base
        rounded = np.round(disp)
        if np.max(np.abs(disp - rounded)) > tol:
            raise MapValidationError(
                f"lift displacement {disp.tolist()} is not integral within {tol}: "
                "map is not an integer-linear torus endomorphism")
        cols.append(rounded.astype(np.int64))
    return np.ascontiguousarray(np.stack(cols, axis=1))


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalue data of an integer matrix, exact where the integers allow."""

    eigenvalues: tuple
    tags: tuple
    discriminant: int
    is_integer_spectrum: bool


def spectrum(linear) -> SpectrumReport:
    """Spectrum of a 2x2 integer matrix from its integer discriminant.

    Integrality is decided exactly: the discriminant tr^2 - 4 det is a
    perfect square iff both eigenvalues are integers (monic integer
    quadratic with rational roots).
    """
    a = np.asarray(linear)
    t = int(a[0, 0]) + int(a[1, 1])
    d = int(a[0, 0]) * int(a[1, 1]) - int(a[0, 1]) * int(a[1, 0])
    disc = t * t - 4 * d
    if disc >= 0:
        s = math.isqrt(disc)
        if s * s == disc:
            lo, hi = (t - s) // 2, (t + s) // 2
            return SpectrumReport((lo, hi), ("integer", "integer"), disc, True)
        root = math.sqrt(disc)
        vals = ((t - root) / 2.0, (t + root) / 2.0)
        return SpectrumReport(vals, ("irrational-pair", "irrational-pair"), disc, False)
    root = math.sqrt(-disc)
    vals = (complex(t / 2.0, -root / 2.0), complex(t / 2.0, root / 2.0))
    return SpectrumReport(vals, ("complex-pair", "complex-pair"), disc, False)


def _exgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b), g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def normalize_homology(linear, cls) -> tuple[IntegerMatrix, IntegerMatrix]:
    """Unimodular change of basis sending a homology class to (1, 0).

    Args:
        linear: 2x2 integer matrix A.
        cls: primitive integer eigenvector (c1, c2) of A.

    Returns:
        (U, A') with U unimodular, U @ cls = (1, 0), and A' = U A U^-1
        upper triangular; A'[0, 0] is the eigenvalue on the class.  All
        arithmetic is exact in integers.

    Raises:
        MapValidationError: cls is not primitive, or not an eigenvector
            (the message reports A @ cls for diagnosis).
    """
    c1, c2 = int(cls[0]), int(cls[1])
    if c1 == 0 and c2 == 0:
        raise MapValidationError("homology class (0, 0) is not primitive")
    g, alpha, beta = _exgcd(c1, c2)
    if g != 1:
        raise MapValidationError(f"homology class ({c1}, {c2}) is not primitive: gcd = {g}")

    a = np.asarray(linear)
    a00, a01 = int(a[0, 0]), int(a[0, 1])
    a10, a11 = int(a[1, 0]), int(a[1, 1])
    img = (a00 * c1 + a01 * c2, a10 * c1 + a11 * c2)
    lam = alpha * img[0] + beta * img[1]
    if img != (lam * c1, lam * c2):
        raise MapValidationError(
            f"({c1}, {c2}) is not an eigenvector: A @ cls = {img}")

    u = ((alpha, beta), (-c2, c1))
    uinv = ((c1, -beta), (c2, alpha))
    au = tuple(tuple(sum(row[k] * uinv[k][j] for k in range(2)) for j in range(2))
               for row in ((a00, a01), (a10, a11)))
    prime = tuple(tuple(sum(u[i][k] * au[k][j] for k in range(2)) for j in range(2))
                  for i in range(2))
    if prime[1][0] != 0:
        raise RuntimeError("normalization failed to triangularize (internal error)")
    return (np.array(u, dtype=np.int64), np.array(prime, dtype=np.int64))


def map_to_dict(tmap: TorusMap) -> dict:
    """JSON-able description of the map; exact round-trip with map_from_dict."""
    def termlist(tp):
        return [{"fx": int(fx), "fy": int(fy), "sin": float(s), "cos": float(c)}
                for fx, fy, s, c in tp.terms]
    return {
        "linear": [[int(v) for v in row] for row in tmap.linear],
        "pert_x": termlist(tmap.pert_x),
        "pert_y": termlist(tmap.pert_y),
    }


def map_from_dict(data: dict, *, allow_degree_one: bool = False,
                  grid_n: int = 256) -> TorusMap:
    """Parse the dict form produced by map_to_dict, with full validation."""
    if not isinstance(data, dict):
        raise MapValidationError(f"map definition must be an object, got {type(data).__name__}")
    unknown = set(data) - {"linear", "pert_x", "pert_y"}
    if unknown:
        raise MapValidationError(f"unknown keys in map definition: {sorted(unknown)}")
    if "linear" not in data:
        raise MapValidationError("map definition missing 'linear'")

    def parse_terms(lst, label):
        if lst is None:
            return ()
        out = []
        for i, t in enumerate(lst):
            if not isinstance(t, dict) or set(t) - {"fx", "fy", "sin", "cos"}:
                raise MapValidationError(f"{label}[{i}] must be an object with fx/fy/sin/cos")
            out.append((t.get("fx", 0), t.get("fy", 0), t.get("sin", 0.0), t.get("cos", 0.0)))
        return out

    return make_map(data["linear"],
                    parse_terms(data.get("pert_x", []), "pert_x"),
                    parse_terms(data.get("pert_y", []), "pert_y"),
                    allow_degree_one=allow_degree_one, grid_n=grid_n)
