"""Arithmetic on the projective line of directions in the plane.

A direction is an angle mod pi.  A (projective) interval is stored as a
center/half-width pair.  To sidestep wraparound case analysis every interval
operation doubles angles first: directions mod pi become points on the unit
circle mod 2*pi, proper intervals become arcs shorter than the full circle,
and the arc bounded by two endpoints "on the side containing a witness
point" is unambiguous.  All functions broadcast over numpy arrays.
"""
from __future__ import annotations

import numpy as np

PI = np.pi
TWO_PI = 2.0 * np.pi


def wrap_direction(theta):
    """Reduce an angle into [0, pi)."""
    return np.mod(theta, PI)


def direction_of(vx, vy):
    """Direction mod pi of the vector (vx, vy)."""
    return np.mod(np.arctan2(vy, vx), PI)


def signed_gap(a, b):
    """Signed projective difference a - b, wrapped into (-pi/2, pi/2]."""
    return PI / 2 - np.mod(PI / 2 - (a - b), PI)


def distance(a, b):
    """Projective distance between two directions, in [0, pi/2]."""
    return np.abs(signed_gap(a, b))


def arc_between(bound1, bound2, witness):
    """Doubled-angle arc bounded by two directions, on the witness's side.

    Args:
        bound1, bound2: boundary directions (mod pi).
        witness: direction known to lie inside the wanted interval.

    Returns:
        (center, half_width) of the projective interval.  half_width may
        reach up to just below pi/2 for images of proper cones.
    """
    b1, b2, m = 2.0 * np.asarray(bound1), 2.0 * np.asarray(bound2), 2.0 * np.asarray(witness)
    span = np.mod(b2 - b1, TWO_PI)
    inside = np.mod(m - b1, TWO_PI) <= span
    center2 = np.where(inside, b1 + 0.5 * span, b2 + 0.5 * (TWO_PI - span))
    half2 = np.where(inside, 0.5 * span, 0.5 * (TWO_PI - span))
    return wrap_direction(0.5 * center2), 0.5 * half2


def intersect(center_a, half_a, center_b, half_b):
    """Intersect two projective intervals known to overlap.

    Works in coordinates relative to interval A; valid whenever the two
    intervals share a direction (the use case: nested pullbacks of a
    complement cone all contain the center direction).  If roundoff makes
    the overlap empty the narrower input is returned.

    Returns:
        (center, half_width) arrays.
    """
    ca2, cb2 = 2.0 * np.asarray(center_a), 2.0 * np.asarray(center_b)
    ha2, hb2 = 2.0 * np.asarray(half_a), 2.0 * np.asarray(half_b)
    d = np.mod(cb2 - ca2 + PI, TWO_PI) - PI
    lo = np.maximum(-ha2, d - hb2)
    hi = np.minimum(ha2, d + hb2)
    empty = lo > hi
    a_narrower = ha2 <= hb2
    center2 = np.where(empty, np.where(a_narrower, ca2, cb2), ca2 + 0.5 * (lo + hi))
    half2 = np.where(empty, np.where(a_narrower, ha2, hb2), 0.5 * (hi - lo))
    return wrap_direction(0.5 * center2), 0.5 * half2


def contains(center, half_width, theta, slack=0.0):
    """Whether direction theta lies in the interval, with optional slack."""
    return distance(theta, center) <= half_width + slack


def interpolate_grid(angles, x, y):
    """Bilinear interpolation of a direction grid sampled at cell centers.

    The grid covers the unit torus: entry [j, i] is the direction at
    ((i + 0.5)/W, (j + 0.5)/H), both axes periodic.  Angles are doubled to
    unit vectors before averaging so the pi-wraparound never tears.

    Args:
        angles: (H, W) direction grid.
        x, y: arbitrary coordinates (arrays ok).

    Returns:
        Interpolated directions mod pi.
    """
    h, w = angles.shape
    sin2 = np.sin(2.0 * angles)
    cos2 = np.cos(2.0 * angles)
    u = np.asarray(x) * w - 0.5
    v = np.asarray(y) * h - 0.5
    i0 = np.floor(u).astype(np.int64)
    j0 = np.floor(v).astype(np.int64)
    fu = u - i0
    fv = v - j0
    i0m, i1m = np.mod(i0, w), np.mod(i0 + 1, w)
    j0m, j1m = np.mod(j0, h), np.mod(j0 + 1, h)
    c = ((1 - fu) * (1 - fv) * cos2[j0m, i0m] + fu * (1 - fv) * cos2[j0m, i1m]
         + (1 - fu) * fv * cos2[j1m, i0m] + fu * fv * cos2[j1m, i1m])
    s = ((1 - fu) * (1 - fv) * sin2[j0m, i0m] + fu * (1 - fv) * sin2[j0m, i1m]
         + (1 - fu) * fv * sin2[j1m, i0m] + fu * fv * sin2[j1m, i1m])
    return wrap_direction(0.5 * np.arctan2(s, c))


def interpolate_scalar_grid(values, x, y):
    """Bilinear interpolation of a plain scalar grid at cell centers (periodic)."""
    h, w = values.shape
    u = np.asarray(x) * w - 0.5
    v = np.asarray(y) * h - 0.5
    i0 = np.floor(u).astype(np.int64)
    j0 = np.floor(v).astype(np.int64)
    fu = u - i0
    fv = v - j0
    i0m, i1m = np.mod(i0, w), np.mod(i0 + 1, w)
    j0m, j1m = np.mod(j0, h), np.mod(j0 + 1, h)
    return ((1 - fu) * (1 - fv) * values[j0m, i0m] + fu * (1 - fv) * values[j0m, i1m]
            + (1 - fu) * fv * values[j1m, i0m] + fu * fv * values[j1m, i1m])
