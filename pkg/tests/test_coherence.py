"""Center-curve tracing, invariant-circle hunting, growth-bound experiments."""
import dataclasses

import numpy as np
import pytest

from toruslab import Cone, ConeField, compute_center_field, make_map
from toruslab.coherence import (
    CenterCurve,
    GrowthReport,
    circle_restriction_report,
    contradiction_bounds,
    curve_hausdorff_mod1,
    grow_unstable_curve,
    hunt_invariant_circles,
    integrate_center_curve,
    tube_area,
)
from toruslab.cones import CenterField
from toruslab.errors import PreconditionError, StepSizeError, TangencyError
from toruslab.semiconjugacy import solve

PI = np.pi


@pytest.fixture(scope="module")
def e1_field(e1, horizontal_cone):
    return compute_center_field(e1, horizontal_cone, 32)


@pytest.fixture(scope="module")
def e2_field(e2, horizontal_cone):
    return compute_center_field(e2, horizontal_cone, 64)


# --- tracing -----------------------------------------------------------------

def test_trace_linear_vertical_circle(e1_field):
    curve = integrate_center_curve(e1_field, (0.25, 0.0))
    assert curve.closed
    assert curve.homotopy_class == (0, 1)
    assert curve.length == pytest.approx(1.0, abs=1e-9)
    # snapped endpoints differ by exactly the homotopy class
    assert np.allclose(curve.points[-1] - curve.points[0], (0.0, 1.0))


def test_trace_anosov_never_closes(anosov):
    lam_plus = (3 + np.sqrt(5)) / 2
    expanding = np.mod(np.arctan2(1.0, lam_plus - 1.0), PI)
    cones = ConeField.constant(Cone(axis=expanding, half_width=0.3))
    field = compute_center_field(anosov, cones, 16, depth=40)
    curve = integrate_center_curve(field, (0.2, 0.7), max_len=20.0)
    assert not curve.closed
    assert curve.homotopy_class is None
    # ran to the length cap: irrational slope lines cannot return
    assert curve.length == pytest.approx(20.0, rel=1e-3)


def test_trace_perturbed_closes_with_eigenvector_class(e2, e2_field):
    lin = np.array(e2.linear, dtype=np.int64)
    rng = np.random.default_rng(2)
    closed = 0
    for seed in rng.uniform(0, 1, (10, 2)):
        curve = integrate_center_curve(e2_field, seed)
        if not curve.closed:
            continue
        closed += 1
        w = np.array(curve.homotopy_class, dtype=np.int64)
        iw = lin @ w
        # exact integer parallelism: class is an eigenvector of the action
        assert iw[0] * w[1] == iw[1] * w[0]
        assert 1.0 < curve.length < 1.1
    assert closed >= 5


def test_trace_rejects_wide_center_widths():
    field = CenterField(np.zeros((4, 4)), np.full((4, 4), 0.2), depth=1, tol=0.1)
    with pytest.raises(TangencyError, match="width bound"):
        integrate_center_curve(field, (0.5, 0.5), tangency_tol=0.05)


def test_trace_step_too_coarse_for_turning_field():
    angles = np.zeros((8, 8))
    angles[:, 4:6] = PI / 2
    field = CenterField(angles, np.zeros((8, 8)), depth=1, tol=1e-10)
    with pytest.raises(StepSizeError):
        integrate_center_curve(field, (0.1, 0.5), step=0.2)


def test_trace_validates_step(e1_field):
    with pytest.raises(PreconditionError):
        integrate_center_curve(e1_field, (0.1, 0.1), step=0.0)
    with pytest.raises(PreconditionError):
        integrate_center_curve(e1_field, (0.1, 0.1), step=1.0, max_len=0.5)


# --- torus Hausdorff distance --------------------------------------------------

def test_hausdorff_identical_and_shifted_curves():
    t = np.linspace(0.0, 1.0, 400)
    a = np.stack([t, 0.3 + 0.05 * np.sin(2 * PI * t)], axis=1)
    assert curve_hausdorff_mod1(a, a) < 1e-12
    b = a + np.array([2.0, -1.0])  # integer translate: same torus curve
    assert curve_hausdorff_mod1(a, b) < 1e-12


def test_hausdorff_separated_vertical_circles():
    t = np.linspace(0.0, 1.0, 200)
    a = np.stack([np.full_like(t, 0.25), t], axis=1)
    b = np.stack([np.full_like(t, 0.75), t], axis=1)
    assert curve_hausdorff_mod1(a, b) == pytest.approx(0.5, abs=1e-9)


# --- restriction reports ---------------------------------------------------------

def test_restriction_identity_on_linear_circles(e1, e1_field):
    curve = integrate_center_curve(e1_field, (0.0, 0.0))
    rep = circle_restriction_report(e1, curve)
    assert rep.degree == 1
    assert rep.period == 1
    assert rep.arc_length == pytest.approx(1.0, abs=1e-9)
    assert rep.jacobian_integral == pytest.approx(1.0, abs=1e-9)
    assert rep.max_jacobian == pytest.approx(1.0, abs=1e-12)
    assert rep.invariance_hausdorff < 1e-9


def test_restriction_degree_three_circle(circle3):
    # the horizontal circle y = 0.3 is invariant; the restriction is the
    # circle map x -> 3x + 0.1 sin(2 pi x) of degree 3 with mean stretch 3
    t = np.linspace(0.0, 1.0, 1001)
    pts = np.stack([t, np.full_like(t, 0.3)], axis=1)
    curve = CenterCurve(pts, True, (1, 0))
    rep = circle_restriction_report(circle3, curve)
    assert rep.degree == 3
    assert rep.arc_length == pytest.approx(1.0, abs=1e-12)
    assert abs(rep.jacobian_integral - 3.0 * rep.arc_length) < 1e-5
    assert rep.max_jacobian >= 3.0 - 1e-9
    assert rep.max_jacobian == pytest.approx(3.0 + 0.2 * PI, abs=1e-3)


def test_restriction_rejects_open_curve(e1):
    pts = np.stack([np.linspace(0, 0.5, 100), np.full(100, 0.2)], axis=1)
    with pytest.raises(PreconditionError, match="closed"):
        circle_restriction_report(e1, CenterCurve(pts, False, None))


def test_restriction_rejects_trivial_class(e1):
    t = np.linspace(0, 2 * PI, 100)
    pts = 0.1 * np.stack([np.cos(t), np.sin(t)], axis=1) + 0.5
    with pytest.raises(PreconditionError, match="trivial"):
        circle_restriction_report(e1, CenterCurve(pts, True, (0, 0)))


def test_restriction_rejects_moving_curve(e1):
    t = np.linspace(0.0, 1.0, 300)
    pts = np.stack([np.full_like(t, 0.3), t], axis=1)  # maps to x = 0.9
    with pytest.raises(PreconditionError, match="not invariant"):
        circle_restriction_report(e1, CenterCurve(pts, True, (0, 1)))


def test_restriction_rejects_unpreserved_class(e1):
    t = np.linspace(0.0, 1.0, 300)
    pts = np.stack([t, t], axis=1)  # class (1,1): image class (3,1)
    with pytest.raises(PreconditionError, match="not preserved"):
        circle_restriction_report(e1, CenterCurve(pts, True, (1, 1)),
                                  invariance_tol=10.0)


# --- the hunt ---------------------------------------------------------------------

def test_hunt_linear_finds_the_two_fixed_circles(e1, e1_field):
    found = hunt_invariant_circles(e1, e1_field, seeds=4, period_max=1)
    assert len(found) == 2
    xs = sorted(float(np.mod(c.points[0, 0], 1.0)) for c, _ in found)
    assert xs == pytest.approx([0.0, 0.5], abs=1e-9)
    for curve, rep in found:
        assert curve.homotopy_class == (0, 1)
        assert rep.degree == 1
        assert rep.period == 1
        assert rep.arc_length == pytest.approx(1.0, abs=1e-9)


def test_hunt_period_two_adds_the_swapped_pair(e1, e1_field):
    found = hunt_invariant_circles(e1, e1_field, seeds=4, period_max=2)
    xs = sorted(float(np.mod(c.points[0, 0], 1.0)) for c, _ in found)
    assert xs == pytest.approx([0.0, 0.25, 0.5, 0.75], abs=1e-9)
    by_x = {float(np.mod(c.points[0, 0], 1.0)): rep.period for c, rep in found}
    assert by_x[0.0] == 1 and by_x[0.5] == 1
    assert by_x[0.25] == 2 and by_x[0.75] == 2


def test_hunt_degree_bounded_by_center_stretch(e1, e1_field, horizontal_cone):
    # circles found by the hunt are center circles: their restriction degree
    # is capped by the center stretch, which sits strictly under lambda_abs
    from toruslab import classify
    rep_ph = classify(e1, horizontal_cone, 32)
    found = hunt_invariant_circles(e1, e1_field, seeds=4, period_max=1)
    for _, rep in found:
        assert abs(rep.degree) <= rep_ph.mu_abs + 1e-9
        assert abs(rep.degree) < rep_ph.lambda_abs


def test_hunt_anosov_is_empty(anosov):
    lam_plus = (3 + np.sqrt(5)) / 2
    expanding = np.mod(np.arctan2(1.0, lam_plus - 1.0), PI)
    cones = ConeField.constant(Cone(axis=expanding, half_width=0.3))
    field = compute_center_field(anosov, cones, 16, depth=40)
    assert hunt_invariant_circles(anosov, field, seeds=3, period_max=2) == []


def test_hunt_perturbed_is_empty(e2, e2_field):
    # closed center leaves exist but none is mapped back onto itself
    assert hunt_invariant_circles(e2, e2_field, seeds=4, period_max=1) == []


def test_hunt_validates_inputs(e1, e1_field):
    with pytest.raises(PreconditionError):
        hunt_invariant_circles(e1, e1_field, seeds=0)
    with pytest.raises(PreconditionError):
        hunt_invariant_circles(e1, e1_field, period_max=0)


# --- tube areas -------------------------------------------------------------------

def test_tube_area_stadium_closed_form():
    for length in (1.0, 3.0):
        seg = np.array([[0.0, 0.0], [length, 0.0]])
        area = tube_area(seg, cell=0.01)
        exact = 2.0 * length + PI
        assert abs(area - exact) / exact < 0.02


def test_tube_area_single_point_is_unit_disc():
    area = tube_area(np.array([[0.3, 0.7]]), cell=0.01)
    assert abs(area - PI) / PI < 0.02


def test_tube_area_validates_input():
    with pytest.raises(PreconditionError):
        tube_area(np.zeros((3, 3)))
    with pytest.raises(PreconditionError):
        tube_area(np.array([[0.0, 0.0], [1.0, 0.0]]), cell=0.0)


# --- growth experiments --------------------------------------------------------------

def test_growth_linear_exact_powers(e1, horizontal_cone):
    j0 = np.array([[0.0, 0.5], [1.0, 0.5]])
    rep = grow_unstable_curve(e1, horizontal_cone, j0, n_max=4)
    assert np.allclose(rep.lengths, 3.0 ** np.arange(5), rtol=1e-12)
    assert rep.lambda_fit == pytest.approx(3.0, abs=1e-9)
    # straight-segment tubes are stadiums: area = 2 len + pi
    assert np.allclose(rep.areas, 2.0 * rep.lengths + PI, rtol=0.02)
    assert rep.K_estimate == pytest.approx(2.0 + PI / 81.0, rel=0.01)
    assert rep.lower_bounds is None and rep.crossover_n is None


def test_growth_fit_is_scale_invariant(e1, horizontal_cone):
    tiny = np.array([[0.2, 0.5], [0.2 + 1e-3, 0.5]])
    rep = grow_unstable_curve(e1, horizontal_cone, tiny, n_max=4)
    assert rep.lambda_fit == pytest.approx(3.0, abs=1e-9)
    assert rep.K_estimate > 0.5


def test_growth_perturbed_fit_within_expansion_bounds(e2, horizontal_cone):
    from toruslab import classify
    ph = classify(e2, horizontal_cone, 64)
    j0 = np.array([[0.0, 0.5], [1.0, 0.5]])
    rep = grow_unstable_curve(e2, horizontal_cone, j0, n_max=5)
    assert 0.98 * ph.lambda_abs <= rep.lambda_fit <= 1.02 * ph.expansion_max
    assert rep.K_estimate > 0.5
    assert np.all(np.diff(rep.lengths) > 0)


def test_growth_rejects_non_tangent_seed(e1, horizontal_cone):
    vertical = np.array([[0.5, 0.0], [0.5, 1.0]])
    with pytest.raises(PreconditionError, match="not cone-tangent"):
        grow_unstable_curve(e1, horizontal_cone, vertical, n_max=2)


def test_growth_tangency_breaks_under_narrow_cone(e2):
    narrow = ConeField.constant(Cone(axis=0.0, half_width=0.02))
    j0 = np.array([[0.0, 0.5], [1.0, 0.5]])
    with pytest.raises(TangencyError, match="left the cone at iterate 1"):
        grow_unstable_curve(e2, narrow, j0, n_max=3)


def test_growth_validates_inputs(e1, horizontal_cone):
    with pytest.raises(PreconditionError):
        grow_unstable_curve(e1, horizontal_cone, np.zeros((1, 2)), n_max=2)
    j0 = np.array([[0.0, 0.5], [1.0, 0.5]])
    with pytest.raises(PreconditionError):
        grow_unstable_curve(e1, horizontal_cone, j0, n_max=0)


# --- contradiction bounds ---------------------------------------------------------------

def _synthetic_growth(lam: float, n_max: int = 12) -> GrowthReport:
    ns = np.arange(n_max + 1)
    lengths = lam ** ns.astype(float)
    return GrowthReport(
        ns=ns, lengths=lengths, areas=2.0 * lengths,
        cells=np.full(n_max + 1, 0.01), K_estimate=2.0, lambda_fit=lam,
        j0=np.array([[0.0, 0.5], [1.0, 0.5]]))


def test_contradiction_fast_growth_crosses(strip2):
    semi = solve(strip2, tol=1e-10)
    rep = contradiction_bounds(strip2, semi, _synthetic_growth(3.0), K=2.0)
    assert rep.crossover_n == 2
    assert rep.ell == 2
    assert rep.len_h == pytest.approx(1.0, abs=1e-12)
    assert rep.lam == 3.0
    # beyond the crossover the gap only widens
    ratios = rep.lower_bounds / rep.upper_bounds
    assert np.all(ratios[rep.crossover_n:] > 1.0)
    assert np.all(np.diff(ratios[rep.crossover_n:]) > 0)


def test_contradiction_ratio_growth_tracks_lam_over_ell(strip2):
    semi = solve(strip2, tol=1e-10)
    rep = contradiction_bounds(strip2, semi, _synthetic_growth(3.0), K=2.0)
    ratios = rep.lower_bounds / rep.upper_bounds
    factors = ratios[1:] / ratios[:-1]
    # per-step factor approaches lam/ell = 1.5 from above as the additive
    # margin washes out of the upper bound
    window = factors[5:12]
    assert np.all(np.abs(window - 1.5) / 1.5 < 0.05)
    assert np.all(factors > 1.5 - 1e-12)


def test_contradiction_matched_growth_never_crosses(strip2):
    semi = solve(strip2, tol=1e-10)
    rep = contradiction_bounds(strip2, semi, _synthetic_growth(2.0), K=2.0)
    assert rep.crossover_n is None
    assert np.max(rep.lower_bounds / rep.upper_bounds) < 1.0


def test_contradiction_crossover_robust_to_margin_doubling(strip2):
    # the verdict survives a doubled correction bound: crossover shifts by
    # at most ceil(log_{lam/ell} of the upper-bound inflation) + 1
    semi = solve(strip2, tol=1e-10)
    base = contradiction_bounds(strip2, semi, _synthetic_growth(3.0), K=2.0)
    fat = dataclasses.replace(semi, u_sup=2.0 * semi.u_sup)
    shifted = contradiction_bounds(strip2, fat, _synthetic_growth(3.0), K=2.0)
    assert shifted.crossover_n is not None
    inflation = ((2 * fat.u_sup + 2) / (2 * semi.u_sup + 2)) ** 2
    max_shift = int(np.ceil(np.log(inflation) / np.log(1.5))) + 1
    assert base.crossover_n <= shifted.crossover_n <= base.crossover_n + max_shift


def test_contradiction_explicit_lam_overrides_fit(strip2):
    semi = solve(strip2, tol=1e-10)
    rep = contradiction_bounds(strip2, semi, _synthetic_growth(3.0), K=2.0,
                               lam=2.0)
    assert rep.lam == 2.0
    assert rep.crossover_n is None


def test_contradiction_validates_inputs(strip2, e4_strip):
    semi = solve(strip2, tol=1e-10)
    with pytest.raises(PreconditionError, match="ell"):
        contradiction_bounds(e4_strip, semi, _synthetic_growth(3.0), K=2.0)
    with pytest.raises(PreconditionError, match="positive"):
        contradiction_bounds(strip2, semi, _synthetic_growth(3.0), K=0.0)
    off = _synthetic_growth(3.0)
    off = dataclasses.replace(off, j0=np.array([[0.0, -0.5], [1.0, -0.5]]))
    with pytest.raises(PreconditionError, match="strip"):
        contradiction_bounds(strip2, semi, off, K=2.0)
