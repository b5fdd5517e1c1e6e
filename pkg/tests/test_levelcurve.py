import math

import numpy as np
import pytest

import sphere_qmc as sq
from sphere_qmc.errors import (
    DegenerateCapError,
    InvalidInputError,
    SingularDomainError,
)

PI = math.pi


def bisect(f, lo, hi, tol=1e-12):
    flo = f(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (flo > 0) == (fm > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo < tol:
            break
    return 0.5 * (lo + hi)


def special_curvature(v, tau):
    """Curvature along the north-pole-touching curve t = 1 - 2v (test-local
    reference formula)."""
    w = (1 - v) * v
    num = -16 * PI**2 * (1 - 2 * v) * (1 - tau) * (2 * w - (1 + 6 * w) * tau + 2 * tau**2)
    den = ((1 - 2 * v) ** 2 - 16 * PI**2 * (1 - tau) ** 2 * tau * (tau - 4 * w)) ** 1.5
    return num / den


def test_level_function_hemisphere_boundary():
    prob = sq.CapPreimageProblem(0.5, 0.5, 0.0)
    assert sq.level_function(prob, 0.25, 0.5) == pytest.approx(0.0, abs=1e-15)


def test_level_function_at_center_and_antipode():
    prob = sq.CapPreimageProblem(0.3, 0.4, 0.2)
    assert sq.level_function(prob, 0.3, 0.4) == pytest.approx(-2 * (1 - 0.2), abs=1e-12)
    assert sq.level_function(prob, 0.8, 0.6) == pytest.approx(2 * (1 + 0.2), abs=1e-12)


def test_gradient_zero_alpha_component_on_axis():
    prob = sq.CapPreimageProblem(0.37, 0.29, 0.1)
    f_a, _ = sq.level_gradient(prob, 0.37, 0.7)
    assert f_a == pytest.approx(0.0, abs=1e-12)


def test_gradient_quarter_turn_values():
    prob = sq.CapPreimageProblem(0.5, 0.5, 0.0)
    f_a, f_t = sq.level_gradient(prob, 0.25, 0.5)
    assert f_t == pytest.approx(0.0, abs=1e-12)
    assert f_a == pytest.approx(-4.0 * PI, abs=1e-12)


def test_gradient_matches_finite_differences():
    prob = sq.CapPreimageProblem(0.37, 0.29, 0.1)
    h = 1e-6
    grid = np.linspace(0.01, 0.99, 100)
    worst = 0.0
    for a in grid:
        f_a, f_t = sq.level_gradient(prob, a, grid)
        fd_a = (sq.level_function(prob, a + h, grid) - sq.level_function(prob, a - h, grid)) / (2 * h)
        fd_t = (sq.level_function(prob, a, grid + h) - sq.level_function(prob, a, grid - h)) / (2 * h)
        worst = max(worst, np.max(np.abs(f_a - fd_a)), np.max(np.abs(f_t - fd_t)))
    assert worst <= 1e-5


def test_gradient_singular_at_poles():
    prob = sq.CapPreimageProblem(0.5, 0.5, 0.0)
    with pytest.raises(SingularDomainError):
        sq.level_gradient(prob, 0.2, 0.0)
    with pytest.raises(SingularDomainError):
        sq.level_gradient(prob, 0.2, 1.0)


def test_curvature_zero_lines_for_equatorial_center():
    for tau in (0.1, 0.37, 0.5, 0.9):
        assert sq.signed_curvature(0.5, 0.5, 0.75, tau) == pytest.approx(0.0, abs=1e-12)
        assert sq.signed_curvature(0.5, 0.5, 0.25, tau) == pytest.approx(0.0, abs=1e-12)


def test_curvature_zero_at_quarter_lines_midheight():
    for v in (0.2, 0.35, 0.7):
        assert sq.signed_curvature(0.5, v, 0.25, 0.5) == pytest.approx(0.0, abs=1e-12)
        assert sq.signed_curvature(0.5, v, 0.75, 0.5) == pytest.approx(0.0, abs=1e-12)


def test_curvature_on_meridians_matches_closed_forms():
    # on the two symmetry meridians the curvature collapses to closed forms
    # (derived from the defining partials; tau = v resp. tau = 1 - v are the
    # degenerate heights and stay excluded):
    #   alpha = u:         +8 pi^2 sqrt(W) T / |V sqrt(T) - H sqrt(W)|
    #   alpha = u +- 1/2:  -8 pi^2 sqrt(W) T / |V sqrt(T) + H sqrt(W)|
    u, v = 0.5, 0.25
    sv = math.sqrt((1 - v) * v)
    for tau in (0.1, 0.4, 0.8):
        st = math.sqrt((1 - tau) * tau)
        big_t = (1 - tau) * tau
        v1, h = 1 - 2 * v, 1 - 2 * tau
        got_center = sq.signed_curvature(u, v, u, tau)
        want_center = 8 * PI**2 * sv * big_t / abs(v1 * st - h * sv)
        assert got_center == pytest.approx(want_center, rel=1e-12)
        got_anti = sq.signed_curvature(u, v, u + 0.5, tau)
        want_anti = -8 * PI**2 * sv * big_t / abs(v1 * st + h * sv)
        assert got_anti == pytest.approx(want_anti, rel=1e-12)


def test_curvature_degenerate_at_center():
    with pytest.raises(DegenerateCapError):
        sq.signed_curvature(0.5, 0.3, 0.5, 0.3)


def test_cubic_equatorial_midheight():
    c = sq.curvature_cubic(0.5, 0.5)
    assert c.p == pytest.approx(-1.0, abs=1e-15)
    assert c.q == pytest.approx(0.0, abs=1e-15)


def test_cubic_odd_in_q_for_equatorial_center():
    for tau in (0.1, 0.3, 0.8):
        assert sq.curvature_cubic(0.5, tau).q == pytest.approx(0.0, abs=1e-15)


def test_cubic_symmetry_in_tau():
    rng = np.random.Generator(np.random.Philox(17))
    for _ in range(100):
        v = float(rng.uniform(0.01, 0.99))
        tau = float(rng.uniform(0.01, 0.99))
        c1 = sq.curvature_cubic(v, tau)
        c2 = sq.curvature_cubic(v, 1.0 - tau)
        assert c2.p == pytest.approx(c1.p, abs=1e-12)
        assert c2.q == pytest.approx(-c1.q, abs=1e-12)
        x = float(rng.uniform(-1.0, 1.0))
        assert c1(x) == pytest.approx(-c2(-x), abs=1e-12)


def test_discriminant_positive_on_grid():
    vs = np.linspace(0.005, 0.995, 60)
    for v in vs:
        for tau in vs:
            assert sq.curvature_cubic(float(v), float(tau)).discriminant > 0.0


def test_root_zero_for_equatorial_center():
    for tau in (0.2, 0.7):
        assert sq.cubic_root_in_unit_interval(sq.curvature_cubic(0.5, tau)) == pytest.approx(
            0.0, abs=1e-15
        )


def test_root_location_and_bisection_oracle():
    # (v, tau) on the surfaces tau = v or tau = 1 - v put a root of Q at
    # +/-1 exactly, so probe generic quadrant points
    c = sq.curvature_cubic(0.25, 0.4)
    root = sq.cubic_root_in_unit_interval(c)
    assert 0.0 < root < 1.0
    assert root == pytest.approx(bisect(c, 0.0, 1.0), abs=1e-10)
    c2 = sq.curvature_cubic(0.25, 0.6)
    root2 = sq.cubic_root_in_unit_interval(c2)
    assert -1.0 < root2 < 0.0
    assert root2 == pytest.approx(bisect(c2, -1.0, 0.0), abs=1e-10)


def test_root_side_follows_quadrant_rule():
    rng = np.random.Generator(np.random.Philox(23))
    for _ in range(200):
        v = float(rng.uniform(0.02, 0.98))
        tau = float(rng.uniform(0.02, 0.98))
        if abs(v - 0.5) < 1e-3 or abs(tau - 0.5) < 1e-3:
            continue
        root = sq.cubic_root_in_unit_interval(sq.curvature_cubic(v, tau))
        if (0.5 - v) * (0.5 - tau) > 0:
            assert root > 0
        else:
            assert root < 0


# one generic representative per quadrant (tau = v and tau = 1 - v are the
# degenerate surfaces where Q(+/-1) = 0 and the quadrant rule is void)
STURM_ROWS = [
    (0.25, 0.40, [2, 2, 1], 0, 1),
    (0.25, 0.60, [2, 1, 1], 1, 0),
    (0.75, 0.40, [2, 1, 1], 1, 0),
    (0.75, 0.60, [2, 2, 1], 0, 1),
]


@pytest.mark.parametrize("v,tau,sigmas,neg,pos", STURM_ROWS)
def test_sturm_table_rows(v, tau, sigmas, neg, pos):
    c = sq.curvature_cubic(v, tau)
    got = [sq.sturm_sign_changes(c, x) for x in (-1.0, 0.0, 1.0)]
    assert got == sigmas
    assert got[0] - got[1] == neg  # roots in (-1, 0]
    assert got[1] - got[2] == pos  # roots in (0, 1]


def test_sturm_differences_count_actual_roots():
    rng = np.random.Generator(np.random.Philox(29))
    for _ in range(50):
        v = float(rng.uniform(0.05, 0.95))
        tau = float(rng.uniform(0.05, 0.95))
        if abs(tau - 0.5) < 1e-3:
            continue
        c = sq.curvature_cubic(v, tau)
        roots = np.roots([1.0, 0.0, c.p, c.q])
        in01 = int(np.sum((roots.real > 0) & (roots.real <= 1)))
        assert sq.sturm_sign_changes(c, 0.0) - sq.sturm_sign_changes(c, 1.0) == in01


def test_critical_tau_against_root_finding():
    for v in (0.1, 0.25, 0.4):
        tau_v = sq.critical_tau(v)
        lo, hi = 1e-9, 4 * v * (1 - v) - 1e-9
        want = bisect(lambda s: special_curvature(v, s), lo, hi, tol=1e-14)
        assert tau_v == pytest.approx(want, abs=1e-10)
    assert sq.critical_tau(0.25) == pytest.approx(0.2234731937, abs=1e-9)


def test_critical_tau_vanishes_near_pole():
    assert sq.critical_tau(1e-8) < 1e-7
    with pytest.raises(DegenerateCapError):
        sq.critical_tau(0.5)


def test_critical_tau_symmetric_extremum():
    # the zero-curvature curve is extremal at both tau_v and 1 - tau_v
    for v in (0.15, 0.3):
        tau_v = sq.critical_tau(v)
        x1 = sq.cubic_root_in_unit_interval(sq.curvature_cubic(v, tau_v))
        x2 = sq.cubic_root_in_unit_interval(sq.curvature_cubic(v, 1.0 - tau_v))
        assert x2 == pytest.approx(-x1, abs=1e-12)


def test_extremal_x_values():
    assert sq.extremal_x(0.5) == 0.0
    assert sq.extremal_x(1e-9) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-6)
    for v in np.linspace(0.01, 0.99, 50):
        assert abs(sq.extremal_x(float(v))) <= 1.0 / math.sqrt(2.0) + 1e-12


def test_extremal_x_is_the_extremal_cubic_root():
    for v in (0.1, 0.25, 0.4, 0.7):
        tau_v = sq.critical_tau(v)
        root = sq.cubic_root_in_unit_interval(sq.curvature_cubic(v, tau_v))
        assert sq.extremal_x(v) == pytest.approx(root, abs=1e-10)


def test_curvature_along_level_matches_direct():
    rng = np.random.Generator(np.random.Philox(31))
    hits = 0
    while hits < 100:
        v = float(rng.uniform(0.05, 0.95))
        t = float(rng.uniform(-0.9, 0.9))
        tau = float(rng.uniform(0.05, 0.95))
        x = t - (1 - 2 * v) * (1 - 2 * tau)
        w = (1 - v) * v
        if x * x >= 16 * w * (1 - tau) * tau:
            continue
        hits += 1
        prob = sq.CapPreimageProblem(0.5, v, t)
        kappa_poly = sq.curvature_along_level(prob, tau)
        cos_val = x / (4 * math.sqrt(w * (1 - tau) * tau))
        alpha = 0.5 - math.acos(cos_val) / (2 * PI)
        kappa_direct = sq.signed_curvature(0.5, v, alpha, tau)
        assert kappa_poly == pytest.approx(kappa_direct, rel=1e-8, abs=1e-8)


def test_curvature_along_level_domain_check():
    prob = sq.CapPreimageProblem(0.5, 0.25, 0.9)
    with pytest.raises(InvalidInputError):
        sq.curvature_along_level(prob, 0.9)  # far outside the tiny cap's range


def test_curvature_along_critical_level_pole_limit():
    for v in (0.2, 0.35, 0.7):
        prob = sq.CapPreimageProblem(0.5, v, 1.0 - 2.0 * v)
        got = sq.curvature_along_level(prob, 1e-10)
        v1 = 1.0 - 2.0 * v
        want = -32 * PI**2 * (v1 / abs(v1) ** 3) * (1 - v) * v
        assert got == pytest.approx(want, rel=1e-5)


def test_curvature_along_critical_level_vanishes_at_tau_v():
    for v in (0.1, 0.2, 0.3, 0.4):
        prob = sq.CapPreimageProblem(0.5, v, 1.0 - 2.0 * v)
        assert abs(sq.curvature_along_level(prob, sq.critical_tau(v))) < 1e-10


def test_trace_verticals_for_equatorial_hemisphere():
    trace = sq.trace_level_curve(sq.CapPreimageProblem(0.5, 0.5, 0.0), resolution=128)
    assert trace.topology == "verticals"
    assert len(trace.segments) == 2
    alphas = sorted(seg.alpha[0] for seg in trace.segments)
    assert alphas == pytest.approx([0.25, 0.75])
    for seg in trace.segments:
        assert np.nanmax(np.abs(seg.kappa)) < 1e-8
    assert trace.transversal_pairs == 0


def test_trace_critical_curve_one_pair_at_tau_v():
    v = 0.25
    trace = sq.trace_level_curve(sq.CapPreimageProblem(0.5, v, 0.5), resolution=512)
    assert trace.topology == "critical-arc"
    assert trace.transversal_pairs == 1
    seg = trace.segments[0]
    finite = np.isfinite(seg.kappa)
    k = seg.kappa[finite]
    taus = seg.tau[finite]
    flips = np.nonzero(np.sign(k[:-1]) * np.sign(k[1:]) < 0)[0]
    assert len(flips) == 2
    tau_v = sq.critical_tau(v)
    for f in flips:
        assert abs(taus[f] - tau_v) < 0.01


def test_trace_wrap_curves_have_one_pair():
    rng = np.random.Generator(np.random.Philox(37))
    for _ in range(6):
        v = float(rng.uniform(0.05, 0.45))
        t = float(rng.uniform(-(1 - 2 * v), 1 - 2 * v))
        trace = sq.trace_level_curve(sq.CapPreimageProblem(0.5, v, t), resolution=256)
        assert trace.topology in ("wrap", "critical-arc")
        assert trace.transversal_pairs == 1, (v, t)


def test_trace_small_caps_never_one_transversal_pair():
    rng = np.random.Generator(np.random.Philox(41))
    for _ in range(6):
        v = float(rng.uniform(0.05, 0.45))
        t = float(rng.uniform(1 - 2 * v + 1e-3, 0.999))
        trace = sq.trace_level_curve(sq.CapPreimageProblem(0.5, v, t), resolution=256)
        assert trace.topology == "loop"
        assert trace.transversal_pairs in (0, 2) or trace.tangential_pairs > 0, (v, t)


def test_trace_antipodal_loop():
    trace = sq.trace_level_curve(sq.CapPreimageProblem(0.2, 0.3, -0.7), resolution=256)
    assert trace.topology == "loop-antipodal"
    assert len(trace.segments) == 1
    assert trace.segments[0].closed


def test_trace_symmetric_about_center_meridian():
    trace = sq.trace_level_curve(sq.CapPreimageProblem(0.5, 0.3, 0.1), resolution=256)
    seg = trace.segments[0]
    # tau at u + d and u - d agree
    order = np.argsort(seg.alpha)
    alphas, taus = seg.alpha[order], seg.tau[order]
    for d in (0.1, 0.2, 0.3):
        left = np.interp(0.5 - d, alphas, taus)
        right = np.interp(0.5 + d, alphas, taus)
        assert left == pytest.approx(right, abs=1e-9)


def test_problem_validation():
    with pytest.raises(InvalidInputError):
        sq.CapPreimageProblem(0.5, 0.0, 0.1)
    with pytest.raises(InvalidInputError):
        sq.CapPreimageProblem(0.5, 0.5, 1.0)
    with pytest.raises(InvalidInputError):
        sq.CapPreimageProblem(1.5, 0.5, 0.0)
