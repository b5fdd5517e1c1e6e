"""Cross-module invariant battery backing the `verify` CLI subcommand.

Each check returns (name, ok, detail).  The quick level finishes in well
under a minute; the full level adds the large grids, deep nets and the
N = 200 exact-oracle runs.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import discrepancy as dsc
from . import generators as gen
from . import levelcurve as lc
from .points import lambert_map, random_square_points

Check = tuple[str, bool, str]


def _check_nets(max_m: dict[int, int]) -> Check:
    bad = []
    for b, mm in max_m.items():
        for m in range(mm + 1):
            net = gen.digital_net(gen.DigitalNetSpec.faure(b, m))
            if not gen.is_net(net, b, m):
                bad.append((b, m))
    return ("digital nets pass the elementary-interval oracle", not bad, f"failures: {bad}" if bad else "")


def _check_sequence(b: int, log_len: int) -> Check:
    n = b**log_len
    prefix = gen.digital_sequence_prefix(b, n)
    digits = prefix.provenance.digits
    bad = []
    for m in range(log_len + 1):
        size = b**m
        for k in range(n // size):
            block = prefix.points[k * size : (k + 1) * size]
            if not gen.is_net(block, b, m, digits=digits):
                bad.append((m, k))
    return (f"aligned blocks of the base-{b} sequence are nets", not bad, f"failures: {bad}" if bad else "")


def _check_stolarsky(n: int, sets: int, mc: int) -> Check:
    rng = np.random.Generator(np.random.Philox(7))
    worst = 0.0
    for i in range(sets):
        z = lambert_map(random_square_points(n, seed=1000 + i).points)
        s = dsc.sum_of_distances(z)
        d2 = dsc.l2_cap_discrepancy(z) ** 2
        worst = max(worst, abs(4.0 * d2 + s - 4.0 / 3.0))
    # Monte-Carlo estimate of the squared L2 discrepancy for the last set
    centers = lambert_map(rng.random((mc, 2)))
    heights = rng.uniform(-1.0, 1.0, mc)
    counts = (centers @ z.T > heights[:, None]).sum(axis=1) / n
    loc2 = (counts - (1.0 - heights) / 2.0) ** 2
    est = 2.0 * loc2.mean()
    se = 2.0 * loc2.std(ddof=1) / math.sqrt(mc)
    ok = worst < 1e-12 and abs(est - d2) <= 3.0 * se
    return (
        "Stolarsky identity and Monte-Carlo L2 cross-check",
        ok,
        f"identity residual {worst:.2e}; MC {est:.3e} vs exact {d2:.3e} (3se = {3*se:.1e})",
    )


def _check_min_distance(max_odd: int) -> Check:
    bad = []
    for m in range(7, max_odd + 1, 2):
        got = gen.min_distance(gen.fibonacci_lattice(m))
        if abs(got - 1.0 / math.sqrt(gen.fibonacci(m))) > 1e-12:
            bad.append(m)
    return ("Fibonacci lattice minimum distances", not bad, f"failures: {bad}" if bad else "")


def _check_sandwich(net_m: int, fib_m: int) -> Check:
    details = []
    ok = True
    cases = [(gen.digital_net(gen.DigitalNetSpec.faure(2, m)), dsc.iso_bound_net(2, m))
             for m in range(1, net_m + 1)]
    cases += [(gen.fibonacci_lattice(m), dsc.iso_bound_fibonacci(m)) for m in range(3, fib_m + 1)]
    for ps, iso in cases:
        z = ps.to_sphere()
        emp = dsc.empirical_cap_discrepancy(z).value
        exact = dsc.exact_cap_discrepancy(z).value
        l2 = dsc.l2_cap_discrepancy(z)
        bound = dsc.cap_bound_from_iso(iso)
        if not (emp <= exact + 1e-12 and exact <= bound and exact + 1e-12 >= l2 / math.sqrt(2.0)):
            ok = False
            details.append(f"{ps.provenance.kind} n={ps.n}: emp={emp:.4g} exact={exact:.4g} bound={bound:.4g}")
    return ("empirical <= exact <= 11*iso bound and exact >= L2/sqrt(2)", ok, "; ".join(details))


def _check_curvature(grid: int) -> Check:
    vs = np.linspace(0.005, 0.995, grid)
    taus = np.linspace(0.005, 0.995, grid)
    min_disc = math.inf
    for v in vs:
        for s in taus:
            min_disc = min(min_disc, lc.curvature_cubic(float(v), float(s)).discriminant)
    # generic representatives of the four quadrants (tau = v and tau = 1 - v
    # are the degenerate surfaces with a root of Q at +/-1)
    sturm_ok = (
        [lc.sturm_sign_changes(lc.curvature_cubic(0.25, 0.40), x) for x in (-1, 0, 1)] == [2, 2, 1]
        and [lc.sturm_sign_changes(lc.curvature_cubic(0.25, 0.60), x) for x in (-1, 0, 1)] == [2, 1, 1]
        and [lc.sturm_sign_changes(lc.curvature_cubic(0.75, 0.40), x) for x in (-1, 0, 1)] == [2, 1, 1]
        and [lc.sturm_sign_changes(lc.curvature_cubic(0.75, 0.60), x) for x in (-1, 0, 1)] == [2, 2, 1]
    )
    tau_ok = True
    for v in (0.1, 0.2, 0.3, 0.4):
        tv = lc.critical_tau(v)
        prob = lc.CapPreimageProblem(0.5, v, 1.0 - 2.0 * v)
        if abs(lc.curvature_along_level(prob, tv)) > 1e-10:
            tau_ok = False
    x_ok = all(abs(lc.extremal_x(float(v))) <= 1.0 / math.sqrt(2.0) + 1e-12 for v in vs)
    ok = min_disc > 0 and sturm_ok and tau_ok and x_ok
    return (
        "curvature cubic: discriminant, Sturm rows, tau_v zeros, |x(tau_v)| bound",
        ok,
        f"min discr {min_disc:.3e}; sturm {sturm_ok}; tau_v {tau_ok}; x bound {x_ok}",
    )


def _check_gradient_fd(grid: int) -> Check:
    prob = lc.CapPreimageProblem(0.37, 0.29, 0.1)
    h = 1e-6
    worst = 0.0
    vals = np.linspace(0.01, 0.99, grid)
    for a in vals:
        fa, ft = lc.level_gradient(prob, a, vals)
        fd_a = (lc.level_function(prob, a + h, vals) - lc.level_function(prob, a - h, vals)) / (2 * h)
        fd_t = (lc.level_function(prob, a, vals + h) - lc.level_function(prob, a, vals - h)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(fa - fd_a))), float(np.max(np.abs(ft - fd_t))))
    return ("closed-form partials match central differences", worst <= 1e-5, f"worst {worst:.2e}")


def _check_topology(samples: int) -> Check:
    rng = np.random.Generator(np.random.Philox(11))
    ok = True
    details = []
    for _ in range(samples):
        v = float(rng.uniform(0.05, 0.45))
        t = float(rng.uniform(-(1 - 2 * v), 1 - 2 * v))
        trace = lc.trace_level_curve(lc.CapPreimageProblem(0.5, v, t), resolution=256)
        if trace.transversal_pairs != 1:
            ok = False
            details.append(f"wrap v={v:.3f} t={t:.3f}: {trace.transversal_pairs}")
    for _ in range(samples):
        v = float(rng.uniform(0.05, 0.45))
        t = float(rng.uniform(1 - 2 * v + 1e-3, 0.999))
        trace = lc.trace_level_curve(lc.CapPreimageProblem(0.5, v, t), resolution=256)
        if trace.transversal_pairs == 1 and trace.tangential_pairs == 0:
            ok = False
            details.append(f"loop v={v:.3f} t={t:.3f}: 1 transversal pair")
    return ("level-curve intersection counts match the two height regimes", ok, "; ".join(details))


def _check_random_exact(n: int) -> Check:
    z = lambert_map(random_square_points(n, seed=99).points)
    emp = dsc.empirical_cap_discrepancy(z).value
    exact = dsc.exact_cap_discrepancy(z, limit=max(200, n)).value
    l2 = dsc.l2_cap_discrepancy(z)
    ok = emp <= exact + 1e-12 and exact + 1e-12 >= l2 / math.sqrt(2.0)
    return (f"exact oracle at N={n} dominates empirical and L2/sqrt(2)", ok,
            f"emp={emp:.4g} exact={exact:.4g} l2={l2:.4g}")


def run_verification(level: str = "quick") -> list[Check]:
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    checks: list[Check] = []
    t0 = time.time()
    if level == "quick":
        checks.append(_check_nets({2: 6, 3: 4, 5: 3}))
        checks.append(_check_sequence(2, 10))
        checks.append(_check_stolarsky(100, 5, 20000))
        checks.append(_check_min_distance(15))
        checks.append(_check_sandwich(net_m=4, fib_m=9))
        checks.append(_check_curvature(50))
        checks.append(_check_gradient_fd(40))
        checks.append(_check_topology(5))
    else:
        checks.append(_check_nets({2: 10, 3: 10, 5: 10}))
        checks.append(_check_sequence(2, 12))
        checks.append(_check_stolarsky(100, 50, 100000))
        checks.append(_check_min_distance(21))
        checks.append(_check_sandwich(net_m=6, fib_m=11))
        checks.append(_check_curvature(200))
        checks.append(_check_gradient_fd(100))
        checks.append(_check_topology(20))
        checks.append(_check_random_exact(200))
    checks.append((f"suite wall time ({level})", True, f"{time.time() - t0:.1f}s"))
    return checks
