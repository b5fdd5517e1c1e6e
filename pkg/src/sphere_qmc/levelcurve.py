"""Analytic geometry of cap-boundary pre-images under the equal-area map.

For a cap centered at w = Phi(u, v) with height t, the pre-image of the cap
boundary is the zero set of

    F(alpha, tau) = 2[1 - (1-2v)(1-2tau)
                      - 4 sqrt((1-v)v(1-tau)tau) cos(2 pi (u - alpha))]
                    - 2(1 - t),

a curve in the parameter square whose convex/concave segments are separated
by zeros of the signed curvature kappa.  Along a fixed-tau slice those zeros
are governed by the depressed cubic Q(x) = x^3 + p x + q in
x = cos(2 pi (u - alpha)); Q has three distinct real roots
(discriminant -4 p^3 - 27 q^2 > 0), exactly one of them in (-1, 1), located
by a Sturm chain: in (0, 1) when (1/2 - v)(1/2 - tau) > 0, else in (-1, 0).

Two heights are special for each center: t = +/-(1 - 2v), where the cap
boundary passes through a pole.  Along the t = 1 - 2v curve the curvature
changes sign exactly once per symmetric half, at

    tau_v = (1 + 6(1-v)v - sqrt(1 - 4(1-v)v (1 - 9(1-v)v))) / 4,

and the extremal cosine value |x(tau_v)| never exceeds 1/sqrt(2).

``trace_level_curve`` samples the curve by bisecting F in tau along an
alpha-grid (robust near the poles, where the tau-derivatives blow up),
classifies the topology (closed loop, wrap-around band, pole-touching arc)
and counts sign changes of the curvature along the trace.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateCapError,
    InternalError,
    InvalidInputError,
    SingularDomainError,
)

__all__ = [
    "CapPreimageProblem",
    "CurvatureCubic",
    "TraceSegment",
    "LevelCurveTrace",
    "level_function",
    "level_gradient",
    "level_hessian",
    "signed_curvature",
    "curvature_cubic",
    "cubic_root_in_unit_interval",
    "sturm_sign_changes",
    "critical_tau",
    "extremal_x",
    "curvature_along_level",
    "trace_level_curve",
]

TAU_CURVATURE_MARGIN = 1e-4  # tau-derivatives are singular at the poles
_PI = math.pi


@dataclass(frozen=True)
class CapPreimageProblem:
    """Cap center parameters (u, v) and height t, poles and degenerate caps
    excluded."""

    u: float
    v: float
    t: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.u < 1.0:
            raise InvalidInputError("u must lie in [0, 1)")
        if not 0.0 < self.v < 1.0:
            raise InvalidInputError("v must lie in (0, 1); poles are special-cased")
        if not -1.0 < self.t < 1.0:
            raise InvalidInputError("t must lie in (-1, 1)")

    @property
    def north_critical(self) -> float:
        """Height at which the cap boundary passes through the north pole."""
        return 1.0 - 2.0 * self.v

    @property
    def south_critical(self) -> float:
        return -(1.0 - 2.0 * self.v)


@dataclass(frozen=True)
class CurvatureCubic:
    """Coefficients of Q(x) = x^3 + p x + q at fixed (v, tau)."""

    p: float
    q: float

    @property
    def discriminant(self) -> float:
        return -4.0 * self.p**3 - 27.0 * self.q**2

    def __call__(self, x: float | np.ndarray) -> float | np.ndarray:
        return x**3 + self.p * x + self.q


def level_function(prob: CapPreimageProblem, alpha, tau):
    """F(alpha, tau); zero exactly on the pre-image of the cap boundary,
    negative inside the cap pre-image."""
    a = np.asarray(alpha, dtype=float)
    s = np.asarray(tau, dtype=float)
    v, u, t = prob.v, prob.u, prob.t
    w = (1.0 - v) * v
    rad = np.sqrt(np.maximum(w * (1.0 - s) * s, 0.0))
    val = 2.0 * (
        1.0 - (1.0 - 2.0 * v) * (1.0 - 2.0 * s) - 4.0 * rad * np.cos(2.0 * _PI * (u - a))
    ) - 2.0 * (1.0 - t)
    return float(val) if val.ndim == 0 else val


def _check_interior_tau(tau) -> np.ndarray:
    s = np.asarray(tau, dtype=float)
    if np.any(s <= 0.0) or np.any(s >= 1.0):
        raise SingularDomainError("tau-derivatives are singular at tau in {0, 1}")
    return s


def level_gradient(prob: CapPreimageProblem, alpha, tau):
    """Closed-form partials (F_alpha, F_tau); requires 0 < tau < 1."""
    a = np.asarray(alpha, dtype=float)
    s = _check_interior_tau(tau)
    u, v = prob.u, prob.v
    sv = math.sqrt((1.0 - v) * v)
    st = np.sqrt((1.0 - s) * s)
    ang = 2.0 * _PI * (u - a)
    f_a = -16.0 * _PI * sv * st * np.sin(ang)
    f_t = 4.0 * ((1.0 - 2.0 * v) - (1.0 - 2.0 * s) * (sv / st) * np.cos(ang))
    if f_a.ndim == 0:
        return float(f_a), float(f_t)
    return f_a, f_t


def level_hessian(prob: CapPreimageProblem, alpha, tau):
    """Closed-form second partials (F_aa, F_at, F_tt); 0 < tau < 1."""
    a = np.asarray(alpha, dtype=float)
    s = _check_interior_tau(tau)
    u, v = prob.u, prob.v
    sv = math.sqrt((1.0 - v) * v)
    st = np.sqrt((1.0 - s) * s)
    ang = 2.0 * _PI * (u - a)
    f_aa = 32.0 * _PI**2 * sv * st * np.cos(ang)
    f_at = -8.0 * _PI * (1.0 - 2.0 * s) * (sv / st) * np.sin(ang)
    f_tt = (2.0 / ((1.0 - s) * s)) * (sv / st) * np.cos(ang)
    if f_aa.ndim == 0:
        return float(f_aa), float(f_at), float(f_tt)
    return f_aa, f_at, f_tt


def _curvature_raw(u: float, v: float, alpha, tau):
    """Signed curvature without domain checks (nan where undefined)."""
    prob = CapPreimageProblem(u, v, 0.0)
    f_a, f_t = (np.asarray(g, dtype=float) for g in level_gradient(prob, alpha, tau))
    f_aa, f_at, f_tt = (np.asarray(g, dtype=float) for g in level_hessian(prob, alpha, tau))
    num = f_aa * f_t**2 - 2.0 * f_at * f_a * f_t + f_tt * f_a**2
    den = (f_a**2 + f_t**2) ** 1.5
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / den


def signed_curvature(u: float, v: float, alpha, tau):
    """Signed curvature of the level curve of the distance-to-w function
    through (alpha, tau); independent of the height t.

    The denominator vanishes only where (alpha, tau) hits the center
    parameters or their antipode (cap degenerates), which raises."""
    kappa = np.asarray(_curvature_raw(u, v, alpha, tau))
    if np.any(~np.isfinite(kappa)):
        raise DegenerateCapError(
            "curvature undefined where the cap degenerates to a point or the sphere"
        )
    return float(kappa) if kappa.ndim == 0 else kappa


def curvature_cubic(v: float, tau: float) -> CurvatureCubic:
    """Coefficients p(tau), q(tau) of the curvature cubic at fixed (v, tau),
    with B = sqrt((1-v)v / ((1-tau)tau)) and H = 1 - 2 tau."""
    if not 0.0 < v < 1.0:
        raise InvalidInputError("v must lie in (0, 1)")
    s = float(_check_interior_tau(tau))
    b2 = ((1.0 - v) * v) / ((1.0 - s) * s)
    b = math.sqrt(b2)
    h = 1.0 - 2.0 * s
    v1 = 1.0 - 2.0 * v
    p = -(v1**2 + b2 * (1.0 + 2.0 * h**2)) / (b2 * (1.0 + h**2))
    q = 2.0 * v1 * h / (b * (1.0 + h**2))
    return CurvatureCubic(p, q)


def cubic_root_in_unit_interval(c: CurvatureCubic) -> float:
    """The unique root of Q in (-1, 1), by the trigonometric formula
    x = 2 sqrt(-p/3) cos(arccos(3q/(2p) sqrt(3/-p))/3 - 2 pi/3)
    (the middle root of the three)."""
    if c.discriminant <= 0.0:
        raise InvalidInputError("cubic must have three distinct real roots")
    p, q = c.p, c.q
    arg = (3.0 * q / (2.0 * p)) * math.sqrt(3.0 / -p)
    theta = math.acos(min(1.0, max(-1.0, arg)))
    x = 2.0 * math.sqrt(-p / 3.0) * math.cos(theta / 3.0 - 2.0 * _PI / 3.0)
    if abs(x) >= 1.0:
        raise InternalError(f"cubic root {x} escaped (-1, 1)")
    return x


def sturm_sign_changes(c: CurvatureCubic, x: float) -> int:
    """Number of sign changes (zeros skipped) of the canonical Sturm chain
    {Q, Q', -(2p/3)x - q, discr/(4p^2)} at x."""
    if c.discriminant <= 0.0:
        raise InvalidInputError("Sturm table applies to the three-real-root case")
    if c.p == 0.0:
        raise InvalidInputError("chain requires p != 0")
    chain = [
        c(x),
        3.0 * x**2 + c.p,
        -(2.0 * c.p / 3.0) * x - c.q,
        c.discriminant / (4.0 * c.p**2),
    ]
    signs = [s for s in np.sign(chain) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def critical_tau(v: float) -> float:
    """Height parameter tau_v at which the curvature changes sign along the
    pole-touching level curve t = 1 - 2v."""
    if not 0.0 < v < 1.0:
        raise InvalidInputError("v must lie in (0, 1)")
    if v == 0.5:
        raise DegenerateCapError("v = 1/2: the zero set is the vertical lines")
    w = (1.0 - v) * v
    return 0.25 * (1.0 + 6.0 * w - math.sqrt(1.0 - 4.0 * w * (1.0 - 9.0 * w)))


def extremal_x(v: float) -> float:
    """Extremal cosine value x(tau_v) of the curvature-zero curve; strictly
    decreasing in v with |x(tau_v)| <= x(0+) = 1/sqrt(2)."""
    if not 0.0 < v < 1.0:
        raise InvalidInputError("v must lie in (0, 1)")
    w = (1.0 - v) * v
    v1 = 1.0 - 2.0 * v
    inner = math.sqrt(1.0 - w * (9.0 * v1**2 - 5.0))
    return v1 / math.sqrt(1.0 + 2.0 * w + inner)


def curvature_along_level(prob: CapPreimageProblem, tau: float) -> float:
    """Signed curvature at the point of the level curve with height
    parameter tau, evaluated through the polynomial substitution
    X = t - (1-2v)(1-2 tau) (numerator a quartic in tau, denominator in
    closed form), without solving for alpha."""
    s = float(_check_interior_tau(tau))
    v, t = prob.v, prob.t
    v1 = 1.0 - 2.0 * v
    h = 1.0 - 2.0 * s
    w = (1.0 - v) * v
    big_t = (1.0 - s) * s
    x = t - v1 * h
    if x * x > 16.0 * w * big_t * (1.0 + 1e-12):
        raise InvalidInputError("tau lies outside the level curve's tau-range")
    num = -16.0 * _PI**2 * (
        (1.0 - 2.0 * big_t) * x**3 / big_t**2
        - 8.0 * (big_t + 3.0 * w * h**2) * x / big_t
        + 64.0 * v1 * w * h
    )
    den_sq = (4.0 * v1 * big_t - h * x) ** 2 / big_t**2 + 16.0 * _PI**2 * (
        16.0 * w * big_t - x * x
    )
    if den_sq <= 0.0:
        raise DegenerateCapError("gradient vanishes: degenerate cap")
    return num / den_sq**1.5


# ---------------------------------------------------------------------------
# Curve tracing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceSegment:
    alpha: np.ndarray
    tau: np.ndarray
    kappa: np.ndarray  # nan within the pole margins
    closed: bool


@dataclass(frozen=True)
class LevelCurveTrace:
    problem: CapPreimageProblem
    topology: str
    segments: list
    sign_changes: int  # transversal curvature sign changes along the trace
    transversal_pairs: int  # symmetric pairs (= sign_changes / 2)
    tangential_pairs: int


def _classify(prob: CapPreimageProblem) -> str:
    t_north, t_south = prob.north_critical, prob.south_critical
    if abs(prob.t - t_north) < 1e-12 or abs(prob.t - t_south) < 1e-12:
        return "critical-arc"
    north_in = t_north > prob.t
    south_in = t_south > prob.t
    if north_in and south_in:
        return "loop-antipodal"
    if north_in or south_in:
        return "wrap"
    return "loop"


def _count_changes(kappa: np.ndarray, closed: bool) -> tuple[int, int]:
    """Sign alternations along the trace, with a deadband around zero;
    tangential contacts are zero-runs flanked by equal signs."""
    vals = kappa[np.isfinite(kappa)]
    if vals.size == 0:
        return 0, 0
    scale = float(np.max(np.abs(vals)))
    tol = max(1e-8, 1e-9 * scale)  # floor masks rounding noise on straight lines
    signs = np.where(np.abs(vals) <= tol, 0, np.sign(vals)).astype(int)
    runs = [s for s, _ in itertools.groupby(signs)]
    nonzero = [s for s in runs if s != 0]
    changes = sum(1 for a, b in zip(nonzero, nonzero[1:]) if a != b)
    if closed and len(nonzero) >= 2 and nonzero[0] != nonzero[-1]:
        changes += 1
    tangential = sum(
        1
        for i, s in enumerate(runs)
        if s == 0 and 0 < i < len(runs) - 1 and runs[i - 1] == runs[i + 1]
    )
    return changes, tangential


def _vertical_trace(prob: CapPreimageProblem, resolution: int) -> LevelCurveTrace:
    taus = np.linspace(TAU_CURVATURE_MARGIN, 1.0 - TAU_CURVATURE_MARGIN, resolution)
    segments = []
    for d in (-0.25, 0.25):
        alpha = np.full_like(taus, (prob.u + d) % 1.0)
        kappa = _curvature_raw(prob.u, prob.v, alpha, taus)
        segments.append(TraceSegment(alpha, taus, kappa, closed=False))
    return LevelCurveTrace(prob, "verticals", segments, 0, 0, 0)


def trace_level_curve(prob: CapPreimageProblem, resolution: int = 512) -> LevelCurveTrace:
    """Polygonal trace of the cap-boundary pre-image.

    Solves F = 0 for tau by bracketing on a scan grid of twice the requested
    resolution and bisecting to 1e-12, one alpha-column at a time (near
    vertical tangents the symmetric fold is closed by a direct connection).
    Classifies the topology and counts curvature sign changes along the
    trace; a symmetric pair of transversal intersections with the
    curvature-zero curve contributes two sign changes.
    """
    if resolution < 16:
        raise InvalidInputError("resolution too coarse to trace")
    u, v, t = prob.u, prob.v, prob.t
    if abs(v - 0.5) < 1e-12 and abs(t) < 1e-12:
        return _vertical_trace(prob, resolution)
    topology = _classify(prob)

    # offsets d = alpha - u; pick the grid so the curve is contiguous
    if topology == "loop-antipodal":
        d_grid = np.linspace(0.0, 1.0, resolution, endpoint=False)
    else:
        d_grid = np.linspace(-0.5, 0.5, resolution, endpoint=False)
    eps = 1e-12
    tau_scan = np.linspace(eps, 1.0 - eps, 2 * resolution)

    w = (1.0 - v) * v
    v1 = 1.0 - 2.0 * v
    cosd = np.cos(2.0 * _PI * d_grid)

    def f_of(cos_col, taus):
        rad = np.sqrt(np.maximum(w * (1.0 - taus) * taus, 0.0))
        return 2.0 * (1.0 - v1 * (1.0 - 2.0 * taus) - 4.0 * rad * cos_col) - 2.0 * (1.0 - t)

    grid = f_of(cosd[:, None], tau_scan[None, :])
    sign_flip = grid[:, :-1] * grid[:, 1:] < 0.0
    rows, cols = np.nonzero(sign_flip)
    lo = tau_scan[cols].copy()
    hi = tau_scan[cols + 1].copy()
    flo = grid[rows, cols].copy()
    ccol = cosd[rows]
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        fm = f_of(ccol, mid)
        take_left = flo * fm > 0.0
        lo = np.where(take_left, mid, lo)
        flo = np.where(take_left, fm, flo)
        hi = np.where(take_left, hi, mid)
    roots_tau = 0.5 * (lo + hi)

    per_row: dict[int, list[float]] = {}
    for r, root in zip(rows, roots_tau):
        per_row.setdefault(int(r), []).append(float(root))

    def kappa_at(alphas, taus):
        taus = np.asarray(taus)
        kap = np.full(taus.shape, np.nan)
        ok = (taus >= TAU_CURVATURE_MARGIN) & (taus <= 1.0 - TAU_CURVATURE_MARGIN)
        if ok.any():
            kap[ok] = _curvature_raw(u, v, np.asarray(alphas)[ok], taus[ok])
        return kap

    segments: list[TraceSegment] = []
    if topology in ("wrap", "critical-arc"):
        # contiguous runs of columns carrying a root, one root per column
        present = sorted(per_row)
        runs: list[list[int]] = []
        for r in present:
            if runs and r == runs[-1][-1] + 1:
                runs[-1].append(r)
            else:
                runs.append([r])
        # merge a run ending at the seam with one starting at the seam
        if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == resolution - 1:
            runs[0] = runs.pop() + runs[0]
        wraps = topology == "wrap" and len(runs) == 1 and len(present) == resolution
        for run in runs:
            d_vals = d_grid[run]
            taus = np.array([min(per_row[r]) for r in run])
            alphas = (u + d_vals) % 1.0
            segments.append(TraceSegment(alphas, taus, kappa_at(alphas, taus), wraps))
    else:
        present = sorted(per_row)
        if present:
            lower = [(d_grid[r], min(per_row[r])) for r in present]
            upper = [(d_grid[r], max(per_row[r])) for r in reversed(present)]
            pts = lower + [pt for pt in upper if pt not in lower or len(per_row) == 1]
            d_vals = np.array([p[0] for p in pts])
            taus = np.array([p[1] for p in pts])
            alphas = (u + d_vals) % 1.0
            segments.append(TraceSegment(alphas, taus, kappa_at(alphas, taus), True))

    changes = 0
    tangential = 0
    for seg in segments:
        c, tg = _count_changes(seg.kappa, seg.closed)
        changes += c
        tangential += tg
    return LevelCurveTrace(prob, topology, segments, changes, changes // 2, tangential)
