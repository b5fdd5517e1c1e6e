"""Planar isotropic-discrepancy estimators for point sets in the unit
square.

The isotropic discrepancy (supremum of |count/N - area| over all convex
subsets of the square) has no known polynomial-time exact algorithm, so this
module reports certified *lower* bounds plus the closed-form theorem upper
bounds from `discrepancy`:

* ``halfplane_discrepancy``: the exact supremum over the halfplane subclass.
  For a fixed normal direction the supremum over offsets sits at point
  projections (both counting limits), and over directions at one of finitely
  many critical directions: normals of lines through two points, lines
  through a point and a square corner, lines whose chord is bisected by a
  point (where the swept area is stationary), and the axis directions (area
  kinks).  All of these are enumerated.

* ``hull_subset_lower_bound``: convex hulls of point subsets, evaluated on
  the surplus side (closed hull) and on the deficiency side (hull shrunk
  inward by eps = 1e-9, a genuine convex subset barely missing the boundary
  points).

Both are valid lower bounds for the isotropic discrepancy; neither dominates
the other in general.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .discrepancy import (
    DiscrepancyReport,
    iso_bound_fibonacci,
    iso_bound_net,
    iso_bound_sequence,
)
from .errors import InternalError, InvalidInputError
from .points import PointSet

__all__ = [
    "ConvexTestSet",
    "halfplane_area",
    "halfplane_discrepancy",
    "hull_subset_lower_bound",
    "isotropic_report",
]

SHRINK_EPS = 1e-9  # inward offset used for deficiency-side hull evaluation
_COLLINEAR_TOL = 1e-12

_CORNERS = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])


def _square_points(P: PointSet | np.ndarray) -> np.ndarray:
    pts = P.points if isinstance(P, PointSet) else np.asarray(P, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
        raise InvalidInputError("expected a nonempty set of planar points")
    if pts.min() < -1e-12 or pts.max() > 1.0 + 1e-12:
        raise InvalidInputError("points must lie in the unit square")
    return pts


# ---------------------------------------------------------------------------
# Convex test sets (polygons clipped to the square)
# ---------------------------------------------------------------------------


def _shoelace(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _clip_halfplane(poly: np.ndarray, normal: np.ndarray, offset: float) -> np.ndarray:
    """Keep the part of a convex polygon with x . normal <= offset."""
    out: list[np.ndarray] = []
    k = len(poly)
    d = poly @ normal - offset
    for i in range(k):
        j = (i + 1) % k
        if d[i] <= 0:
            out.append(poly[i])
        if (d[i] < 0 < d[j]) or (d[j] < 0 < d[i]):
            frac = d[i] / (d[i] - d[j])
            out.append(poly[i] + frac * (poly[j] - poly[i]))
    return np.asarray(out).reshape(len(out), 2)


@dataclass(frozen=True)
class ConvexTestSet:
    """Convex polygon inside the unit square, vertices in CCW order."""

    vertices: np.ndarray
    kind: str = "custom"

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidInputError("need at least three vertices")
        if self.kind not in {"halfplane", "hull-of-subset", "custom"}:
            raise InvalidInputError(f"unknown test-set kind {self.kind!r}")
        if v.min() < -1e-12 or v.max() > 1.0 + 1e-12:
            raise InvalidInputError("vertices must lie in the unit square")
        area2 = 2.0 * _shoelace(v)
        if area2 <= 0:
            raise InvalidInputError("vertices must be in CCW order with positive area")
        rolled = np.roll(v, -1, axis=0)
        edges = rolled - v
        cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(
            edges, -1, axis=0
        )[:, 0]
        if np.any(cross <= _COLLINEAR_TOL):
            raise InvalidInputError("vertices must be strictly convex")
        object.__setattr__(self, "vertices", v)

    @classmethod
    def from_halfplane(cls, normal, offset: float) -> "ConvexTestSet | None":
        """The square clipped to {x . normal <= offset}; None if empty or thin."""
        normal = np.asarray(normal, dtype=float)
        square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        poly = _clip_halfplane(square, normal, float(offset))
        if len(poly) < 3 or abs(_shoelace(poly)) < 1e-15:
            return None
        return cls(poly, kind="halfplane")

    @property
    def area(self) -> float:
        return _shoelace(self.vertices)

    def count_inside(self, pts: np.ndarray, margin: float = -_COLLINEAR_TOL) -> int:
        """Points with signed distance > margin from every edge (so the
        default counts the closed polygon up to rounding noise)."""
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(e, axis=1)
        inside = np.ones(pts.shape[0], dtype=bool)
        for i in range(len(v)):
            sd = (e[i, 0] * (pts[:, 1] - v[i, 1]) - e[i, 1] * (pts[:, 0] - v[i, 0])) / lengths[i]
            inside &= sd > margin
        return int(inside.sum())

    def local_discrepancy(self, P: PointSet | np.ndarray) -> float:
        pts = _square_points(P)
        return abs(self.count_inside(pts) / pts.shape[0] - self.area)


# ---------------------------------------------------------------------------
# Exact halfplane supremum
# ---------------------------------------------------------------------------


def _area_below(a, b, cc):
    """Area of {x in [0,1]^2 : a x + b y <= cc} for 0 <= a <= b, b > 0.

    Integrates the clipped line y = (cc - a x)/b over x; numerically stable
    for arbitrarily small slope ratio a/b (no cancelling differences of
    squared positive parts)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    cc = np.asarray(cc, dtype=float)
    safe_a = np.where(a > 0, a, 1.0)
    x1 = np.clip((cc - b) / safe_a, 0.0, 1.0)  # left of x1 the strip is full
    x2 = np.clip(cc / safe_a, 0.0, 1.0)  # right of x2 it is empty
    area = x1 + (cc * (x2 - x1) - 0.5 * a * (x2 * x2 - x1 * x1)) / b
    return np.where(a > 0, area, np.clip(cc / b, 0.0, 1.0))


def halfplane_area(normal, offset) -> float | np.ndarray:
    """Exact area of {x in [0,1]^2 : x . normal <= offset} (closed form,
    vectorised over offsets)."""
    nx, ny = float(normal[0]), float(normal[1])
    c = np.asarray(offset, dtype=float)
    a, b = sorted((abs(nx), abs(ny)))  # reflections and the x/y swap fix signs
    if b == 0:
        raise InvalidInputError("normal must be nonzero")
    cc = c - min(nx, 0.0) - min(ny, 0.0)
    out = _area_below(a, b, cc)
    return float(out) if out.ndim == 0 else out


def _candidate_directions(pts: np.ndarray) -> np.ndarray:
    """Unit normals of every critical halfplane direction (see module
    docstring), deduplicated up to sign."""
    vecs = [np.array([[1.0, 0.0], [0.0, 1.0]])]  # axis-aligned boundary normals
    n = pts.shape[0]
    if n >= 2:
        ii, jj = np.triu_indices(n, 1)
        vecs.append(pts[ii] - pts[jj])
    # lines through a point and a square corner
    vecs.append((pts[:, None, :] - _CORNERS[None, :, :]).reshape(-1, 2))
    # chords bisected by a point: endpoints p + r, p - r on two square edges
    px, py = pts[:, 0], pts[:, 1]
    for r in (
        np.column_stack([-px, py]),
        np.column_stack([-px, py - 1.0]),
        np.column_stack([1.0 - px, py]),
        np.column_stack([1.0 - px, py - 1.0]),
    ):
        vecs.append(r)
    chords = np.vstack(vecs)
    normals = np.column_stack([-chords[:, 1], chords[:, 0]])
    lengths = np.linalg.norm(normals, axis=1)
    normals = normals[lengths > 1e-14] / lengths[lengths > 1e-14, None]
    flip = (normals[:, 1] < 0) | ((normals[:, 1] == 0) & (normals[:, 0] < 0))
    normals[flip] *= -1.0
    return np.unique(np.round(normals, 12), axis=0)


def halfplane_discrepancy(P: PointSet | np.ndarray, chunk_elems: int = 4_000_000) -> float:
    """Exact supremum over halfplanes H of |count(P in H)/N - area(H)|,
    a lower bound for the isotropic discrepancy.  O(N^3 log N)."""
    pts = _square_points(P)
    n = pts.shape[0]
    dirs = _candidate_directions(pts)
    counts_hi = np.arange(1, n + 1, dtype=float) / n  # closed count at sorted offset
    best = 0.0
    rows = max(1, chunk_elems // n)
    for lo in range(0, dirs.shape[0], rows):
        block = dirs[lo : lo + rows]
        proj = block @ pts.T
        proj.sort(axis=1)
        # area of {x . n <= c} at every candidate offset, per direction
        a = np.minimum(np.abs(block[:, 0]), np.abs(block[:, 1]))[:, None]
        b = np.maximum(np.abs(block[:, 0]), np.abs(block[:, 1]))[:, None]
        cc = proj - np.minimum(block[:, 0], 0.0)[:, None] - np.minimum(block[:, 1], 0.0)[:, None]
        area = _area_below(a, b, cc)
        vals = np.abs(counts_hi - area)
        np.maximum(vals, np.abs((counts_hi - 1.0 / n) - area), out=vals)
        best = max(best, float(vals.max()))
    return best


# ---------------------------------------------------------------------------
# Convex hulls of subsets
# ---------------------------------------------------------------------------


def _monotone_chain(pts: np.ndarray) -> np.ndarray:
    """Convex hull in CCW order; collinear input collapses to 2 points."""
    uniq = np.unique(pts, axis=0)
    if uniq.shape[0] <= 2:
        return uniq
    order = np.lexsort((uniq[:, 1], uniq[:, 0]))
    p = uniq[order]

    def build(seq):
        hull: list[np.ndarray] = []
        for q in seq:
            while len(hull) >= 2:
                o, a = hull[-2], hull[-1]
                if (a[0] - o[0]) * (q[1] - o[1]) - (a[1] - o[1]) * (q[0] - o[0]) <= 0:
                    hull.pop()
                else:
                    break
            hull.append(q)
        return hull

    lower = build(p)
    upper = build(p[::-1])
    hull = np.asarray(lower[:-1] + upper[:-1])
    return hull if hull.shape[0] >= 3 else np.asarray([p[0], p[-1]])


def _hull_values(pts: np.ndarray, subset: np.ndarray) -> float:
    """Best local discrepancy over the closed hull of the subset and its
    eps-shrunk interior."""
    n = pts.shape[0]
    hull = _monotone_chain(subset)
    if hull.shape[0] == 1:
        close = np.max(np.abs(pts - hull[0]), axis=1) <= _COLLINEAR_TOL
        return float(close.sum()) / n
    if hull.shape[0] == 2:
        a, b = hull
        e = b - a
        ln = float(np.hypot(*e))
        if ln < _COLLINEAR_TOL:
            return float((np.max(np.abs(pts - a), axis=1) <= _COLLINEAR_TOL).sum()) / n
        cross = np.abs(e[0] * (pts[:, 1] - a[1]) - e[1] * (pts[:, 0] - a[0])) / ln
        tpar = ((pts - a) @ e) / (ln * ln)
        on_seg = (cross <= _COLLINEAR_TOL) & (tpar >= -1e-12) & (tpar <= 1 + 1e-12)
        return float(on_seg.sum()) / n
    area = _shoelace(hull)
    perim = float(np.linalg.norm(np.roll(hull, -1, axis=0) - hull, axis=1).sum())
    e = np.roll(hull, -1, axis=0) - hull
    lens = np.linalg.norm(e, axis=1)
    inside_closed = np.ones(n, dtype=bool)
    inside_shrunk = np.ones(n, dtype=bool)
    for i in range(hull.shape[0]):
        sd = (e[i, 0] * (pts[:, 1] - hull[i, 1]) - e[i, 1] * (pts[:, 0] - hull[i, 0])) / lens[i]
        inside_closed &= sd >= -_COLLINEAR_TOL
        inside_shrunk &= sd > SHRINK_EPS
    surplus = abs(inside_closed.sum() / n - area)
    shrunk_area = max(area - SHRINK_EPS * perim, 0.0)
    deficiency = abs(inside_shrunk.sum() / n - shrunk_area)
    return max(surplus, deficiency)


def hull_subset_lower_bound(
    P: PointSet | np.ndarray, k_max: int, trials: int, seed: int
) -> float:
    """Randomised lower bound from convex hulls of point subsets of size at
    most k_max.  Deterministic for a fixed seed; exhaustive when there are
    no more subsets than trials.  ``trials = 0`` reports the trivial bound 0.
    """
    pts = _square_points(P)
    n = pts.shape[0]
    if trials <= 0:
        return 0.0
    k_max = max(1, min(k_max, n))
    total = sum(math.comb(n, k) for k in range(1, k_max + 1))
    best = 0.0
    if total <= trials:
        for k in range(1, k_max + 1):
            for comb in itertools.combinations(range(n), k):
                best = max(best, _hull_values(pts, pts[list(comb)]))
        return best
    rng = np.random.Generator(np.random.Philox(seed))
    for _ in range(trials):
        k = int(rng.integers(1, k_max + 1))
        idx = rng.choice(n, size=k, replace=False)
        best = max(best, _hull_values(pts, pts[idx]))
    return best


def isotropic_report(
    P: PointSet, k_max: int = 6, trials: int = 200, seed: int = 20110521
) -> DiscrepancyReport:
    """Bundle of certified lower bounds and the applicable theorem upper
    bound for a generated point set; the sandwich lower <= upper is
    asserted."""
    if not isinstance(P, PointSet):
        raise InvalidInputError("isotropic_report needs provenance; pass a PointSet")
    prov = P.provenance
    if prov.kind == "digital-net":
        kind, upper = "iso-bound-net", iso_bound_net(prov.base, prov.level)
    elif prov.kind == "digital-sequence-prefix":
        kind, upper = "iso-bound-seq", iso_bound_sequence(prov.base, P.n)
    elif prov.kind == "fibonacci":
        kind, upper = "iso-bound-fib", iso_bound_fibonacci(prov.level)
    else:
        kind, upper = "iso-lower", None
    lower_half = halfplane_discrepancy(P)
    lower_hull = hull_subset_lower_bound(P, k_max=k_max, trials=trials, seed=seed)
    lower = max(lower_half, lower_hull)
    if upper is not None and lower > upper + 1e-12:
        raise InternalError(
            f"certified lower bound {lower} exceeds theorem bound {upper}"
        )
    params = {
        "lower": lower,
        "lower_halfplane": lower_half,
        "lower_hull": lower_hull,
        "upper": upper,
        "provenance": prov.as_dict(),
    }
    return DiscrepancyReport(kind, upper if upper is not None else lower, P.n, params)
