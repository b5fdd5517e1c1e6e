"""Core value types, the cylindrical equal-area map, cap geometry and seeded
uniform sampling.

The parameter square is the closed unit square with coordinates (alpha, tau);
the equal-area map sends it onto the unit sphere via

    (alpha, tau) -> (2*sqrt(tau - tau^2) cos(2 pi alpha),
                     2*sqrt(tau - tau^2) sin(2 pi alpha),
                     1 - 2 tau),

so tau = 0 is the north pole, tau = 1 the south pole, and the map preserves
normalised area: a region of area A in the square covers a fraction A of the
sphere.  Caps are open: C(w, t) = {y : w . y > t}, with normalised area
(1 - t)/2.

Everything here is a pure function; random generation takes an explicit seed
(Philox4x64-10 counter-based generator) and owns no state.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "Provenance",
    "PointSet",
    "SphericalCap",
    "lambert_map",
    "lambert_inverse",
    "cap_area_fraction",
    "cap_contains",
    "random_square_points",
    "write_csv",
    "read_csv",
    "write_json",
    "read_json",
]

UNIT_NORM_TOL = 1e-12
ROUND_TRIP_TOL = 1e-10

_KINDS = {"digital-net", "digital-sequence-prefix", "fibonacci", "random", "custom"}

# Documented RNG algorithm; reproducible across platforms for a fixed seed.
RNG_ALGORITHM = "Philox4x64-10"


@dataclass(frozen=True)
class Provenance:
    """Generator descriptor attached to every point set."""

    kind: str
    base: int | None = None
    level: int | None = None
    count: int | None = None
    seed: int | None = None
    digits: int | None = None  # base-b digit precision of the coordinates
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise InvalidInputError(f"unknown provenance kind {self.kind!r}")

    def as_dict(self) -> dict:
        d = {"kind": self.kind}
        for key in ("base", "level", "count", "seed", "digits"):
            value = getattr(self, key)
            if value is not None:
                d[key] = value
        if self.extra:
            d.update(self.extra)
        return d


@dataclass(frozen=True)
class PointSet:
    """Ordered collection of square (N, 2) or sphere (N, 3) points."""

    points: np.ndarray
    provenance: Provenance

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (2, 3):
            raise InvalidInputError("points must have shape (N, 2) or (N, 3)")
        if pts.shape[0] == 0:
            raise InvalidInputError("point set must be nonempty")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def on_sphere(self) -> bool:
        return self.dim == 3

    def to_sphere(self) -> "PointSet":
        """Lift a square set to the sphere through the equal-area map."""
        if self.on_sphere:
            return self
        return PointSet(lambert_map(self.points), self.provenance)


@dataclass(frozen=True)
class SphericalCap:
    """Open cap {y : w . y > t} with unit center w and height t in [-1, 1]."""

    center: np.ndarray
    height: float

    def __post_init__(self) -> None:
        w = np.asarray(self.center, dtype=float).reshape(3)
        if abs(float(w @ w) - 1.0) > 1e-9:
            raise InvalidInputError("cap center must be unit-norm")
        h = float(self.height)
        if not -1.0 <= h <= 1.0:
            if abs(h) <= 1.0 + 1e-9:  # dot products round past +/-1 by an ulp
                h = max(-1.0, min(1.0, h))
            else:
                raise InvalidInputError("cap height must lie in [-1, 1]")
        object.__setattr__(self, "center", w)
        object.__setattr__(self, "height", h)

    @property
    def area_fraction(self) -> float:
        return cap_area_fraction(self.height)

    def as_dict(self) -> dict:
        return {"center": [float(c) for c in self.center], "height": self.height}


def _check_unit_square(pts: np.ndarray) -> None:
    if pts.size and (pts.min() < -1e-15 or pts.max() > 1.0 + 1e-15):
        raise InvalidInputError("square points must lie in the closed unit square")


def lambert_map(points: np.ndarray | Iterable[float]) -> np.ndarray:
    """Equal-area map from the unit square to the unit sphere.

    Accepts a single (alpha, tau) pair or an (N, 2) array and returns the
    matching (3,) or (N, 3) array.  The result is unit-norm to ~1e-16 by
    construction (2*sqrt(tau - tau^2) and 1 - 2 tau parametrise a circle).
    """
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != 2:
        raise InvalidInputError("expected (alpha, tau) pairs")
    _check_unit_square(pts)
    alpha = pts[:, 0]
    tau = pts[:, 1]
    r = 2.0 * np.sqrt(np.maximum(tau * (1.0 - tau), 0.0))
    phi = 2.0 * np.pi * alpha
    out = np.empty((pts.shape[0], 3))
    out[:, 0] = r * np.cos(phi)
    out[:, 1] = r * np.sin(phi)
    out[:, 2] = 1.0 - 2.0 * tau
    return out[0] if single else out


def lambert_inverse(z: np.ndarray | Iterable[float]) -> tuple[np.ndarray, np.ndarray]:
    """Invert the equal-area map.

    Returns ``(square_points, at_pole)``: tau = (1 - z3)/2 and
    alpha = atan2(y, x)/(2 pi) normalised to [0, 1).  At the poles alpha is
    not determined; the convention alpha = 0 is used and flagged in
    ``at_pole`` so callers sweeping pre-images can handle the degeneracy.
    """
    zz = np.asarray(z, dtype=float)
    single = zz.ndim == 1
    zz = np.atleast_2d(zz)
    if zz.shape[1] != 3:
        raise InvalidInputError("expected (x, y, z) triples")
    norms = np.einsum("ij,ij->i", zz, zz)
    if np.any(np.abs(norms - 1.0) > 1e-9):
        raise InvalidInputError("sphere points must be unit-norm")
    tau = (1.0 - zz[:, 2]) / 2.0
    at_pole = (zz[:, 0] == 0.0) & (zz[:, 1] == 0.0)
    alpha = np.arctan2(zz[:, 1], zz[:, 0]) / (2.0 * np.pi)
    alpha = np.where(alpha < 0.0, alpha + 1.0, alpha)
    alpha = np.where(alpha >= 1.0, 0.0, alpha)  # atan2 rounding at the seam
    alpha[at_pole] = 0.0
    out = np.column_stack([alpha, np.clip(tau, 0.0, 1.0)])
    if single:
        return out[0], bool(at_pole[0])
    return out, at_pole


def cap_area_fraction(t: float | np.ndarray) -> float | np.ndarray:
    """Normalised surface area of a cap of height t: (1 - t)/2."""
    arr = np.asarray(t, dtype=float)
    if np.any(arr < -1.0) or np.any(arr > 1.0):
        raise InvalidInputError("cap height must lie in [-1, 1]")
    out = (1.0 - arr) / 2.0
    return float(out) if out.ndim == 0 else out


def cap_contains(cap: SphericalCap, z: np.ndarray | Iterable[float]) -> bool | np.ndarray:
    """Strict membership test w . z > t (caps are open)."""
    zz = np.asarray(z, dtype=float)
    single = zz.ndim == 1
    zz = np.atleast_2d(zz)
    inside = zz @ cap.center > cap.height
    return bool(inside[0]) if single else inside


def random_square_points(n: int, seed: int) -> PointSet:
    """n i.i.d. uniform points in [0,1)^2, reproducible for a fixed seed.

    Uses the counter-based Philox4x64-10 generator, so identical output on
    every platform and safe derivation of independent streams by seed.
    """
    if n < 1:
        raise InvalidInputError("need at least one point")
    rng = np.random.Generator(np.random.Philox(seed))
    pts = rng.random((int(n), 2))
    prov = Provenance(kind="random", count=int(n), seed=int(seed))
    return PointSet(pts, prov)


# ---------------------------------------------------------------------------
# Serialization: CSV (one point per row, 17 significant digits) and JSON
# (points plus provenance record).  Column order is exactly `alpha,tau`
# or `x,y,z`.
# ---------------------------------------------------------------------------

_CSV_HEADERS = {2: ["alpha", "tau"], 3: ["x", "y", "z"]}


def format_float(x: float, digits: int = 17) -> str:
    return f"{x:.{digits}g}"


def write_csv(ps: PointSet, path: str | Path, digits: int = 17) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADERS[ps.dim])
        for row in ps.points:
            writer.writerow([format_float(v, digits) for v in row])


def read_csv(path: str | Path) -> PointSet:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    dim = len(header)
    if header not in (_CSV_HEADERS[2], _CSV_HEADERS[3]):
        raise InvalidInputError(f"unrecognised CSV header {header!r}")
    pts = np.asarray(rows, dtype=float).reshape(len(rows), dim)
    return PointSet(pts, Provenance(kind="custom"))


def write_json(ps: PointSet, path: str | Path, digits: int = 17) -> None:
    path = Path(path)
    payload = {
        "columns": _CSV_HEADERS[ps.dim],
        "points": [[float(format_float(v, digits)) for v in row] for row in ps.points],
        "provenance": ps.provenance.as_dict(),
    }
    path.write_text(json.dumps(payload, indent=1))


def read_json(path: str | Path) -> PointSet:
    payload = json.loads(Path(path).read_text())
    prov_dict = dict(payload.get("provenance", {"kind": "custom"}))
    kind = prov_dict.pop("kind", "custom")
    known = {k: prov_dict.pop(k) for k in ("base", "level", "count", "seed", "digits") if k in prov_dict}
    prov = Provenance(kind=kind, extra=prov_dict, **known)
    return PointSet(np.asarray(payload["points"], dtype=float), prov)


def _norm_check(z: np.ndarray, tol: float = UNIT_NORM_TOL) -> float:
    """Largest deviation of |z_i| from 1 (helper for tests and validation)."""
    zz = np.atleast_2d(np.asarray(z, dtype=float))
    return float(np.max(np.abs(np.einsum("ij,ij->i", zz, zz) - 1.0)))
