"""Explicit planar low-discrepancy constructions and their structural
verifiers.

Two families are provided:

* digital nets and sequence prefixes in a prime base b, built from the
  generator matrices C1 = I and C2 = upper-triangular Pascal matrix mod b
  (binomial coefficients).  For b = 2 this is the classical two-dimensional
  Sobol' construction; for general prime b it is the two-dimensional Faure
  construction, which yields (0, m, 2)-nets and a (0, 2)-sequence.

* Fibonacci lattices: the F_m points (n/F_m, {n F_{m-1}/F_m}).

Digit conventions (they differ across the QMC literature, so fixed here
explicitly): index n is expanded in *little-endian* base-b digits
n = sum_j n_j b^j; output digit i of coordinate c is
y_i = sum_j C_c[i, j] n_j mod b and carries weight b^(-i-1).

`is_net` verifies the defining elementary-interval property with exact
integer arithmetic on digit prefixes: coordinates are recovered as integer
numerators over b^digits, so no floating-point comparison can misclassify a
point across a half-open interval boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError, UnsupportedError
from .points import PointSet, Provenance

__all__ = [
    "DigitalNetSpec",
    "fibonacci",
    "digital_net",
    "digital_sequence_prefix",
    "is_net",
    "fibonacci_lattice",
    "min_distance",
    "fibonacci_generating_vectors",
]

MAX_FIBONACCI_INDEX = 85  # F_85 < 2^63; larger indices would overflow int64
_MAX_POINTS = 1 << 31  # refuse to materialise more points than this
_EXACT_SCALE_BITS = 52  # b^digits must stay below 2^52 for exact recovery


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def fibonacci(m: int) -> int:
    """F_m with F_1 = F_2 = 1 (64-bit safe up to m = 85)."""
    if m < 1:
        raise InvalidInputError("Fibonacci index must be >= 1")
    if m > MAX_FIBONACCI_INDEX:
        raise UnsupportedError(f"Fibonacci index capped at {MAX_FIBONACCI_INDEX}")
    a, b = 1, 1
    for _ in range(m - 1):
        a, b = b, a + b
    return a


def pascal_matrix_mod(b: int, m: int) -> np.ndarray:
    """Upper-triangular Pascal matrix P[i, j] = binom(j, i) mod b."""
    mat = np.zeros((m, m), dtype=np.int64)
    for j in range(m):
        for i in range(j + 1):
            mat[i, j] = math.comb(j, i) % b
    return mat


@dataclass(frozen=True)
class DigitalNetSpec:
    """Base, level and the pair of m x m digit matrices over Z_b."""

    base: int
    level: int
    c1: np.ndarray
    c2: np.ndarray

    def __post_init__(self) -> None:
        b, m = self.base, self.level
        if b < 2:
            raise InvalidInputError("base must be >= 2")
        if m < 0:
            raise InvalidInputError("level must be >= 0")
        for name, c in (("c1", self.c1), ("c2", self.c2)):
            mat = np.asarray(c, dtype=np.int64) % b
            if mat.shape != (m, m):
                raise InvalidInputError(f"{name} must be {m}x{m}")
            if m and np.any(np.tril(mat, -1)):
                raise InvalidInputError(f"{name} must be upper-triangular mod b")
            if m and np.any([math.gcd(int(d), b) != 1 for d in np.diag(mat)]):
                raise InvalidInputError(f"{name} must be nonsingular mod b")
            object.__setattr__(self, name, mat)

    @classmethod
    def faure(cls, base: int, level: int) -> "DigitalNetSpec":
        """Built-in matrices C1 = I, C2 = Pascal mod b (prime b only)."""
        if not _is_prime(base):
            raise UnsupportedError("built-in generator matrices require a prime base")
        eye = np.eye(level, dtype=np.int64)
        return cls(base, level, eye, pascal_matrix_mod(base, level))

    @property
    def n_points(self) -> int:
        return self.base**self.level


def _base_digits(n: np.ndarray, b: int, m: int) -> np.ndarray:
    """Little-endian digit planes, shape (m, len(n))."""
    dtype = np.uint8 if b < 256 else np.int64
    digits = np.empty((m, n.shape[0]), dtype=dtype)
    rest = n.astype(np.int32 if n.size < 2**31 and b**m < 2**31 else np.int64)
    for j in range(m):
        digits[j] = rest % b
        rest //= b
    return digits


def _apply_matrix(digits: np.ndarray, c: np.ndarray, b: int) -> np.ndarray:
    """Integer numerators sum_i y_i b^(m-1-i) with y = C.digits mod b."""
    m, npts = digits.shape
    key_dtype = np.int32 if b**m < 2**31 else np.int64
    key = np.zeros(npts, dtype=key_dtype)
    weight = b ** np.arange(m - 1, -1, -1, dtype=np.int64)
    if np.array_equal(c, np.eye(m, dtype=c.dtype)):
        for i in range(m):
            key += digits[i].astype(key_dtype) * int(weight[i])
        return key.astype(np.int64)
    # accumulator must hold m*(b-1)^2 without overflow
    acc_dtype = np.uint16 if m * (b - 1) ** 2 < 60000 else np.int64
    acc = np.empty(npts, dtype=acc_dtype)
    for i in range(m):
        acc[:] = 0
        row = c[i]
        for j in range(i, m):
            cij = int(row[j]) % b
            if cij == 0:
                continue
            if cij == 1:
                acc += digits[j]
            else:
                acc += digits[j].astype(acc_dtype) * cij
        key += (acc % b).astype(key_dtype) * int(weight[i])
    return key.astype(np.int64)


def digital_net(spec: DigitalNetSpec) -> PointSet:
    """All b^m points of the digital net defined by the generator matrices."""
    b, m = spec.base, spec.level
    if m * math.log2(b) >= 62:
        raise InvalidInputError("b^m exceeds the 64-bit index range")
    n_points = spec.n_points
    if n_points > _MAX_POINTS:
        raise InvalidInputError("refusing to materialise more than 2^31 points")
    if m == 0:
        return PointSet(
            np.zeros((1, 2)),
            Provenance(kind="digital-net", base=b, level=0, count=1, digits=0),
        )
    n = np.arange(n_points, dtype=np.int64)
    digits = _base_digits(n, b, m)
    scale = float(b) ** m
    pts = np.empty((n_points, 2))
    pts[:, 0] = _apply_matrix(digits, spec.c1, b) / scale
    pts[:, 1] = _apply_matrix(digits, spec.c2, b) / scale
    prov = Provenance(kind="digital-net", base=b, level=m, count=n_points, digits=m)
    return PointSet(pts, prov)


def digital_sequence_prefix(b: int, n: int) -> PointSet:
    """First n points of the (0, 2)-sequence generated by the built-in
    matrices (every aligned block of b^m consecutive points is a
    (0, m, 2)-net)."""
    if n < 1:
        raise InvalidInputError("need at least one point")
    m = 0
    while b**m < n:
        m += 1
    spec = DigitalNetSpec.faure(b, m)  # raises UnsupportedError if b not prime
    if m == 0:
        pts = np.zeros((1, 2))
    else:
        idx = np.arange(n, dtype=np.int64)
        digits = _base_digits(idx, b, m)
        scale = float(b) ** m
        pts = np.empty((n, 2))
        pts[:, 0] = _apply_matrix(digits, spec.c1, b) / scale
        pts[:, 1] = _apply_matrix(digits, spec.c2, b) / scale
    prov = Provenance(kind="digital-sequence-prefix", base=b, count=n, digits=m)
    return PointSet(pts, prov)


def _exact_numerators(pts: np.ndarray, b: int, digits: int) -> np.ndarray:
    """Recover integer numerators K with x = K / b^digits exactly."""
    if digits * math.log2(b) > _EXACT_SCALE_BITS:
        raise InvalidInputError("digit precision too large for exact recovery")
    scale = float(b) ** digits
    dtype = np.int32 if b**digits < 2**31 else np.int64
    scaled = pts * scale
    key = (scaled + 0.5).astype(dtype)  # round-half-up; inputs are near-integers
    if np.max(np.abs(scaled - key)) > 1e-6:
        raise InvalidInputError(
            "coordinates are not multiples of b^-digits; pass the correct digits"
        )
    if key.min() < 0 or key.max() >= b**digits:
        raise InvalidInputError("coordinates must lie in [0, 1)")
    return key


def is_net(points: PointSet | np.ndarray, b: int, m: int, digits: int | None = None) -> bool:
    """Elementary-interval oracle: does every interval of the form
    prod_i [a_i/b^{d_i}, (a_i+1)/b^{d_i}) with d_1 + d_2 = m contain exactly
    one point?

    ``digits`` is the base-b digit precision of the coordinates (taken from
    the point set's provenance when available, else b^digits is the smallest
    power of b reaching the cardinality).
    """
    if isinstance(points, PointSet):
        prov = points.provenance
        if digits is None and prov.digits is not None and prov.base == b:
            digits = prov.digits
        pts = points.points
    else:
        pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInputError("expected planar points")
    n_points = pts.shape[0]
    if n_points != b**m:
        raise InvalidInputError(f"a (0,{m},2)-net in base {b} must have b^m points")
    if digits is None:
        digits = 0
        while b**digits < n_points:
            digits += 1
    if digits < m:
        raise InvalidInputError("digit precision below the net level")
    key = _exact_numerators(pts, b, digits)
    k2 = np.ascontiguousarray(key[:, 1])
    # run the splits with d1 descending so the first-coordinate cell index
    # shrinks by one digit per step (a single cheap division each)
    i1 = key[:, 0] // b ** (digits - m) if digits > m else np.ascontiguousarray(key[:, 0])
    hit = np.empty(n_points, dtype=bool)
    for d1 in range(m, -1, -1):
        d2 = m - d1
        cell = i1 * b**d2 + k2 // b ** (digits - d2)
        # n_points values in n_points cells: exactly-one-each iff onto
        hit[:] = False
        hit[cell] = True
        if not hit.all():
            return False
        i1 //= b
    return True


def fibonacci_lattice(m: int) -> PointSet:
    """The F_m lattice points (n/F_m, {n F_{m-1}/F_m}), n = 0..F_m - 1,
    evaluated in integer arithmetic before converting to float."""
    if m < 1:
        raise InvalidInputError("Fibonacci lattice index must be >= 1")
    f_m = fibonacci(m)
    if f_m > _MAX_POINTS:
        raise InvalidInputError("refusing to materialise more than 2^31 points")
    f_prev = fibonacci(m - 1) if m > 1 else 1
    n = np.arange(f_m, dtype=np.int64)
    frac_num = (n * f_prev) % f_m
    pts = np.column_stack([n / f_m, frac_num / f_m])
    prov = Provenance(kind="fibonacci", level=m, count=int(f_m))
    return PointSet(pts, prov)


def min_distance(points: PointSet | np.ndarray, chunk: int = 256) -> float:
    """Minimum pairwise Euclidean distance by exhaustive O(N^2) scan."""
    pts = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=float)
    n = pts.shape[0]
    if n < 2:
        raise InvalidInputError("need at least two points")
    best = np.inf
    for lo in range(0, n, chunk):
        block = pts[lo : lo + chunk]
        diff = block[:, None, :] - pts[None, :, :]
        sq = np.einsum("ijk,ijk->ij", diff, diff)
        rows = np.arange(block.shape[0])
        sq[rows, lo + rows] = np.inf
        best = min(best, float(sq.min()))
    return math.sqrt(best)


def fibonacci_generating_vectors(
    m: int,
) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
    """Generating vectors (a_m, b_m) of the Fibonacci lattice, as exact
    rationals.

    For odd m = 2k+1:  a = (F_k, (-1)^(k-1) F_{k+1}) / F_m,
                       b = (F_{k+1}, (-1)^k F_k) / F_m          (a is
    orthogonal to b).  For even m = 2k (k >= 2):
                       a = (F_k, (-1)^(k-1) F_k) / F_m,
                       b = (F_{k+1}, (-1)^k F_{k-1}) / F_m.
    The integer span of (a, b) intersected with [0,1)^2 is exactly the
    lattice point set.
    """
    if m < 3:
        raise UnsupportedError("generating vectors are defined for m >= 3")
    f_m = fibonacci(m)
    if m % 2 == 1:
        k = (m - 1) // 2
        f_k, f_k1 = fibonacci(k), fibonacci(k + 1)
        a = (Fraction(f_k, f_m), Fraction((-1) ** (k - 1) * f_k1, f_m))
        b = (Fraction(f_k1, f_m), Fraction((-1) ** k * f_k, f_m))
    else:
        k = m // 2
        f_k, f_k1 = fibonacci(k), fibonacci(k + 1)
        f_km1 = fibonacci(k - 1)
        a = (Fraction(f_k, f_m), Fraction((-1) ** (k - 1) * f_k, f_m))
        b = (Fraction(f_k1, f_m), Fraction((-1) ** k * f_km1, f_m))
    return a, b


def lattice_span(m: int) -> set[tuple[Fraction, Fraction]]:
    """The set {u a_m + v b_m mod 1 : u, v integers} in [0,1)^2, enumerated
    exactly (oracle for the generating-vector contract; small m only)."""
    a, b = fibonacci_generating_vectors(m)
    f_m = fibonacci(m)
    pts = set()
    for u in range(f_m):
        for v in range(f_m):
            x = (u * a[0] + v * b[0]) % 1
            y = (u * a[1] + v * b[1]) % 1
            pts.add((x, y))
    return pts
