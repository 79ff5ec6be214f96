"""Exact projective geometry on column cones of visitation matrices.

Angles are handled through ``sin^2`` as exact :class:`~fractions.Fraction`
values. Logarithms of angles (for polynomial fits) go through mpmath.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Optional, Sequence

import mpmath
import numpy as np

from .linalg import SingularMatrixError, VisitationMatrix, solve
from .paths import PathBlock
from .sl2 import PositiveSL2

Vec = Sequence[int]


class ChainMismatch(ValueError):
    """Successive matrices are not right multiples of each other by a nonnegative integer matrix."""


@dataclass(frozen=True)
class ProjectiveVector:
    coords: tuple[int, ...]

    def __post_init__(self):
        c = tuple(int(x) for x in self.coords)
        if any(x < 0 for x in c) or not any(c):
            raise ValueError("need nonnegative coordinates, not all zero")
        g = 0
        for x in c:
            g = gcd(g, x)
        object.__setattr__(self, "coords", tuple(x // g for x in c))

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def normalized(self) -> tuple[Fraction, ...]:
        s = sum(self.coords)
        return tuple(Fraction(x, s) for x in self.coords)


@dataclass(frozen=True)
class ConeSegment:
    v: ProjectiveVector
    w: ProjectiveVector

    def __post_init__(self):
        if sin2_angle4(self.v, self.w) == 0:
            raise ValueError("segment endpoints are projectively equal")


def _dot(u: Vec, v: Vec) -> int:
    return sum(a * b for a, b in zip(u, v))


def sin2_angle4(v: Vec, w: Vec) -> Fraction:
    """``1 - (v.w)^2 / (|v|^2 |w|^2)``; works in any dimension."""
    v, w = tuple(v), tuple(w)
    vv, ww, vw = _dot(v, v), _dot(w, w), _dot(v, w)
    if vv == 0 or ww == 0:
        raise ValueError("zero vector has no direction")
    return 1 - Fraction(vw * vw, vv * ww)


def sine_addition_check(v: Vec, w: Vec) -> tuple[Fraction, Fraction]:
    """Return ``(sin^2 angle(v+w, w), |v|^2/|v+w|^2 * sin^2 angle(v, w))``; the two agree."""
    v, w = tuple(v), tuple(w)
    s = tuple(a + b for a, b in zip(v, w))
    lhs = sin2_angle4(s, w)
    rhs = Fraction(_dot(v, v), _dot(s, s)) * sin2_angle4(v, w)
    return lhs, rhs


def _gram_projection(x: Vec, gens: Sequence[Vec]) -> Optional[tuple[list[Fraction], Fraction]]:
    """Coefficients of the orthogonal projection of ``x`` on span(gens) and ``|Px|^2``."""
    G = [[_dot(g, h) for h in gens] for g in gens]
    rhs = [_dot(g, x) for g in gens]
    try:
        alpha = solve(G, rhs)
    except SingularMatrixError:
        return None
    return alpha, sum(a * b for a, b in zip(alpha, rhs))


def sin2_point_to_cone(x: Vec, gens: Sequence[Vec]) -> Fraction:
    """Exact ``sin^2`` of the smallest angle between ``x`` and the cone spanned by ``gens``.

    The nearest cone direction is the projection of ``x`` onto the span of
    some face with nonnegative coefficients; every face is tried.
    """
    x = tuple(x)
    xx = _dot(x, x)
    best = Fraction(1)
    for size in range(1, len(gens) + 1):
        for face in combinations(gens, size):
            res = _gram_projection(x, face)
            if res is None:
                continue
            alpha, pp = res
            if pp > 0 and all(a >= 0 for a in alpha):
                best = min(best, 1 - pp / xx)
    return best


def _interior_candidate(U: ConeSegment, V: ConeSegment) -> Optional[mpmath.mpf]:
    """``sin^2`` of the smallest principal angle between the two planes, if its vectors lie in both cones."""
    digits = max(len(str(c)) for seg in (U, V) for p in (seg.v, seg.w) for c in p.coords)
    with mpmath.workdps(50 + 6 * digits):
        def basis(seg):
            return mpmath.matrix([[mpmath.mpf(a), mpmath.mpf(b)] for a, b in zip(seg.v.coords, seg.w.coords)])

        A, B = basis(U), basis(V)
        QA, _ = mpmath.qr(A)
        QB, _ = mpmath.qr(B)
        QA, QB = QA[:, 0:2], QB[:, 0:2]
        Ut, S, Vt = mpmath.svd_r(QA.T * QB)
        u = QA * Ut[:, 0]
        v = QB * Vt.T[:, 0]

        def inside(seg_mat, vec):
            coef = mpmath.lu_solve(seg_mat.T * seg_mat, seg_mat.T * vec)
            return (coef[0] >= 0 and coef[1] >= 0) or (coef[0] <= 0 and coef[1] <= 0)

        try:
            if inside(A, u) and inside(B, v):
                return max(mpmath.mpf(0), 1 - S[0] ** 2)
        except ZeroDivisionError:
            return None
    return None


@dataclass(frozen=True)
class SegmentDistance:
    endpoint_sin2: Fraction
    interior_sin2: Optional[Fraction]

    @property
    def sin2(self):
        if self.interior_sin2 is not None and self.interior_sin2 < self.endpoint_sin2:
            return self.interior_sin2
        return self.endpoint_sin2

    @property
    def exact(self) -> bool:
        return self.sin2 is self.endpoint_sin2


def segment_distance(U: ConeSegment, V: ConeSegment) -> SegmentDistance:
    """Smallest angle between two planar cones.

    Endpoint-to-segment values are exact; a minimum attained at interior
    points of both segments is picked up by a high-precision principal-angle
    computation.
    """
    cands = [sin2_point_to_cone(p.coords, [V.v.coords, V.w.coords]) for p in (U.v, U.w)]
    cands += [sin2_point_to_cone(p.coords, [U.v.coords, U.w.coords]) for p in (V.v, V.w)]
    interior = _interior_candidate(U, V)
    if interior is not None:
        interior = Fraction(mpmath.nstr(interior, 30, min_fixed=-mpmath.inf, max_fixed=mpmath.inf))
    return SegmentDistance(min(cands), interior)


def group_segments(M: VisitationMatrix) -> tuple[ConeSegment, ConeSegment]:
    c = M.columns()
    return (ConeSegment(ProjectiveVector(c[0]), ProjectiveVector(c[1])),
            ConeSegment(ProjectiveVector(c[2]), ProjectiveVector(c[3])))


def within_group_sin2(M: VisitationMatrix) -> tuple[Fraction, Fraction]:
    c = M.columns()
    return sin2_angle4(c[0], c[1]), sin2_angle4(c[2], c[3])


def between_group_sin2(M: VisitationMatrix) -> SegmentDistance:
    U, V = group_segments(M)
    return segment_distance(U, V)


def log10_angle(sin2) -> float:
    """``log10`` of the angle whose squared sine is ``sin2`` (no underflow for tiny values)."""
    s = Fraction(sin2)
    if s <= 0:
        return float("-inf")
    with mpmath.workdps(30):
        x = mpmath.mpf(s.numerator) / mpmath.mpf(s.denominator)
        return float(mpmath.log10(mpmath.asin(mpmath.sqrt(x))))


# --- column sums ------------------------------------------------------------


@dataclass
class ColumnSumReport:
    k: int
    sums: tuple[int, ...]
    bounds: tuple[tuple[int, int], ...]
    margins: tuple[float, ...]
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "ok": self.ok,
            "column_sums": [str(s) for s in self.sums],
            "bounds": [[str(lo), str(hi)] for lo, hi in self.bounds],
            "log10_margin": list(self.margins),
            "violations": self.violations,
        }


def column_sum_bounds(k: int, base: int = 10) -> tuple[tuple[int, int], ...]:
    """Predicted ranges for ``|C_j(M_k)|``: index ranges 4..2k+3 for j=1,2 and 3..2k+2 for j=3,4."""
    def rng(lo_i, hi_i):
        low = 1
        for i in range(lo_i, hi_i + 1):
            low *= base ** (i * i)
        return low, 2 ** (2 * k) * 2 * low

    left, right = rng(4, 2 * k + 3), rng(3, 2 * k + 2)
    return (left, left, right, right)


def _log10_int(n: int) -> float:
    return float(mpmath.log10(mpmath.mpf(n))) if n > 0 else float("-inf")


def check_column_sums(M: VisitationMatrix, k: int, base: int = 10) -> ColumnSumReport:
    """Compare each column sum against its predicted range; margins are log10 distances inside (negative = outside)."""
    sums = tuple(M.column_sums())
    bounds = column_sum_bounds(k, base)
    margins, bad = [], []
    for j, (s, (lo, hi)) in enumerate(zip(sums, bounds), start=1):
        margins.append(min(_log10_int(s) - _log10_int(lo), _log10_int(hi) - _log10_int(s)))
        if s < lo:
            bad.append(f"|C_{j}| below lower bound by 10^{_log10_int(lo) - _log10_int(s):.2f}")
        elif s > hi:
            bad.append(f"|C_{j}| above upper bound by 10^{_log10_int(s) - _log10_int(hi):.2f}")
    return ColumnSumReport(k, sums, bounds, tuple(margins), bad)


# --- angle decay across one block --------------------------------------------


@dataclass
class AngleDecayReport:
    which: str
    sin2_before: Fraction
    sin2_after: Fraction
    normalized_ratio: Fraction
    tightest_d_prime: float
    d_prime: Optional[float]

    @property
    def ok(self) -> bool:
        return self.d_prime is None or self.d_prime >= self.tightest_d_prime

    def to_json(self) -> dict:
        return {
            "which": self.which,
            "sin2_before": str(self.sin2_before),
            "sin2_after": str(self.sin2_after),
            "log10_normalized_ratio": _log10_int(self.normalized_ratio.numerator) - _log10_int(self.normalized_ratio.denominator),
            "tightest_d_prime": self.tightest_d_prime,
            "d_prime": self.d_prime,
            "ok": self.ok,
        }


def check_angle_decay(M: VisitationMatrix, block: PathBlock, which: str, d_prime: Optional[float] = None) -> AngleDecayReport:
    """Sandwich the change in one within-group angle when ``M`` is multiplied by ``block``.

    The shrink factor predicted for the C34 pair under an N1 block is
    ``|A|^2 r``, and ``|A|^2 r^2`` for the C12 pair under an N2 block. At the
    ``sin^2`` level the normalized ratio ``X = (after/before) * factor^2``
    must lie in ``[1/D'^2, D'^2]``; the smallest such ``D'`` is reported.
    """
    if which not in ("C12", "C34"):
        raise ValueError("which must be 'C12' or 'C34'")
    after = M @ block.matrix()
    pick = 0 if which == "C12" else 1
    before_s = within_group_sin2(M)[pick]
    after_s = within_group_sin2(after)[pick]
    n = block.A.norm
    factor = n * n * block.r * (block.r if which == "C12" else 1)
    X = after_s / before_s * factor * factor
    with mpmath.workdps(30):
        xm = mpmath.mpf(X.numerator) / mpmath.mpf(X.denominator)
        tight = float(mpmath.sqrt(max(xm, 1 / xm)))
    return AngleDecayReport(which, before_s, after_s, X, tight, d_prime)


# --- chains -------------------------------------------------------------------


def check_nested(chain: Sequence[VisitationMatrix]) -> list[VisitationMatrix]:
    """Return the connecting factors ``M_k^{-1} M_{k+1}``; raise if any is not a nonnegative integer matrix."""
    out = []
    for prev, nxt in zip(chain, chain[1:]):
        d = prev.dim
        cols = []
        for j in range(d):
            try:
                x = solve([list(r) for r in prev.rows], list(nxt.column(j)))
            except SingularMatrixError as exc:
                raise ChainMismatch(str(exc)) from None
            if any(v.denominator != 1 or v < 0 for v in x):
                raise ChainMismatch(f"column {j + 1} of the next matrix is not a nonnegative integer combination")
            cols.append([int(v) for v in x])
        out.append(VisitationMatrix(tuple(tuple(cols[j][i] for j in range(d)) for i in range(d))))
    return out


def certified_separation(depth: int, base: Fraction = Fraction(1, 10)) -> Fraction:
    """Lower bound for the angle between the two column groups at ``depth``, from the base value minus drift terms."""
    b = Fraction(base)
    for i in range(1, depth):
        b -= Fraction(2 * 4 ** i, 100 ** i)
    return b


LINE_SEGMENT_FLOOR = Fraction(1, 900)


@dataclass
class SeparationReport:
    depth: int
    certified: Fraction
    base_sin2: Fraction
    measured_sin2: list
    drift: Fraction

    @property
    def base_ok(self) -> bool:
        # sin^2 > b^2 forces the angle above b
        return self.base_sin2 > Fraction(1, 100)

    @property
    def measured_ok(self) -> bool:
        return all(s > LINE_SEGMENT_FLOOR ** 2 for s in self.measured_sin2)

    @property
    def ok(self) -> bool:
        return self.base_ok and self.measured_ok and self.certified > LINE_SEGMENT_FLOOR

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "certified_lower_bound": str(self.certified),
            "certified_lower_bound_float": float(self.certified),
            "base_sin2": float(self.base_sin2),
            "measured_sin2": [float(s) for s in self.measured_sin2],
            "drift": str(self.drift),
            "base_ok": self.base_ok,
            "measured_ok": self.measured_ok,
            "ok": self.ok,
        }


def span_separation_bound(chain: Sequence[VisitationMatrix], base_matrix: Optional[VisitationMatrix] = None) -> SeparationReport:
    """Certify the separation of span{C1,C2} from span{C3,C4} along a nested chain.

    The base case is measured on ``base_matrix`` (the first N1 block when
    given, else the first chain element).
    """
    if not chain:
        raise ValueError("empty chain")
    check_nested(chain)
    base = base_matrix if base_matrix is not None else chain[0]
    base_s = Fraction(between_group_sin2(base).sin2)
    measured = [between_group_sin2(M).sin2 for M in chain]
    cert = certified_separation(len(chain))
    return SeparationReport(len(chain), cert, base_s, measured, Fraction(1, 10) - cert)


@dataclass
class DecayProfile:
    ks: list[int]
    log10_c12: list[float]
    log10_c34: list[float]
    log10_between: list[float]

    def fit(self, which: str, degree: int = 3, log_base: float = 10.0) -> np.ndarray:
        ys = np.array(self.log10_c12 if which == "C12" else self.log10_c34) / np.log10(log_base)
        deg = min(degree, len(self.ks) - 1)
        return np.polyfit(np.array(self.ks, dtype=float), ys, deg)

    def to_json(self) -> dict:
        clean = lambda xs: [x if math.isfinite(x) else None for x in xs]
        return {"k": self.ks, "log10_c12": clean(self.log10_c12), "log10_c34": clean(self.log10_c34),
                "log10_between": clean(self.log10_between)}


def decay_profile(chain: Sequence[VisitationMatrix], with_between: bool = True) -> DecayProfile:
    ks, a, b, c = [], [], [], []
    for k, M in enumerate(chain, start=1):
        s12, s34 = within_group_sin2(M)
        ks.append(k)
        a.append(log10_angle(s12))
        b.append(log10_angle(s34))
        c.append(log10_angle(between_group_sin2(M).sin2) if with_between else float("nan"))
    return DecayProfile(ks, a, b, c)


def sl2_angle_d_prime(A: PositiveSL2) -> float:
    """Smallest ``D'`` with ``1/(D'|A|^2)^2 <= sin^2 <= (D'/|A|^2)^2`` for the column angle of ``A``."""
    from .sl2 import sin2_column_angle

    s = sin2_column_angle(A)
    n4 = A.norm ** 4
    x = s * n4
    return float(max(x, 1 / x)) ** 0.5
