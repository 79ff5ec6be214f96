"""Nonnegative SL(2, Z) matrices: H1/H2 words, balance, angles, counting."""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np


class NotDecomposable(ValueError):
    pass


class SamplingFailure(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class PositiveSL2:
    """``[[a, b], [c, d]]`` with nonnegative integer entries and ``ad - bc = 1``."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ValueError("entries must be nonnegative")
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self.rows} is not 1")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "PositiveSL2":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @property
    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    @property
    def norm(self) -> int:
        """``|A|``, the sum of the entries."""
        return self.a + self.b + self.c + self.d

    @property
    def column_sums(self) -> tuple[int, int]:
        return self.a + self.c, self.b + self.d

    def __matmul__(self, o: "PositiveSL2") -> "PositiveSL2":
        return PositiveSL2(
            self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d,
        )

    def __pow__(self, n: int) -> "PositiveSL2":
        out, base = IDENTITY, self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out

    def ends_with_h1(self) -> bool:
        """True iff ``A = A' H1`` with ``A'`` nonnegative (first column dominates)."""
        return self.a >= self.b and self.c >= self.d and self != IDENTITY

    def is_strictly_positive(self) -> bool:
        return min(self.a, self.b, self.c, self.d) > 0


IDENTITY = PositiveSL2(1, 0, 0, 1)
H1 = PositiveSL2(1, 0, 1, 1)
H2 = PositiveSL2(1, 1, 0, 1)
GOLDEN = PositiveSL2(2, 1, 1, 1)  # H2 H1; right-multiplying by it forces 2-balance


def h1(n: int) -> PositiveSL2:
    return PositiveSL2(1, 0, n, 1)


def h2(n: int) -> PositiveSL2:
    return PositiveSL2(1, n, 0, 1)


@dataclass(frozen=True)
class SL2Decomposition:
    """``A = H_s^{p1} H_{s'}^{p2} ...`` with alternating generators starting at ``start``."""

    exponents: tuple[int, ...]
    start: int = 1

    def recompose(self) -> PositiveSL2:
        out, gen = IDENTITY, self.start
        for p in self.exponents:
            out = out @ (h1(p) if gen == 1 else h2(p))
            gen = 3 - gen
        return out

    def h1_first(self) -> tuple[int, ...]:
        """Exponents ``p1, p2, ...`` of the form ``H1^p1 H2^p2 H1^p3 ...`` (``p1`` may be 0)."""
        return self.exponents if self.start == 1 else (0,) + self.exponents

    def word(self) -> str:
        gen, parts = self.start, []
        for p in self.exponents:
            parts.append(f"H{gen}^{p}")
            gen = 3 - gen
        return " ".join(parts) or "I"


def decompose(A: PositiveSL2) -> SL2Decomposition:
    """Greedy continued-fraction factorization into maximal powers of H1 and H2.

    Every nonnegative SL2 matrix other than the identity has exactly one row
    dominating the other entrywise, which fixes the next left factor.

    >>> decompose(PositiveSL2(2, 1, 1, 1))
    SL2Decomposition(exponents=(1, 1), start=2)
    """
    a, b, c, d = A.a, A.b, A.c, A.d
    word: list[tuple[int, int]] = []
    while (a, b, c, d) != (1, 0, 0, 1):
        if c >= a and d >= b:
            q = min(c // a if a else math.inf, d // b if b else math.inf)
            c, d = c - q * a, d - q * b
            word.append((1, q))
        elif a >= c and b >= d:
            q = min(a // c if c else math.inf, b // d if d else math.inf)
            a, b = a - q * c, b - q * d
            word.append((2, q))
        else:  # pragma: no cover - impossible for det 1, nonnegative
            raise NotDecomposable(f"{A} has no dominating row")
        if q == 0 or q is math.inf:  # pragma: no cover
            raise NotDecomposable(f"{A} stalls")
    if not word:
        return SL2Decomposition((), 1)
    return SL2Decomposition(tuple(int(q) for _, q in word), word[0][0])


def is_balanced(A: PositiveSL2, D) -> bool:
    """Column-sum ratio in ``[1/D, D]``, compared exactly."""
    D = Fraction(D)
    s1, s2 = A.column_sums
    if s2 == 0 or s1 == 0:
        return False
    ratio = Fraction(s1, s2)
    return 1 / D <= ratio <= D


def sin2_column_angle(A: PositiveSL2) -> Fraction:
    """``sin^2`` of the angle between the columns; equals ``1/(|c1|^2 |c2|^2)`` as ``det = 1``."""
    n1 = A.a * A.a + A.c * A.c
    n2 = A.b * A.b + A.d * A.d
    return Fraction(1, n1 * n2)


# --- enumeration ----------------------------------------------------------


@dataclass(frozen=True)
class EnumerationResult:
    matrices: tuple[PositiveSL2, ...]
    complete: bool

    @property
    def count(self) -> int:
        return len(self.matrices)


def iter_by_norm(max_norm: int) -> Iterator[PositiveSL2]:
    """All nonnegative SL2 matrices with ``|A| <= max_norm`` (Stern-Brocot descent).

    The monoid generated by H1 and H2 is free and right-multiplication by
    either generator strictly increases the norm, so pruning at ``max_norm``
    visits each matrix once.
    """
    stack = [(1, 0, 0, 1)]
    while stack:
        a, b, c, d = stack.pop()
        yield PositiveSL2(a, b, c, d)
        # A H1 adds column 2 to column 1, A H2 adds column 1 to column 2
        s = a + b + c + d
        if s + b + d <= max_norm:
            stack.append((a + b, b, c + d, d))
        if s + a + c <= max_norm:
            stack.append((a, a + b, c, c + d))


def _balanced_in_range(A_sums: tuple[int, int], D: Fraction) -> bool:
    s1, s2 = A_sums
    return s1 * D >= s2 and s2 * D >= s1


def enumerate_balanced(R: int, D, budget: Optional[int] = None) -> EnumerationResult:
    """D-balanced matrices with ``|A|`` in ``[R, 2R]``, sorted by ``(|A|, a, b, c, d)``.

    With a ``budget``, at most that many are returned and ``complete`` tells
    whether the enumeration finished.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    D = Fraction(D)
    found = [A for A in iter_by_norm(2 * R) if A.norm >= R and _balanced_in_range(A.column_sums, D)]
    found.sort(key=lambda A: (A.norm, A.a, A.b, A.c, A.d))
    if budget is not None and len(found) > budget:
        return EnumerationResult(tuple(found[:budget]), False)
    return EnumerationResult(tuple(found), True)


def count_balanced(R: int, D) -> int:
    D = Fraction(D)
    n = 0
    # inline the descent: constructing dataclasses for ~1e6 nodes is the bottleneck
    stack = [(1, 0, 0, 1)]
    lo, hi = R, 2 * R
    num, den = D.numerator, D.denominator
    while stack:
        a, b, c, d = stack.pop()
        s1, s2 = a + c, b + d
        s = s1 + s2
        if s >= lo and s1 * num >= s2 * den and s2 * num >= s1 * den:
            n += 1
        if s + s2 <= hi:
            stack.append((a + b, b, c + d, d))
        if s + s1 <= hi:
            stack.append((a, a + b, c, c + d))
    return n


def brute_force_balanced(R: int, D) -> list[PositiveSL2]:
    """Quadruple scan over entries; an independent test oracle for small ``R``."""
    D = Fraction(D)
    out = []
    top = 2 * R
    for a in range(top + 1):
        for b in range(top + 1 - a):
            for c in range(top + 1 - a - b):
                # ad = 1 + bc
                if a == 0:
                    continue
                q, r = divmod(1 + b * c, a)
                if r or a + b + c + q > top or a + b + c + q < R:
                    continue
                A = PositiveSL2(a, b, c, q)
                if _balanced_in_range(A.column_sums, D):
                    out.append(A)
    out.sort(key=lambda A: (A.norm, A.a, A.b, A.c, A.d))
    return out


def growth_exponent(Rs: Sequence[int], counts: Sequence[int]) -> float:
    """Least-squares slope of ``log count`` against ``log R``."""
    x = np.log(np.asarray(Rs, dtype=float))
    y = np.log(np.asarray(counts, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def sample_balanced(lo: int, hi: int, D, rng: random.Random, max_attempts: int = 10_000) -> PositiveSL2:
    """Pseudo-random D-balanced matrix with ``lo <= |A| <= hi`` ending in H1.

    Picks the first column ``(a, c)`` and recovers the second from
    ``a (b + d) = 1 mod (a + c)``, which pins ``b + d`` below ``a + c``.
    """
    D = Fraction(D)
    for _ in range(max_attempts):
        s1 = rng.randint(max(2, (lo + 1) // 2), max(2, hi - 1))
        a = rng.randint(1, s1 - 1)
        if math.gcd(a, s1) != 1:
            continue
        c = s1 - a
        s2 = pow(a, -1, s1)
        d, rem = divmod(1 + s2 * c, s1)
        b = s2 - d
        if rem or b < 0 or d < 0:  # pragma: no cover - guaranteed by construction
            continue
        if not lo <= s1 + s2 <= hi or s1 > D * s2:
            continue
        A = PositiveSL2(a, b, c, d)
        if A.ends_with_h1():
            return A
    raise SamplingFailure(f"no {D}-balanced matrix with norm in [{lo}, {hi}] after {max_attempts} attempts")


def write_csv(matrices: Sequence[PositiveSL2], fh: Optional[io.TextIOBase] = None) -> str:
    """Rows ``a,b,c,d`` as decimal strings; returns the text when ``fh`` is None."""
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b", "c", "d"])
    for A in matrices:
        w.writerow([str(A.a), str(A.b), str(A.c), str(A.d)])
    return buf.getvalue() if fh is None else ""
