"""Exact integer/rational linear algebra on small dense matrices.

Entries are Python ints (arbitrary precision); nothing here ever touches
floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

Rows = tuple[tuple[int, ...], ...]


class SingularMatrixError(ValueError):
    pass


def _freeze(rows: Iterable[Iterable[int]]) -> Rows:
    return tuple(tuple(int(x) for x in row) for row in rows)


@dataclass(frozen=True)
class VisitationMatrix:
    """Square matrix of arbitrary-precision integers.

    Used for Rauzy elementary matrices and all their products. Instances are
    immutable and hashable; ``@`` is the exact product.
    """

    rows: Rows

    def __post_init__(self):
        rows = _freeze(self.rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("matrix must be square and non-empty")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def identity(cls, d: int) -> "VisitationMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: "VisitationMatrix") -> "VisitationMatrix":
        return VisitationMatrix(matmul(self.rows, other.rows))

    def __pow__(self, n: int) -> "VisitationMatrix":
        if n < 0:
            raise ValueError("negative powers are not supported")
        result = VisitationMatrix.identity(self.dim)
        base = self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.rows)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.dim)]

    def column_sums(self) -> list[int]:
        return [sum(c) for c in self.columns()]

    def transpose(self) -> "VisitationMatrix":
        return VisitationMatrix(tuple(zip(*self.rows)))

    def det(self) -> int:
        return det(self.rows)

    def apply(self, v: Sequence) -> list:
        return [sum(a * x for a, x in zip(row, v)) for row in self.rows]

    def submatrix(self, idx: Sequence[int]) -> tuple[tuple[int, ...], ...]:
        """Principal submatrix on 0-based indices ``idx``."""
        return tuple(tuple(self.rows[i][j] for j in idx) for i in idx)

    def is_nonnegative(self) -> bool:
        return all(x >= 0 for row in self.rows for x in row)

    def to_json(self) -> list[list[str]]:
        return [[str(x) for x in row] for row in self.rows]

    @classmethod
    def from_json(cls, data: Sequence[Sequence]) -> "VisitationMatrix":
        return cls(tuple(tuple(int(x) for x in row) for row in data))

    def __repr__(self) -> str:
        if max((abs(x) for r in self.rows for x in r), default=0) < 10**6:
            return f"VisitationMatrix({[list(r) for r in self.rows]})"
        return f"VisitationMatrix(dim={self.dim}, max_digits={self.max_digits()})"

    def max_digits(self) -> int:
        return max(len(str(abs(x))) for r in self.rows for x in r)


def matmul(a: Rows, b: Rows) -> Rows:
    bt = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def product(mats: Sequence[VisitationMatrix], d: int) -> VisitationMatrix:
    """Left-fold product; identity for an empty sequence."""
    return reduce(lambda x, y: x @ y, mats, VisitationMatrix.identity(d))


def tree_product(mats: Sequence[VisitationMatrix], d: int) -> VisitationMatrix:
    """Balanced-tree product. Bit-identical to :func:`product` (associativity)."""
    if not mats:
        return VisitationMatrix.identity(d)
    layer = list(mats)
    while len(layer) > 1:
        nxt = [layer[i] @ layer[i + 1] for i in range(0, len(layer) - 1, 2)]
        if len(layer) % 2:
            nxt.append(layer[-1])
        layer = nxt
    return layer[0]


def det(rows: Rows) -> int:
    """Fraction-free (Bareiss) determinant."""
    m = [list(r) for r in rows]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for p in range(k + 1, n):
                if m[p][k] != 0:
                    m[k], m[p] = m[p], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def solve(rows: Rows, rhs: Sequence) -> list[Fraction]:
    """Exact solution of ``M x = rhs`` over the rationals (Gauss-Jordan)."""
    n = len(rows)
    aug = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrixError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def mirror(m: VisitationMatrix) -> VisitationMatrix:
    """Conjugate by the index-reversal permutation (i -> d-1-i)."""
    d = m.dim
    return VisitationMatrix(tuple(tuple(m.rows[d - 1 - i][d - 1 - j] for j in range(d)) for i in range(d)))
