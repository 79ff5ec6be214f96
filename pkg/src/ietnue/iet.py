"""Interval exchange transformations in exact rational arithmetic."""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

Rational = Union[int, Fraction, str]

DEFAULT_BIT_BUDGET = 1 << 16


class DomainError(ValueError):
    """Point outside ``[0, |lambda|)``."""


class BitBudgetExceeded(RuntimeError):
    """An orbit computation would exceed the configured bit-length budget."""


def as_fraction(x: Rational) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class Permutation:
    """Permutation of ``{1..d}`` stored as its image sequence ``(pi(1), ..., pi(d))``.

    ``pi(j)`` is the position, counted from the left, of interval ``j`` after
    the exchange.
    """

    image: tuple[int, ...]

    def __post_init__(self):
        image = tuple(int(x) for x in self.image)
        if len(image) < 2:
            raise ValueError("a permutation needs d >= 2")
        if sorted(image) != list(range(1, len(image) + 1)):
            raise ValueError(f"{image} is not a permutation of 1..{len(image)}")
        object.__setattr__(self, "image", image)

    @classmethod
    def parse(cls, text: Union[str, Sequence[int], "Permutation"]) -> "Permutation":
        """Accept ``"4321"``, ``"4 3 2 1"``, ``[4, 3, 2, 1]`` or a Permutation."""
        if isinstance(text, Permutation):
            return text
        if isinstance(text, str):
            parts = text.replace(",", " ").split()
            if len(parts) == 1:
                parts = list(parts[0])
            return cls(tuple(int(p) for p in parts))
        return cls(tuple(text))

    @property
    def d(self) -> int:
        return len(self.image)

    def __call__(self, j: int) -> int:
        return self.image[j - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.d
        for j, p in enumerate(self.image, start=1):
            inv[p - 1] = j
        return Permutation(tuple(inv))

    def is_irreducible(self) -> bool:
        # reducible iff pi maps {1..k} onto itself for some k < d
        return all(max(self.image[:k]) != k for k in range(1, self.d))

    def __str__(self) -> str:
        if self.d < 10:
            return "(" + "".join(str(x) for x in self.image) + ")"
        return "(" + " ".join(str(x) for x in self.image) + ")"


@dataclass(frozen=True)
class IntervalExchange:
    """The map ``T_{lambda, pi}`` on ``[0, sum(lambda))``."""

    lengths: tuple[Fraction, ...]
    perm: Permutation

    def __post_init__(self):
        lengths = tuple(as_fraction(x) for x in self.lengths)
        perm = Permutation.parse(self.perm)
        if len(lengths) != perm.d:
            raise ValueError("need one length per interval")
        if any(x <= 0 for x in lengths):
            raise ValueError("lengths must be positive")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "perm", perm)

    @property
    def d(self) -> int:
        return self.perm.d

    @property
    def total(self) -> Fraction:
        return sum(self.lengths, Fraction(0))

    @property
    def normalized(self) -> bool:
        return self.total == 1

    def normalize(self) -> "IntervalExchange":
        t = self.total
        return IntervalExchange(tuple(x / t for x in self.lengths), self.perm)

    def left_endpoints(self) -> list[Fraction]:
        out, acc = [], Fraction(0)
        for x in self.lengths:
            out.append(acc)
            acc += x
        return out

    def image_left_endpoints(self) -> list[Fraction]:
        """Left endpoint of ``T(I_j)`` for each ``j``."""
        inv = self.perm.inverse()
        pos, acc = {}, Fraction(0)
        for p in range(1, self.d + 1):
            j = inv(p)
            pos[j] = acc
            acc += self.lengths[j - 1]
        return [pos[j] for j in range(1, self.d + 1)]

    def translations(self) -> list[Fraction]:
        return [b - a for a, b in zip(self.left_endpoints(), self.image_left_endpoints())]

    def interval_of(self, x: Rational) -> int:
        """1-based index ``j`` with ``x`` in ``I_j``."""
        x = as_fraction(x)
        if not 0 <= x < self.total:
            raise DomainError(f"{x} is outside [0, {self.total})")
        return bisect.bisect_right(self.left_endpoints(), x)

    def __call__(self, x: Rational) -> Fraction:
        return apply_iet(self, x)

    def inverse_map(self, y: Rational) -> Fraction:
        y = as_fraction(y)
        if not 0 <= y < self.total:
            raise DomainError(f"{y} is outside [0, {self.total})")
        starts = self.image_left_endpoints()
        order = sorted(range(self.d), key=lambda j: starts[j])
        k = bisect.bisect_right([starts[j] for j in order], y) - 1
        j = order[k]
        return y - self.translations()[j]

    def to_json(self) -> dict:
        return {"lengths": [str(x) for x in self.lengths], "perm": list(self.perm.image)}

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: Union[dict, str]) -> "IntervalExchange":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(tuple(Fraction(x) for x in data["lengths"]), Permutation(tuple(data["perm"])))


@dataclass(frozen=True)
class OrbitStats:
    visit_counts: tuple[int, ...]
    steps: int
    start: Fraction

    def frequencies(self) -> list[Fraction]:
        return [Fraction(c, self.steps) for c in self.visit_counts]


def apply_iet(T: IntervalExchange, x: Rational) -> Fraction:
    x = as_fraction(x)
    j = T.interval_of(x)
    before = sum(T.lengths[: j - 1], Fraction(0))
    pj = T.perm(j)
    after = sum((T.lengths[k] for k in range(T.d) if T.perm(k + 1) < pj), Fraction(0))
    return x - before + after


def _integer_model(T: IntervalExchange, x0: Fraction, bit_budget: int):
    den = math.lcm(*(x.denominator for x in T.lengths), x0.denominator)
    if den.bit_length() > bit_budget:
        raise BitBudgetExceeded(f"common denominator needs {den.bit_length()} bits > budget {bit_budget}")
    lens = [int(x * den) for x in T.lengths]
    starts, acc = [], 0
    for v in lens:
        starts.append(acc)
        acc += v
    if acc.bit_length() > bit_budget:
        raise BitBudgetExceeded(f"scaled domain needs {acc.bit_length()} bits > budget {bit_budget}")
    shift = [int(t * den) for t in T.translations()]
    return starts, shift, int(x0 * den), acc


def orbit_frequencies(
    T: IntervalExchange, x0: Rational, N: int, bit_budget: int = DEFAULT_BIT_BUDGET
) -> OrbitStats:
    """Count visits of ``x0, T x0, ..., T^{N-1} x0`` to each interval.

    The orbit runs on an integer rescaling of the domain, so it stays exact;
    the rescaling fails with :class:`BitBudgetExceeded` if it needs more than
    ``bit_budget`` bits.
    """
    x0 = as_fraction(x0)
    if N < 1:
        raise ValueError("N must be positive")
    if not 0 <= x0 < T.total:
        raise DomainError(f"{x0} is outside [0, {T.total})")
    starts, shift, x, _ = _integer_model(T, x0, bit_budget)
    counts = [0] * T.d
    br = bisect.bisect_right
    for _ in range(N):
        j = br(starts, x) - 1
        counts[j] += 1
        x += shift[j]
    return OrbitStats(tuple(counts), N, x0)
