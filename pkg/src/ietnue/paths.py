"""Block matrices L1/U1/L2/U2, the N1/N2 assembly, and the depth-k products M_k.

All blocks are loops at (4321). In move terms (see :mod:`ietnue.rauzy`)::

    L1(n) = (B B B)^n          U1(n) = B B A^n B
    L2(n) = (A A A)^n          U2(n) = A A B^n A

The left-side blocks are the right-side ones conjugated by index reversal,
which also swaps the move letters.
"""

from __future__ import annotations

import hashlib
import json
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .linalg import VisitationMatrix, mirror, product
from .rauzy import RauzyMove
from .sl2 import PositiveSL2, decompose, is_balanced, sample_balanced

ROOT = (4, 3, 2, 1)


class ExponentUnderflow(ValueError):
    """A decremented H1 exponent would be negative (the word of A does not end in H1)."""


class RangeError(ValueError):
    pass


def l1(n: int) -> VisitationMatrix:
    if n < 0:
        raise ValueError("n must be >= 0")
    return VisitationMatrix(((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (n, n, n, 1)))


def u1(n: int) -> VisitationMatrix:
    if n < 0:
        raise ValueError("n must be >= 0")
    return VisitationMatrix(((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, n + 1, n), (1, 1, 1, 1)))


def l2(n: int) -> VisitationMatrix:
    return mirror(l1(n))


def u2(n: int) -> VisitationMatrix:
    return mirror(u1(n))


def l1_word(n: int) -> str:
    return "BBB" * n


def u1_word(n: int) -> str:
    return "BB" + "A" * n + "B"


def _swap(word: str) -> str:
    return word.translate(str.maketrans("AB", "BA"))


def l2_word(n: int) -> str:
    return _swap(l1_word(n))


def u2_word(n: int) -> str:
    return _swap(u1_word(n))


def block_exponents(A: PositiveSL2) -> tuple[int, ...]:
    """Exponents ``p1..pk`` of ``A = H1^p1 H2^p2 ... H1^pk``; ``k`` is odd."""
    exps = decompose(A).h1_first()
    if len(exps) % 2 == 0:
        raise ExponentUnderflow(f"{A.rows} does not end in H1; the last L1 exponent would be -1")
    return exps


def _block_plan(A: PositiveSL2, r: int) -> list[tuple[str, int]]:
    """Sequence of ('L', n) / ('U', n) factors of ``N(A, r)``."""
    if r < 0:
        raise ValueError("r must be >= 0")
    exps = block_exponents(A)
    plan = [("L", exps[0])]
    for idx in range(1, len(exps)):
        p = exps[idx]
        plan.append(("U", p) if idx % 2 == 1 else ("L", p - 1))
    plan.append(("U", r))
    return plan


def n1(A: PositiveSL2, r: int) -> VisitationMatrix:
    """``N1(A, r) = L1^p1 U1^p2 L1^(p3-1) U1^p4 ... L1^(pk-1) U1^r``.

    Rows/columns 3, 4 carry ``A H2^r H1``.
    """
    mats = [l1(n) if kind == "L" else u1(n) for kind, n in _block_plan(A, r)]
    return product(mats, 4)


def n2(A: PositiveSL2, r: int) -> VisitationMatrix:
    """Left-side twin of :func:`n1`; rows/columns 1, 2 carry ``J A H2^r H1 J``."""
    return mirror(n1(A, r))


def block_runs(A: PositiveSL2, r: int, side: int) -> list[tuple[RauzyMove, int]]:
    """Run-length move word of ``N_side(A, r)``; never expands ``r`` into a string."""
    runs: list[tuple[RauzyMove, int]] = []

    def push(move: str, n: int):
        if n == 0:
            return
        mv = RauzyMove(move if side == 1 else _swap(move))
        if runs and runs[-1][0] is mv:
            runs[-1] = (mv, runs[-1][1] + n)
        else:
            runs.append((mv, n))

    for kind, n in _block_plan(A, r):
        if kind == "L":
            push("B", 3 * n)
        else:
            push("B", 2)
            push("A", n)
            push("B", 1)
    return runs


def merge_runs(chunks: Sequence[Sequence[tuple[RauzyMove, int]]]) -> list[tuple[RauzyMove, int]]:
    out: list[tuple[RauzyMove, int]] = []
    for chunk in chunks:
        for mv, n in chunk:
            if out and out[-1][0] is mv:
                out[-1] = (mv, out[-1][1] + n)
            else:
                out.append((mv, n))
    return out


# --- profiles and specs ---------------------------------------------------


@dataclass(frozen=True)
class RangeProfile:
    """Exponent polynomials for ``I_i = [base^e, mult * base^e]`` (``e = i_exp(i)``) and ``J_i`` likewise.

    Coefficients are highest degree first and may be rational; exponents are
    floored. With ``scale="poly"`` the polynomial value itself is the lower
    end (``I_i = [e, mult * e]``). ``i_table``/``j_table`` hold ``(index,
    lower end)`` pairs that override the polynomial outright; they exist for
    tiny families whose ranges no low-degree polynomial describes.
    """

    name: str
    i_coeffs: tuple = (1, -1, 0)
    j_coeffs: tuple = (1, 3, 1)
    base: int = 10
    multiplier: int = 2
    scale: str = "exp"
    i_table: tuple = ()
    j_table: tuple = ()

    def __post_init__(self):
        if self.scale not in ("exp", "poly"):
            raise ValueError("scale must be 'exp' or 'poly'")

    @staticmethod
    def _eval(coeffs, k: int) -> int:
        acc = Fraction(0)
        for c in coeffs:
            acc = acc * k + Fraction(c)
        return int(acc // 1)

    def i_exp(self, k: int) -> int:
        return self._eval(self.i_coeffs, k)

    def j_exp(self, k: int) -> int:
        return self._eval(self.j_coeffs, k)

    def _low(self, e: int) -> int:
        if self.scale == "poly":
            if e < 1:
                raise RangeError(f"range lower end {e} < 1")
            return e
        if e < 0:
            raise RangeError(f"negative exponent {e}")
        return self.base ** e

    def i_range(self, k: int) -> tuple[int, int]:
        table = dict(self.i_table)
        lo = table[k] if k in table else self._low(self.i_exp(k))
        return lo, self.multiplier * lo

    def j_range(self, k: int) -> tuple[int, int]:
        table = dict(self.j_table)
        lo = table[k] if k in table else self._low(self.j_exp(k))
        return lo, self.multiplier * lo

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "i_coeffs": [str(Fraction(c)) for c in self.i_coeffs],
            "j_coeffs": [str(Fraction(c)) for c in self.j_coeffs],
            "base": self.base,
            "multiplier": self.multiplier,
            "scale": self.scale,
            "i_table": [list(p) for p in self.i_table],
            "j_table": [list(p) for p in self.j_table],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RangeProfile":
        return cls(
            data["name"],
            tuple(Fraction(c) for c in data["i_coeffs"]),
            tuple(Fraction(c) for c in data["j_coeffs"]),
            int(data["base"]),
            int(data["multiplier"]),
            data.get("scale", "exp"),
            tuple((int(i), int(v)) for i, v in data.get("i_table", ())),
            tuple((int(i), int(v)) for i, v in data.get("j_table", ())),
        )


PAPER = RangeProfile("paper")
# same exponent polynomials, base 2: numbers shrink by log10(2) in every digit count
DESK = RangeProfile("desk", base=2)
# Three enumerable levels whose child counts (6, 21, 438 after trimming) grow
# faster than exponentially in the level, as the large profiles do. Outside
# the table, |A_i| in [i-1, 2(i-1)]; r_i in [1, 2] throughout.
MICRO = RangeProfile(
    "micro", i_coeffs=(1, -1), j_coeffs=(1,), scale="poly",
    i_table=((3, 2), (4, 3), (5, 3), (6, 3), (7, 6), (8, 8)),
)
PROFILES = {"paper": PAPER, "desk": DESK, "micro": MICRO}


def get_profile(name: str) -> RangeProfile:
    if name.startswith("custom:"):
        return RangeProfile.from_json(json.loads(Path(name[len("custom:"):]).read_text()))
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; choose from {sorted(PROFILES)} or custom:<file>") from None


@dataclass(frozen=True)
class PathBlock:
    side: int
    A: PositiveSL2
    r: int

    def matrix(self) -> VisitationMatrix:
        return n1(self.A, self.r) if self.side == 1 else n2(self.A, self.r)

    def runs(self) -> list[tuple[RauzyMove, int]]:
        return block_runs(self.A, self.r, self.side)


@dataclass(frozen=True)
class MkSpec:
    """Parameters of ``M_k = N1(A_3, r_4) N2(A_4, r_5) ... N2(A_{2k+2}, r_{2k+3})``.

    ``A[t]`` is ``A_{t+3}`` and ``r[t]`` is ``r_{t+4}``.
    """

    k: int
    A: tuple[PositiveSL2, ...]
    r: tuple[int, ...]
    profile: RangeProfile = PAPER
    D: Fraction = Fraction(10)

    def __post_init__(self):
        if len(self.A) != 2 * self.k or len(self.r) != 2 * self.k:
            raise ValueError(f"depth {self.k} needs {2 * self.k} A's and r's")
        object.__setattr__(self, "D", Fraction(self.D))

    def blocks(self) -> list[PathBlock]:
        return [PathBlock(1 if t % 2 == 0 else 2, A, r) for t, (A, r) in enumerate(zip(self.A, self.r))]

    def truncate(self, k: int) -> "MkSpec":
        return MkSpec(k, self.A[: 2 * k], self.r[: 2 * k], self.profile, self.D)

    def extend(self, A_odd: PositiveSL2, r_even: int, A_even: PositiveSL2, r_odd: int) -> "MkSpec":
        return MkSpec(self.k + 1, self.A + (A_odd, A_even), self.r + (r_even, r_odd), self.profile, self.D)

    def runs(self) -> list[tuple[RauzyMove, int]]:
        return merge_runs([b.runs() for b in self.blocks()])

    def violations(self) -> list[str]:
        out = []
        for t, (A, r) in enumerate(zip(self.A, self.r)):
            i = t + 3
            lo, hi = self.profile.i_range(i)
            if not lo <= A.norm <= hi:
                out.append(f"|A_{i}| = {A.norm} outside I_{i}")
            lo, hi = self.profile.j_range(i + 1)
            if not lo <= r <= hi:
                out.append(f"r_{i + 1} = {r} outside J_{i + 1}")
            if not is_balanced(A, self.D):
                out.append(f"A_{i} is not {self.D}-balanced")
        return out

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "A": [[str(x) for x in (A.a, A.b, A.c, A.d)] for A in self.A],
            "r": [str(r) for r in self.r],
            "profile": self.profile.to_json(),
            "D": str(self.D),
        }

    @classmethod
    def from_json(cls, data: dict) -> "MkSpec":
        return cls(
            int(data["k"]),
            tuple(PositiveSL2(*(int(x) for x in A)) for A in data["A"]),
            tuple(int(r) for r in data["r"]),
            RangeProfile.from_json(data["profile"]),
            Fraction(data["D"]),
        )

    def content_hash(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def build_mk(spec: MkSpec, validate: bool = True) -> VisitationMatrix:
    if validate:
        bad = spec.violations()
        if bad:
            raise RangeError("; ".join(bad))
    return product([b.matrix() for b in spec.blocks()], 4)


def build_chain(spec: MkSpec, validate: bool = True) -> list[VisitationMatrix]:
    """``[M_1, ..., M_k]``, each a right multiple of the previous."""
    if validate:
        bad = spec.violations()
        if bad:
            raise RangeError("; ".join(bad))
    chain, M = [], VisitationMatrix.identity(4)
    blocks = spec.blocks()
    for t in range(0, len(blocks), 2):
        M = M @ blocks[t].matrix() @ blocks[t + 1].matrix()
        chain.append(M)
    return chain


def cache_dir(default: Optional[str] = None) -> Path:
    return Path(os.environ.get("IETNUE_CACHE") or default or Path.home() / ".cache" / "ietnue")


def build_mk_cached(spec: MkSpec, directory: Optional[Path] = None) -> VisitationMatrix:
    """:func:`build_mk` memoized on disk under the MkSpec content hash."""
    directory = Path(directory) if directory is not None else cache_dir()
    path = directory / f"mk-{spec.content_hash()}.json"
    if path.exists():
        return VisitationMatrix.from_json(json.loads(path.read_text())["matrix"])
    M = build_mk(spec)
    directory.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps({"spec": spec.to_json(), "matrix": M.to_json()}))
    return M


def sample_mk(k: int, seed: int, profile: RangeProfile = PAPER, D=10, max_attempts: int = 10_000) -> MkSpec:
    """Reproducible pseudo-random spec: D-balanced ``A_i`` with ``|A_i|`` in ``I_i``, ``r_i`` in ``J_i``."""
    rng = random.Random(seed)
    As, rs = [], []
    for i in range(3, 2 * k + 3):
        lo, hi = profile.i_range(i)
        As.append(sample_balanced(lo, hi, D, rng, max_attempts))
        lo, hi = profile.j_range(i + 1)
        rs.append(rng.randint(lo, hi))
    return MkSpec(k, tuple(As), tuple(rs), profile, Fraction(D))
