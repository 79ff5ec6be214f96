"""Rauzy induction, Rauzy graphs, visitation matrices and their cones.

Conventions
-----------
Moves follow the case formulas: the step is ``A`` when the last interval
``lambda_d`` is the shorter of the two competitors ``lambda_d`` and
``lambda_{pi^-1(d)}``, and ``B`` otherwise. Elementary matrices satisfy
``lambda = M lambda'``, so the cylinder of a path is the cone on the columns
of its matrix.

The classic edge table for the class of (4321) labels every edge by the
inverse permutations of this convention: its edge ``sigma -> tau`` carrying
matrix ``E`` is our ``sigma^-1 -> tau^-1`` with the same ``E``. See
:func:`inverse_labels`.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .iet import IntervalExchange, Permutation, as_fraction
from .linalg import SingularMatrixError, VisitationMatrix, solve


class RauzyUndefined(ArithmeticError):
    """Rauzy induction hits the tie ``lambda_d == lambda_{pi^-1(d)}``."""


class ReduciblePermutation(ValueError):
    pass


class InvalidMove(ValueError):
    pass


class RauzyMove(str, enum.Enum):
    A = "A"
    B = "B"

    @property
    def other(self) -> "RauzyMove":
        return RauzyMove.B if self is RauzyMove.A else RauzyMove.A


Moves = Union[str, Iterable[Union[str, RauzyMove]]]


def parse_moves(moves: Moves) -> list[RauzyMove]:
    try:
        return [RauzyMove(m) for m in moves]
    except ValueError as exc:
        raise InvalidMove(str(exc)) from None


def step_permutation(perm: Permutation, move: RauzyMove) -> Permutation:
    d = perm.d
    pi = perm.image
    m = perm.inverse()(d)
    if move is RauzyMove.A:
        new = [pi[j - 1] if j <= m else pi[d - 1] if j == m + 1 else pi[j - 2] for j in range(1, d + 1)]
    else:
        pd = pi[d - 1]
        new = [p if p <= pd else p + 1 if p < d else pd + 1 for p in pi]
    return Permutation(tuple(new))


def elementary_matrix(perm: Permutation, move: RauzyMove) -> VisitationMatrix:
    """The matrix ``M(T, 1)`` for a single move from ``perm``."""
    d = perm.d
    m = perm.inverse()(d)
    rows = [[0] * d for _ in range(d)]
    if move is RauzyMove.A:
        # the two cases overlap at (d, j<=m); the j-case wins, which is what
        # the first-return map requires
        for i in range(1, d + 1):
            for j in range(1, d + 1):
                if j <= m:
                    v = int(i == j)
                elif i != d:
                    v = int(i == j - 1)
                else:
                    v = int(j == m + 1)
                rows[i - 1][j - 1] = v
    else:
        for i in range(d):
            rows[i][i] = 1
        rows[d - 1][m - 1] += 1
    return VisitationMatrix(tuple(tuple(r) for r in rows))


def move_kind(lengths: Sequence, perm: Permutation) -> RauzyMove:
    d = perm.d
    last, other = lengths[d - 1], lengths[perm.inverse()(d) - 1]
    if last == other:
        raise RauzyUndefined(f"lambda_{d} == lambda_{perm.inverse()(d)}; induction undefined")
    return RauzyMove.A if last < other else RauzyMove.B


def rauzy_step(T: IntervalExchange) -> tuple[IntervalExchange, RauzyMove, VisitationMatrix]:
    """One step of Rauzy induction.

    Returns ``(T', move, M)`` with ``T.lengths == M T'.lengths`` exactly. The
    induced map lives on ``[0, |lambda| - min(...))`` and is not rescaled;
    call :meth:`IntervalExchange.normalize` for the unit-length version.

    >>> T = IntervalExchange(("4/10", "3/10", "2/10", "1/10"), Permutation((4, 3, 2, 1)))
    >>> rauzy_step(T)[0].perm.image, rauzy_step(T)[1].value
    ((4, 1, 3, 2), 'A')
    """
    move = move_kind(T.lengths, T.perm)
    M = elementary_matrix(T.perm, move)
    lam = list(T.lengths)
    d, m = T.d, T.perm.inverse()(T.d)
    if move is RauzyMove.A:
        new = lam[: m - 1] + [lam[m - 1] - lam[d - 1], lam[d - 1]] + lam[m : d - 1]
    else:
        new = lam[:]
        new[d - 1] = lam[d - 1] - lam[m - 1]
    return IntervalExchange(tuple(new), step_permutation(T.perm, move)), move, M


@dataclass(frozen=True)
class RauzyEdge:
    source: Permutation
    move: RauzyMove
    target: Permutation
    matrix: VisitationMatrix


@dataclass
class RauzyGraph:
    root: Permutation
    nodes: tuple[Permutation, ...]
    edges: tuple[RauzyEdge, ...]
    _out: dict = field(default_factory=dict, repr=False)
    _in: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        for e in self.edges:
            self._out[(e.source, e.move)] = e
            self._in.setdefault(e.target, []).append(e)

    def edge(self, source: Permutation, move: RauzyMove) -> RauzyEdge:
        return self._out[(source, RauzyMove(move))]

    def incoming(self, target: Permutation) -> list[RauzyEdge]:
        return list(self._in.get(target, []))

    def to_dot(self) -> str:
        lines = [f'digraph "rauzy{self.root}" {{']
        for n in self.nodes:
            lines.append(f'  "{n}";')
        for e in self.edges:
            style = "dashed" if e.move is RauzyMove.A else "solid"
            lines.append(f'  "{e.source}" -> "{e.target}" [label="{e.move.value}", style={style}];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "root": list(self.root.image),
            "nodes": [list(n.image) for n in self.nodes],
            "edges": [
                {"source": list(e.source.image), "move": e.move.value,
                 "target": list(e.target.image), "matrix": e.matrix.to_json()}
                for e in self.edges
            ],
        }


def rauzy_class(perm: Union[Permutation, str, Sequence[int]]) -> RauzyGraph:
    """Breadth-first closure of ``perm`` under both moves."""
    root = Permutation.parse(perm)
    if not root.is_irreducible():
        raise ReduciblePermutation(f"{root} is reducible")
    seen = {root: None}
    order = [root]
    edges = []
    queue = deque([root])
    while queue:
        p = queue.popleft()
        for move in (RauzyMove.A, RauzyMove.B):
            q = step_permutation(p, move)
            edges.append(RauzyEdge(p, move, q, elementary_matrix(p, move)))
            if q not in seen:
                seen[q] = None
                order.append(q)
                queue.append(q)
    return RauzyGraph(root, tuple(order), tuple(edges))


def inverse_labels(graph: RauzyGraph) -> list[tuple[Permutation, Permutation, VisitationMatrix]]:
    """Edges relabelled by inverse permutations (the tabulated convention)."""
    return [(e.source.inverse(), e.target.inverse(), e.matrix) for e in graph.edges]


def path_matrix(pi0: Union[Permutation, str], moves: Moves) -> tuple[VisitationMatrix, Permutation]:
    """``M(T, n)`` for the move sequence, with the terminal permutation."""
    perm = Permutation.parse(pi0)
    if not perm.is_irreducible():
        raise InvalidMove(f"{perm} is reducible; no Rauzy path starts there")
    M = VisitationMatrix.identity(perm.d)
    for move in parse_moves(moves):
        M = M @ elementary_matrix(perm, move)
        perm = step_permutation(perm, move)
    return M, perm


@dataclass(frozen=True)
class SimplexCone:
    """Projective cone ``M Delta`` spanned by the columns of a visitation matrix."""

    columns: tuple[tuple[int, ...], ...]

    @property
    def matrix(self) -> VisitationMatrix:
        return VisitationMatrix(tuple(zip(*self.columns)))

    def coefficients(self, lam: Sequence) -> list[Fraction]:
        """Exact ``v`` with ``M v = lam``."""
        return solve(self.matrix.rows, [as_fraction(x) for x in lam])

    def contains(self, lam: Sequence, strict: bool = False) -> bool:
        v = self.coefficients(lam)
        return all(x > 0 for x in v) if strict else all(x >= 0 for x in v)

    def normalized_columns(self) -> list[tuple[Fraction, ...]]:
        return [tuple(Fraction(x, sum(c)) for x in c) for c in self.columns]


def cylinder(M: VisitationMatrix) -> SimplexCone:
    if not M.is_nonnegative():
        raise ValueError("visitation matrices are nonnegative")
    if M.det() == 0:
        raise SingularMatrixError("cylinder of a singular matrix")
    cols = tuple(M.columns())
    if any(sum(c) == 0 for c in cols):
        raise SingularMatrixError("zero column")
    return SimplexCone(cols)


# --- run-length induction -------------------------------------------------


@dataclass(frozen=True)
class InductionTrace:
    runs: tuple[tuple[RauzyMove, int], ...]
    final: IntervalExchange
    stopped_on_tie: bool

    @property
    def total_moves(self) -> int:
        return sum(n for _, n in self.runs)


def _run_structure(perm: Permutation, move: RauzyMove) -> tuple[int, list[int]]:
    """Winner index and the cyclic order of losers (0-based) for a run."""
    d = perm.d
    m = perm.inverse()(d)
    if move is RauzyMove.B:
        inv = perm.inverse()
        losers = [inv(p) - 1 for p in range(d, perm(d), -1)]
        return d - 1, losers
    return m - 1, list(range(d - 1, m - 1, -1))


def induce(T: IntervalExchange, max_moves: int) -> InductionTrace:
    """Run Rauzy induction for up to ``max_moves`` moves, one maximal run at a time.

    Within a run of equal moves only the winner's length changes, and it
    loses the losers' lengths in a fixed cyclic order, so a run of any length
    costs O(d) big-integer operations. The move sequence is identical to
    iterating :func:`rauzy_step` ``max_moves`` times.
    """
    runs: list[tuple[RauzyMove, int]] = []
    remaining = max_moves
    tie = False
    while remaining > 0:
        try:
            move = move_kind(T.lengths, T.perm)
        except RauzyUndefined:
            tie = True
            break
        w, losers = _run_structure(T.perm, move)
        lam = T.lengths
        period = sum(lam[i] for i in losers)
        # largest n with S_n < lam[w], where S_n sums the first n losers cyclically
        q, rest = divmod(lam[w], period)
        partial, s = Fraction(0), 0
        for i in losers:
            if partial + lam[i] < rest:
                partial += lam[i]
                s += 1
            else:
                break
        n_max = q * len(losers) + s
        if rest == 0:
            # S_{q c} == lam[w] exactly: last full cycle ends on a tie
            n_max -= 1
        n = min(n_max, remaining)
        if n <= 0:
            tie = True
            break
        full, s = divmod(n, len(losers))
        if full:
            new = list(lam)
            new[w] -= full * period
            T = IntervalExchange(tuple(new), T.perm)
        for _ in range(s):
            T, mv, _ = rauzy_step(T)
            assert mv is move
        runs.append((move, n))
        remaining -= n
    merged: list[tuple[RauzyMove, int]] = []
    for mv, n in runs:
        if merged and merged[-1][0] is mv:
            merged[-1] = (mv, merged[-1][1] + n)
        else:
            merged.append((mv, n))
    return InductionTrace(tuple(merged), T, tie)


def run_length(moves: Moves) -> tuple[tuple[RauzyMove, int], ...]:
    out: list[tuple[RauzyMove, int]] = []
    for mv in parse_moves(moves):
        if out and out[-1][0] is mv:
            out[-1] = (mv, out[-1][1] + 1)
        else:
            out.append((mv, 1))
    return tuple(out)
