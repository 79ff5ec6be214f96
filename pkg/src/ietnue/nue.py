"""Limit segments of nested cylinder chains, witness IETs, and orbit-divergence demos.

Orbit statistics at finite ``N`` only illustrate non-unique ergodicity; the
certificates that matter are the matrix-level ones (replay and separation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .geometry import (
    ProjectiveVector,
    SeparationReport,
    check_nested,
    sin2_angle4,
    span_separation_bound,
)
from .iet import DEFAULT_BIT_BUDGET, DomainError, IntervalExchange, Permutation, as_fraction, orbit_frequencies
from .linalg import VisitationMatrix
from .rauzy import RauzyMove, cylinder, induce

ABSOLUTE_CLUSTER_THRESHOLD = Fraction(1, 10 ** 6)
COLLAPSE_DECADES = 3


class DegenerateSegment(ValueError):
    pass


def _flog10(q: Fraction) -> float:
    # math.log10 accepts arbitrarily large ints
    return math.log10(q.numerator) - math.log10(q.denominator) if q > 0 else float("-inf")


@dataclass(frozen=True)
class Clustering:
    labels: tuple[int, ...]
    rule: str

    @property
    def count(self) -> int:
        return len(set(self.labels))


def _pair_sin2(M: VisitationMatrix) -> dict:
    cols = M.columns()
    d = len(cols)
    return {(i, j): sin2_angle4(cols[i], cols[j]) for i in range(d) for j in range(i + 1, d)}


def cluster_columns(chain: Sequence[VisitationMatrix], collapse_decades: float = COLLAPSE_DECADES,
                    threshold: Fraction = ABSOLUTE_CLUSTER_THRESHOLD) -> Clustering:
    """Group the columns of the deepest matrix whose directions are merging.

    With two or more matrices, a column pair is joined when its ``sin^2``
    shrank by at least ``collapse_decades`` decades from the first matrix to
    the last. A single matrix falls back to the absolute rule ``sin^2 <
    threshold``. Groups are the connected components of the joined pairs.
    """
    if isinstance(chain, VisitationMatrix):
        chain = [chain]
    last = _pair_sin2(chain[-1])
    if len(chain) >= 2:
        first = _pair_sin2(chain[0])
        rule = f"sin2 shrank by >= 10^{collapse_decades} along the chain"
        joined = [p for p, s in last.items() if _flog10(s) <= _flog10(first[p]) - collapse_decades]
    else:
        rule = f"sin2 < {threshold}"
        joined = [p for p, s in last.items() if s < threshold]
    d = chain[-1].dim
    parent = list(range(d))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in joined:
        parent[find(i)] = find(j)
    roots, labels = {}, []
    for i in range(d):
        labels.append(roots.setdefault(find(i), len(roots)))
    return Clustering(tuple(labels), rule)


@dataclass
class LimitSegment:
    endpoint_estimates: tuple[ProjectiveVector, ProjectiveVector]
    certified_length_lower_bound: Fraction
    depth: int
    clustering: Clustering
    separation: Optional[SeparationReport] = None
    deepest: Optional[VisitationMatrix] = None

    @property
    def cluster_count(self) -> int:
        return self.clustering.count

    @property
    def dimension_estimate(self) -> int:
        return self.cluster_count - 1

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "endpoints": [[str(c) for c in p.coords] for p in self.endpoint_estimates],
            "certified_length_lower_bound": str(self.certified_length_lower_bound),
            "cluster_labels": list(self.clustering.labels),
            "cluster_rule": self.clustering.rule,
            "dimension_estimate": self.dimension_estimate,
            "separation": None if self.separation is None else self.separation.to_json(),
        }


def limit_segment(chain: Sequence[VisitationMatrix], base_matrix: Optional[VisitationMatrix] = None) -> LimitSegment:
    """Endpoint estimates ``C1+C2`` and ``C3+C4`` of the deepest matrix, with certificate and clustering."""
    if not chain:
        raise ValueError("empty chain")
    check_nested(chain)
    M = chain[-1]
    c = M.columns()
    e12 = ProjectiveVector(tuple(a + b for a, b in zip(c[0], c[1])))
    e34 = ProjectiveVector(tuple(a + b for a, b in zip(c[2], c[3])))
    sep = span_separation_bound(chain, base_matrix)
    return LimitSegment((e12, e34), sep.certified, len(chain), cluster_columns(chain), sep, M)


def witness_iet(seg: LimitSegment, mix) -> IntervalExchange:
    """IET with lengths ``mix*e12 + (1-mix)*e34`` (both normalized) and permutation (4321).

    ``mix`` must lie strictly inside (0, 1): an endpoint puts the lengths on
    the boundary of the deepest cylinder, where induction meets zero-length
    intervals before the chain is replayed.
    """
    mix = as_fraction(mix)
    if not 0 < mix < 1:
        raise DomainError("mix must lie strictly between 0 and 1")
    if seg.cluster_count != 2:
        raise DegenerateSegment(f"segment has {seg.cluster_count} clusters, expected 2")
    e12, e34 = (p.normalized() for p in seg.endpoint_estimates)
    lam = tuple(mix * a + (1 - mix) * b for a, b in zip(e12, e34))
    return IntervalExchange(lam, Permutation((4, 3, 2, 1))).normalize()


@dataclass
class ReplayReport:
    expected: tuple
    observed: tuple
    matched: bool
    in_cylinder: Optional[bool] = None

    def to_json(self) -> dict:
        fmt = lambda runs: [[m.value, str(n)] for m, n in runs]
        return {
            "matched": self.matched,
            "in_cylinder": self.in_cylinder,
            "expected_runs": fmt(self.expected),
            "observed_runs": fmt(self.observed),
            "moves": str(sum(n for _, n in self.expected)),
        }


def replay(T: IntervalExchange, expected_runs: Sequence[tuple[RauzyMove, int]],
           deepest: Optional[VisitationMatrix] = None) -> ReplayReport:
    """Run induction on ``T`` for as many moves as ``expected_runs`` holds and compare run-for-run."""
    expected = tuple((RauzyMove(m), int(n)) for m, n in expected_runs)
    total = sum(n for _, n in expected)
    trace = induce(T, total)
    inside = cylinder(deepest).contains(T.lengths, strict=True) if deepest is not None else None
    return ReplayReport(expected, trace.runs, trace.runs == expected, inside)


# --- orbit demos --------------------------------------------------------------


def _l1(p: Sequence[Fraction], q: Sequence[Fraction]) -> Fraction:
    return sum((abs(a - b) for a, b in zip(p, q)), Fraction(0))


@dataclass
class DivergenceReport:
    steps: int
    freq_x: list[Fraction]
    freq_y: list[Fraction]
    divergence: Fraction
    drift_x: Fraction
    drift_y: Fraction

    def to_json(self) -> dict:
        return {
            "steps": self.steps,
            "freq_x": [float(f) for f in self.freq_x],
            "freq_y": [float(f) for f in self.freq_y],
            "divergence": float(self.divergence),
            "drift_x": float(self.drift_x),
            "drift_y": float(self.drift_y),
        }


def _freq_with_drift(T, x, N, budget):
    half = orbit_frequencies(T, x, max(1, N // 2), budget).frequencies()
    full = orbit_frequencies(T, x, N, budget).frequencies()
    return full, _l1(half, full)


def nue_demo(T: IntervalExchange, x0, y0, N: int, bit_budget: int = DEFAULT_BIT_BUDGET,
             U: Optional[IntervalExchange] = None) -> DivergenceReport:
    """L1 distance between visit frequencies of two orbits after ``N`` steps, plus the drift of each between N/2 and N.

    The second orbit runs on ``U`` when given (to compare two IETs), else on ``T``.
    """
    fx, dx = _freq_with_drift(T, x0, N, bit_budget)
    fy, dy = _freq_with_drift(U if U is not None else T, y0, N, bit_budget)
    return DivergenceReport(N, fx, fy, _l1(fx, fy), dx, dy)


def fibonacci(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def golden_control(n: int = 40) -> IntervalExchange:
    """Rotation by ``F_n/F_{n+1}`` written as a 4-interval exchange with permutation (3412)."""
    alpha = Fraction(fibonacci(n), fibonacci(n + 1))
    half = Fraction(1, 2)
    return IntervalExchange(((1 - alpha) * half, (1 - alpha) * half, alpha * half, alpha * half), Permutation((3, 4, 1, 2)))


@dataclass
class EndpointComparison:
    witness: DivergenceReport
    control: DivergenceReport
    expected_divergence: Fraction

    @property
    def ratio(self) -> float:
        if self.control.divergence == 0:
            return math.inf
        return float(self.witness.divergence / self.control.divergence)

    def to_json(self) -> dict:
        return {
            "witness": self.witness.to_json(),
            "control": self.control.to_json(),
            "expected_divergence": float(self.expected_divergence),
            "ratio": self.ratio,
        }


def endpoint_divergence(seg: LimitSegment, N: int, eps=Fraction(1, 10 ** 6),
                        bit_budget: int = 1 << 20, control: Optional[IntervalExchange] = None) -> EndpointComparison:
    """Frequencies of orbits on the near-endpoint witnesses ``mix=eps`` and ``mix=1-eps`` versus two orbits on a uniquely ergodic control."""
    eps = as_fraction(eps)
    T0, T1 = witness_iet(seg, eps), witness_iet(seg, 1 - eps)
    w = nue_demo(T0, Fraction(0), Fraction(0), N, bit_budget, U=T1)
    ctrl = control if control is not None else golden_control()
    c = nue_demo(ctrl, Fraction(0), ctrl.total / 2, N, bit_budget)
    e12, e34 = (p.normalized() for p in seg.endpoint_estimates)
    return EndpointComparison(w, c, _l1(e12, e34))
