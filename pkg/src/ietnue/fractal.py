"""Nested simplex families, their level measures, ball-mass scaling, and the dimension bound.

Cells are simplicial cones given by four integer generator columns. For
measure-theoretic work they are mapped into R^3 through an isometry of the
hyperplane ``sum(x) = 1``; geometry there is float-valued and report-grade,
while masses, deletions and boundary distances stay exact.
"""

from __future__ import annotations

import json
import math
import random
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .linalg import VisitationMatrix
from .paths import MICRO, RangeProfile, n1, n2
from .sl2 import PositiveSL2, enumerate_balanced, sample_balanced

# orthonormal basis of {x in R^4 : sum x = 0}
_BASIS = np.array(
    [
        [1, -1, 0, 0],
        [1, 1, -2, 0],
        [1, 1, 1, -3],
    ],
    dtype=float,
)
_BASIS /= np.linalg.norm(_BASIS, axis=1, keepdims=True)

INT64_SAFE = 1 << 62


class EmptyLevel(RuntimeError):
    """Deletions removed every child of some parent; the profile is too small."""


class NonPositiveParameter(ValueError):
    pass


class InsufficientSpan(UserWarning):
    pass


def dimension_bound(a, b) -> Fraction:
    """``1 + a/(3b)``; ``a = 0`` gives the trivial bound 1."""
    a, b = Fraction(a), Fraction(b)
    if a < 0 or b <= 0:
        raise NonPositiveParameter("need a >= 0 and b > 0")
    return 1 + a / (3 * b)


def simplex_coords(points: np.ndarray) -> np.ndarray:
    """Map nonnegative vectors in R^4 (last axis) to R^3 after normalizing their coordinate sum to 1."""
    p = np.asarray(points, dtype=float)
    p = p / p.sum(axis=-1, keepdims=True)
    return p @ _BASIS.T


def _int_array(rows) -> np.ndarray:
    arr = np.array(rows, dtype=object)
    if max((abs(int(x)) for x in arr.flat), default=0) < INT64_SAFE:
        return arr.astype(np.int64)
    return arr


def _column_floats(gens: np.ndarray) -> np.ndarray:
    """Float copy of a batch of generator matrices, each column rescaled by a power of two if needed.

    Column directions are all that geometry uses, so per-column scaling is harmless
    and keeps entries far beyond 1e308 finite.
    """
    if gens.dtype != object:
        return gens.astype(float)
    out = np.empty(gens.shape, dtype=float)
    n, d, m = gens.shape
    for c in range(n):
        for j in range(m):
            col = [int(gens[c, i, j]) for i in range(d)]
            sh = max(0, max(abs(x).bit_length() for x in col) - 1000)
            out[c, :, j] = [float(x >> sh) if x >= 0 else -float((-x) >> sh) for x in col]
    return out


def _matmul(P: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Exact batched product; drops to Python ints if int64 could overflow."""
    if P.dtype == np.int64 and X.dtype == np.int64:
        bound = int(np.abs(P).max(initial=0)) * int(np.abs(X).max(initial=0)) * P.shape[-1]
        if bound < INT64_SAFE:
            return P @ X
    return np.matmul(P.astype(object), X.astype(object))


# --- levels and families -------------------------------------------------------


@dataclass
class Level:
    """One level of a nested family. ``parent[i]`` indexes the previous level (-1 at the root)."""

    parent: np.ndarray
    verts: np.ndarray  # (n, m, 3) cell vertices in R^3
    gens: Optional[np.ndarray] = None  # (n, 4, 4) exact generator columns
    labels: Optional[list] = None

    def __post_init__(self):
        self.parent = np.asarray(self.parent, dtype=np.int64)
        self.verts = np.asarray(self.verts, dtype=float)
        self.centers = self.verts.mean(axis=1)
        self.radii = np.linalg.norm(self.verts - self.centers[:, None, :], axis=2).max(axis=1)

    @property
    def n(self) -> int:
        return len(self.parent)

    @classmethod
    def from_gens(cls, gens: np.ndarray, parent, labels=None) -> "Level":
        cols = np.swapaxes(_column_floats(gens), 1, 2)  # (n, 4 columns, 4 coords)
        return cls(parent, simplex_coords(cols), gens, labels)


@dataclass
class DeletionRecord:
    level: int
    label: object
    t12: Fraction
    t34: Fraction
    reason: str


class NestedFamily:
    """Levels ``0..depth``; level 0 is a single root cell."""

    def __init__(self, levels: Sequence[Level], params: Optional[dict] = None,
                 deletions: Optional[list[DeletionRecord]] = None):
        if not levels or levels[0].n != 1:
            raise ValueError("level 0 must hold exactly one root cell")
        self.levels = list(levels)
        self.params = dict(params or {})
        self.deletions = list(deletions or [])
        self._csr: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._mass: dict[int, np.ndarray] = {}

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def children_csr(self, k: int):
        """``(order, start, count)`` so that children of cell ``p`` at level ``k`` are ``order[start[p]:start[p]+count[p]]``."""
        if k not in self._csr:
            par = self.levels[k + 1].parent
            order = np.argsort(par, kind="stable")
            count = np.bincount(par, minlength=self.levels[k].n)
            start = np.concatenate(([0], np.cumsum(count)[:-1]))
            self._csr[k] = (order, start, count)
        return self._csr[k]

    def child_counts(self, k: int) -> np.ndarray:
        return self.children_csr(k)[2]

    def children_of(self, k: int, idx: np.ndarray) -> np.ndarray:
        order, start, count = self.children_csr(k)
        c = count[idx]
        total = int(c.sum())
        if total == 0:
            return np.zeros(0, dtype=np.int64)
        base = np.repeat(start[idx] - np.concatenate(([0], np.cumsum(c)[:-1])), c)
        return order[base + np.arange(total)]

    def float_masses(self, k: int) -> np.ndarray:
        if k not in self._mass:
            if k == 0:
                self._mass[0] = np.ones(1)
            else:
                prev = self.float_masses(k - 1)
                cnt = self.child_counts(k - 1)
                par = self.levels[k].parent
                self._mass[k] = prev[par] / cnt[par]
        return self._mass[k]

    def ancestors(self, k: int, lag: int) -> np.ndarray:
        """Index at level ``k - lag`` of the ancestor of every level-``k`` cell."""
        idx = np.arange(self.levels[k].n)
        for j in range(k, k - lag, -1):
            idx = self.levels[j].parent[idx]
        return idx

    # -- ball-mass interface --
    def root(self):
        L = self.levels[0]
        return _Frontier(0, np.arange(1), L.centers, L.radii, np.ones(1))

    def expand(self, F: "_Frontier") -> "_Frontier":
        idx = self.children_of(F.level, F.idx)
        L = self.levels[F.level + 1]
        return _Frontier(F.level + 1, idx, L.centers[idx], L.radii[idx], self.float_masses(F.level + 1)[idx])

    def at_bottom(self, F: "_Frontier") -> bool:
        return F.level >= self.depth

    def sample_centers(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Half deepest-cell barycenters, half random points inside deepest cells; cells drawn by mass."""
        L = self.levels[-1]
        m = self.float_masses(self.depth)
        cells = rng.choice(L.n, size=n, p=m / m.sum())
        out = L.centers[cells].copy()
        for t in range(n // 2, n):
            w = rng.dirichlet(np.ones(L.verts.shape[1]))
            out[t] = w @ L.verts[cells[t]]
        return out

    def default_radii(self, count: int = 9) -> np.ndarray:
        top = self.levels[1] if self.depth >= 1 else self.levels[0]
        r_max = float(np.median(top.radii)) / 2
        return np.geomspace(r_max / 100, r_max, count)

    # -- persistence --
    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for k, L in enumerate(self.levels):
            if L.gens is None:
                raise ValueError("only families with generator matrices can be saved")
            data = {
                "level": k,
                "parent": L.parent.tolist(),
                "gens": [[[str(int(x)) for x in row] for row in g] for g in L.gens],
                "labels": None if L.labels is None else [str(x) for x in L.labels],
            }
            (directory / f"level-{k:02d}.json").write_text(json.dumps(data))
        (directory / "family.json").write_text(json.dumps({"depth": self.depth, "params": self.params}, default=str))

    @classmethod
    def load(cls, directory) -> "NestedFamily":
        directory = Path(directory)
        meta = json.loads((directory / "family.json").read_text())
        levels = []
        for k in range(meta["depth"] + 1):
            data = json.loads((directory / f"level-{k:02d}.json").read_text())
            gens = _int_array([[[int(x) for x in row] for row in g] for g in data["gens"]])
            levels.append(Level.from_gens(gens, data["parent"], data["labels"]))
        return cls(levels, meta["params"])


@dataclass
class _Frontier:
    level: int
    idx: Optional[np.ndarray]
    centers: np.ndarray
    radii: np.ndarray
    masses: np.ndarray

    def take(self, mask: np.ndarray) -> "_Frontier":
        return _Frontier(self.level, None if self.idx is None else self.idx[mask],
                         self.centers[mask], self.radii[mask], self.masses[mask])


class CubeFamily:
    """Dyadic subcubes of the unit cube in R^3, generated lazily; every cell has 8 children of equal mass."""

    depth = math.inf
    _SIGNS = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)

    def __init__(self, max_level: int = 40):
        self.max_level = max_level

    def root(self):
        return _Frontier(0, None, np.full((1, 3), 0.5), np.array([0.5 * math.sqrt(3)]), np.ones(1))

    def expand(self, F):
        h = 0.5 ** (F.level + 2)  # child half-side
        c = (F.centers[:, None, :] + h * self._SIGNS[None]).reshape(-1, 3)
        n = c.shape[0]
        return _Frontier(F.level + 1, None, c, np.full(n, h * math.sqrt(3)), np.repeat(F.masses / 8, 8))

    def at_bottom(self, F) -> bool:
        return F.level >= self.max_level

    def sample_centers(self, n: int, rng: np.random.Generator) -> np.ndarray:
        # central subcube keeps balls of radius <= 1/4 inside the support
        return rng.uniform(0.25, 0.75, size=(n, 3))

    def default_radii(self, count: int = 9) -> np.ndarray:
        return np.geomspace(0.002, 0.2, count)


def tree_family(branching: Sequence[int]) -> NestedFamily:
    """Synthetic family on the unit segment: every level-``k`` cell splits into ``branching[k]`` equal pieces."""
    levels = [Level([-1], np.array([[[0.0, 0, 0], [1.0, 0, 0]]]))]
    lo, hi, parent = np.array([0.0]), np.array([1.0]), None
    for m in branching:
        n = len(lo)
        step = (hi - lo) / m
        new_lo = (lo[:, None] + step[:, None] * np.arange(m)[None]).ravel()
        new_hi = new_lo + np.repeat(step, m)
        parent = np.repeat(np.arange(n), m)
        verts = np.zeros((len(new_lo), 2, 3))
        verts[:, 0, 0], verts[:, 1, 0] = new_lo, new_hi
        levels.append(Level(parent, verts))
        lo, hi = new_lo, new_hi
    return NestedFamily(levels, {"branching": list(branching)})


# --- Frostman measure ------------------------------------------------------------


@dataclass
class FrostmanMeasure:
    level: int
    masses: tuple[Fraction, ...]

    @property
    def total(self) -> Fraction:
        return sum(self.masses, Fraction(0))


def frostman_measure(family: NestedFamily, k: int) -> FrostmanMeasure:
    """Mass of a level-``k`` cell: product over its ancestors of ``1/(number of children)``."""
    if not 0 <= k <= family.depth:
        raise ValueError(f"level {k} not built")
    masses = [Fraction(1)]
    for j in range(k):
        cnt = family.child_counts(j)
        par = family.levels[j + 1].parent
        masses = [masses[p] / int(cnt[p]) for p in par]
    return FrostmanMeasure(k, tuple(masses))


def mass_defects(family: NestedFamily, k: int) -> list[int]:
    """Level-``k`` cells whose mass differs from the sum of their children's masses (empty when conserved)."""
    mu, nu = frostman_measure(family, k), frostman_measure(family, k + 1)
    sums = [Fraction(0)] * len(mu.masses)
    for i, p in enumerate(family.levels[k + 1].parent):
        sums[p] += nu.masses[i]
    return [i for i, (a, b) in enumerate(zip(mu.masses, sums)) if a != b and family.child_counts(k)[i] > 0]


# --- ball masses -------------------------------------------------------------------


def ball_mass(family, x: np.ndarray, r: float, leaf_ratio: float = 20.0) -> float:
    """Measure of the closed ball ``B(x, r)``.

    Cells inside the ball count fully, cells outside not at all; straddling
    cells are refined until they are ``leaf_ratio`` times smaller than ``r``
    or at the bottom level, then counted by their barycenter.
    """
    x = np.asarray(x, dtype=float)
    total = 0.0
    F = family.root()
    while F.centers.shape[0]:
        d = np.linalg.norm(F.centers - x, axis=1)
        inside = d + F.radii <= r
        total += float(F.masses[inside].sum())
        part = ~inside & (d - F.radii < r)
        F, d = F.take(part), d[part]
        leaf = F.radii <= r / leaf_ratio
        if family.at_bottom(F):
            leaf = np.ones_like(leaf)
        total += float(F.masses[leaf & (d <= r)].sum())
        F = F.take(~leaf)
        if F.centers.shape[0] == 0:
            break
        F = family.expand(F)
    return total


@dataclass
class BallMassFit:
    slope: float
    intercept: float
    residuals: np.ndarray
    radii: np.ndarray
    rows: list  # (r, mass, center id)
    warning: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "rms_residual": float(np.sqrt(np.mean(self.residuals ** 2))) if self.residuals.size else 0.0,
            "radii": self.radii.tolist(),
            "warning": self.warning,
        }

    def csv(self) -> str:
        lines = ["r,mass,center"]
        lines += [f"{r!r},{m!r},{c}" for r, m, c in self.rows]
        return "\n".join(lines) + "\n"


def ball_mass_exponent(family, samples: int = 16, radii: Optional[Sequence[float]] = None,
                       seed: int = 0, leaf_ratio: float = 20.0) -> BallMassFit:
    """Least-squares slope of ``log mu(B(x, r))`` against ``log r`` pooled over seeded centers."""
    rng = np.random.default_rng(seed)
    radii = np.asarray(family.default_radii() if radii is None else radii, dtype=float)
    warning = None
    if radii.max() / radii.min() < 100:
        warning = f"radii span only {math.log10(radii.max() / radii.min()):.2f} decades (< 2)"
        warnings.warn(warning, InsufficientSpan, stacklevel=2)
    centers = family.sample_centers(samples, rng)
    rows, xs, ys = [], [], []
    for cid, x in enumerate(centers):
        for r in radii:
            m = ball_mass(family, x, float(r), leaf_ratio)
            rows.append((float(r), m, cid))
            if m > 0:
                xs.append(math.log10(r))
                ys.append(math.log10(m))
    xs, ys = np.array(xs), np.array(ys)
    slope, intercept = np.polyfit(xs, ys, 1)
    return BallMassFit(float(slope), float(intercept), ys - (slope * xs + intercept), radii, rows, warning)


# --- the S_k construction ---------------------------------------------------------


@dataclass(frozen=True)
class DeletionRule:
    """Trim ``endpoint_trim_count`` children per column group (half at each end) and, from
    ``neighborhood_from_level`` on, children within ``base_neighborhood`` of the parent's two short edges."""

    base_neighborhood: Optional[Fraction] = Fraction(1, 10 ** 5)
    endpoint_trim_count: int = 2
    neighborhood_from_level: int = 5


NO_DELETION = DeletionRule(None, 0)


@dataclass(frozen=True)
class ChildBlock:
    label: tuple
    X: VisitationMatrix  # N1(A_odd, r) N2(A_even, r'), in parent coordinates

    @property
    def positions(self) -> tuple[Fraction, Fraction]:
        """Barycenter position along the parent's C1->C2 and C3->C4 edges, as ``(t12, t34)``."""
        v = self.X.apply((1, 1, 1, 1))
        return Fraction(v[0], v[0] + v[1]), Fraction(v[2], v[2] + v[3])


@dataclass
class SkSource:
    """Admissible child blocks at each level under a range profile.

    ``A`` parameters are enumerated exhaustively while the range's lower end
    is at most ``enumerate_limit``; above that, ``a_samples`` of them are drawn
    with a seeded generator. ``r`` takes the first ``r_choices`` values of its range.
    """

    profile: RangeProfile = MICRO
    D: Fraction = Fraction(10)
    r_choices: int = 1
    enumerate_limit: int = 64
    a_samples: int = 4
    seed: int = 0

    def a_choices(self, i: int) -> list[PositiveSL2]:
        lo, hi = self.profile.i_range(i)
        if lo <= self.enumerate_limit and hi == 2 * lo:
            return [A for A in enumerate_balanced(lo, self.D).matrices if A.ends_with_h1()]
        rng = random.Random(f"{self.seed}:{i}")
        out: list[PositiveSL2] = []
        for _ in range(50 * self.a_samples):
            A = sample_balanced(lo, hi, self.D, rng)
            if A not in out:
                out.append(A)
            if len(out) == self.a_samples:
                break
        return sorted(out)

    def r_values(self, i: int) -> list[int]:
        lo, hi = self.profile.j_range(i)
        return list(range(lo, min(hi, lo + self.r_choices - 1) + 1))

    def child_blocks(self, k: int) -> list[ChildBlock]:
        """Blocks turning a level-``(k-1)`` cell into level-``k`` cells: ``N1(A_{2k+1}, r_{2k+2}) N2(A_{2k+2}, r_{2k+3})``."""
        odd, even = 2 * k + 1, 2 * k + 2
        firsts = [(A, r, n1(A, r)) for A in self.a_choices(odd) for r in self.r_values(even)]
        seconds = [(A, r, n2(A, r)) for A in self.a_choices(even) for r in self.r_values(even + 1)]
        return [ChildBlock(((A1.rows, r1), (A2.rows, r2)), X1 @ X2) for A1, r1, X1 in firsts for A2, r2, X2 in seconds]


def trim_blocks(blocks: Sequence[ChildBlock], trim: int) -> tuple[list[int], list[tuple[int, str]]]:
    """Indices kept after removing the extreme positions along C3C4 first, then along C1C2."""
    pos = [b.positions for b in blocks]
    alive = list(range(len(blocks)))
    removed: list[tuple[int, str]] = []
    for axis, name in ((1, "C34"), (0, "C12")):
        if trim <= 0:
            break
        ranked = sorted(alive, key=lambda i: (pos[i][axis], i))
        low, high = (trim + 1) // 2, trim // 2
        cut = ranked[:low] + (ranked[len(ranked) - high:] if high else [])
        for i in cut:
            removed.append((i, f"extreme along {name}"))
        alive = [i for i in alive if i not in set(cut)]
    return alive, removed


def _near_short_edges(parents: np.ndarray, children: np.ndarray, nb: float) -> np.ndarray:
    """Mask of children with a vertex within angle ``nb`` of either short edge plane of its parent."""
    P = np.swapaxes(_column_floats(parents), 1, 2)
    P /= np.linalg.norm(P, axis=2, keepdims=True)
    C = np.swapaxes(_column_floats(children), 1, 2)
    C /= np.linalg.norm(C, axis=2, keepdims=True)
    bad = np.zeros(len(children), dtype=bool)
    for pair in ((0, 1), (2, 3)):
        Q, _ = np.linalg.qr(np.swapaxes(P[:, list(pair), :], 1, 2))  # (n, 4, 2)
        proj = np.einsum("nvc,nck->nvk", C, Q)
        s2 = 1 - (proj ** 2).sum(axis=2)
        bad |= (s2 < nb * nb).any(axis=1)
    return bad


def build_sk(parent: Level, k: int, source: SkSource, rule: DeletionRule = DeletionRule()) -> tuple[Level, list[DeletionRecord]]:
    """Level ``k`` from level ``k-1``: every admissible child block of every parent, minus deletions."""
    if parent.gens is None:
        raise ValueError("parent level needs generator matrices")
    blocks = source.child_blocks(k)
    keep, removed = trim_blocks(blocks, rule.endpoint_trim_count)
    records = []
    for i, why in removed:
        t12, t34 = blocks[i].positions
        records.append(DeletionRecord(k, blocks[i].label, t12, t34, why))
    if not keep:
        raise EmptyLevel(f"level {k}: deletions removed all {len(blocks)} children")
    X = _int_array([blocks[i].X.rows for i in keep])
    n, b = parent.n, len(keep)
    gens = _matmul(parent.gens[:, None, :, :], X[None, :, :, :]).reshape(n * b, 4, 4)
    par = np.repeat(np.arange(n), b)
    labels = [blocks[i].label for i in keep] * n
    if rule.base_neighborhood is not None and k >= rule.neighborhood_from_level:
        bad = _near_short_edges(parent.gens[par], gens, float(rule.base_neighborhood))
        for j in np.flatnonzero(bad):
            t12, t34 = blocks[keep[j % b]].positions
            records.append(DeletionRecord(k, labels[j], t12, t34, "near a short edge"))
        good = ~bad
        gens, par = gens[good], par[good]
        labels = [lab for lab, g in zip(labels, good) if g]
        if np.any(np.bincount(par, minlength=n) == 0):
            raise EmptyLevel(f"level {k}: the neighborhood rule emptied some parent")
    return Level.from_gens(gens, par, labels), records


def root_level() -> Level:
    return Level.from_gens(_int_array([np.eye(4, dtype=np.int64).tolist()]), [-1])


def build_family(depth: int, source: SkSource = SkSource(), rule: DeletionRule = DeletionRule()) -> NestedFamily:
    levels, dels = [root_level()], []
    for k in range(1, depth + 1):
        L, rec = build_sk(levels[-1], k, source, rule)
        levels.append(L)
        dels += rec
    params = {"profile": source.profile.name, "D": str(source.D), "rule": rule}
    return NestedFamily(levels, params, dels)


# --- conditions ----------------------------------------------------------------------


def fit_leading(ks: Sequence[float], ys: Sequence[float], degree: int) -> tuple[float, str]:
    """Leading coefficient of a degree-``degree`` fit, or of ``y = c + lead * k^degree`` when points are too few."""
    ks, ys = np.asarray(ks, dtype=float), np.asarray(ys, dtype=float)
    if len(ks) > degree:
        return float(np.polyfit(ks, ys, degree)[0]), f"full degree-{degree} least squares"
    if len(ks) >= 2:
        A = np.stack([np.ones_like(ks), ks ** degree], axis=1)
        coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
        return float(coef[1]), f"two-term model c + lead*k^{degree}"
    return float("nan"), "too few points"


def _adjugate_rows(M: Sequence[Sequence[int]]) -> list[list[int]]:
    from .linalg import det

    n = len(M)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[M[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            adj[j][i] = (-1) ** (i + j) * det(minor)
    return adj


def boundary_sin(family: NestedFamily, k: int, lag: int = 2) -> float:
    """Smallest sine of the angle from a vertex of a level-``(k+lag)`` cell to a facet hyperplane of its level-``k`` ancestor.

    With ``y = M_k^{-1} x`` the sine toward facet ``i`` is ``|y_i| / (|row_i(M_k^{-1})| |x|)``
    (``det M_k = +-1``). The integer parts are exact; the quotient is taken in
    log space so huge entries cannot overflow.
    """
    from .linalg import det

    top, low = family.levels[k], family.levels[k + lag]
    anc = family.ancestors(k + lag, lag)
    best = math.inf
    for a in np.unique(anc):
        M = [[int(v) for v in row] for row in top.gens[a]]
        sgn = det(M)
        inv = [[sgn * v for v in row] for row in _adjugate_rows(M)]
        log_row = np.array([0.5 * math.log10(sum(v * v for v in row)) for row in inv])
        G = low.gens[anc == a]
        Y = _matmul(_int_array(inv)[None], G)  # coordinates of descendant columns in the ancestor basis
        if Y.dtype == object:
            logy = np.vectorize(lambda v: math.log10(abs(int(v))) if v else -math.inf, otypes=[float])(Y)
            logx = np.vectorize(lambda v: math.log10(int(v)), otypes=[float])((G * G).sum(axis=1)) / 2
        else:
            with np.errstate(divide="ignore"):
                logy = np.log10(np.abs(Y.astype(float)))
            logx = np.log10(np.linalg.norm(G.astype(float), axis=1))
        s = logy - log_row[None, :, None] - logx[:, None, :]
        best = min(best, float(s.min()))
    return 10.0 ** best if best > -math.inf else 0.0


def _long_sides(L: Level) -> np.ndarray:
    v = L.verts
    diffs = np.linalg.norm(v[:, :, None, :] - v[:, None, :, :], axis=3)
    return diffs.reshape(len(v), -1).max(axis=1)


def _facet_separated(Xa: np.ndarray, Xb_list: np.ndarray) -> np.ndarray:
    """True where some facet of cone ``a`` leaves cone ``b`` weakly on the outside."""
    from .linalg import det

    M = [[int(v) for v in row] for row in Xa]
    adj = _int_array(_adjugate_rows(M))
    sgn = 1 if det(M) > 0 else -1
    Y = _matmul(adj[None], Xb_list) * sgn
    return (Y <= 0).all(axis=2).any(axis=1)


def _cones_overlap(Xa: np.ndarray, Xb: np.ndarray) -> bool:
    """Interior overlap test: maximize t with y, z >= t, Xa y = Xb z, sum y = 1."""
    A = _column_floats(np.asarray(Xa)[None])[0]
    B = _column_floats(np.asarray(Xb)[None])[0]
    A = A / A.sum(axis=0, keepdims=True)
    B = B / B.sum(axis=0, keepdims=True)
    n = A.shape[1]
    c = np.zeros(2 * n + 1)
    c[-1] = -1
    A_eq = np.zeros((5, 2 * n + 1))
    A_eq[:4, :n], A_eq[:4, n:2 * n] = A, -B
    A_eq[4, :n] = 1
    b_eq = np.zeros(5)
    b_eq[4] = 1
    A_ub = np.zeros((2 * n, 2 * n + 1))
    A_ub[:, :2 * n] = -np.eye(2 * n)
    A_ub[:, -1] = 1
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(2 * n), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * (2 * n) + [(0, 1)])
    return bool(res.success and -res.fun > 1e-9)


def overlapping_siblings(family: NestedFamily, k: int, limit: int = 200_000) -> tuple[list[tuple[int, int]], int]:
    """Pairs of level-``k`` siblings whose cones share interior points, and the number of pairs examined."""
    L, P = family.levels[k], family.levels[k - 1]
    if L.gens is None:
        return [], 0
    order, start, count = family.children_csr(k - 1)
    bad, examined = [], 0
    for p in range(P.n):
        kids = order[start[p]:start[p] + count[p]]
        if len(kids) < 2:
            continue
        M = [[int(v) for v in row] for row in P.gens[p]]
        from .linalg import det

        inv = _int_array([[det(M) * v for v in row] for row in _adjugate_rows(M)])
        X = _matmul(inv[None], L.gens[kids])
        for a in range(len(kids)):
            rest = X[a + 1:]
            if not len(rest):
                continue
            sep = _facet_separated(X[a], rest) | np.array([_facet_separated(X[j], X[a][None])[0] for j in range(a + 1, len(kids))])
            for off in np.flatnonzero(~sep):
                b = a + 1 + off
                examined += 1
                if _cones_overlap(X[a], X[b]):
                    bad.append((int(kids[a]), int(kids[b])))
            examined += int(sep.sum())
            if examined >= limit:
                return bad, examined
    return bad, examined


@dataclass
class ConditionReport:
    long_side: list[float]
    c: float
    child_counts: list[int]
    a: float
    a_method: str
    boundary_log10: list[float]
    b: float
    b_method: str
    overlaps: dict = field(default_factory=dict)
    lag: int = 2

    @property
    def bound(self) -> Optional[float]:
        if not (self.b > 0 and self.a >= 0):
            return None
        return 1 + self.a / (3 * self.b)

    def to_json(self) -> dict:
        return {
            "long_side_min_per_level": self.long_side,
            "c": self.c,
            "min_child_counts": self.child_counts,
            "a": self.a,
            "a_fit": self.a_method,
            "boundary_log10_sin": self.boundary_log10,
            "boundary_lag": self.lag,
            "b": self.b,
            "b_fit": self.b_method,
            "dimension_bound": self.bound,
            "overlapping_pairs": {str(k): v for k, v in self.overlaps.items()},
        }


def verify_conditions(family: NestedFamily, lag: int = 2, check_overlaps: bool = True,
                      overlap_limit: int = 20_000) -> ConditionReport:
    """Measure the three hypotheses of the nested-simplex dimension bound.

    (1) the smallest longest side per level and overall ``c``;
    (2) minimum child counts, with ``a`` the leading coefficient of a
    quadratic in ``log10``; (3) boundary clearance ``10^{g(k)}`` between
    levels ``k`` and ``k+lag`` with ``b = -`` leading coefficient of a cubic
    ``g``. Short series fall back to a two-term model (see :func:`fit_leading`).
    """
    long_side = [float(_long_sides(family.levels[k]).min()) for k in range(1, family.depth + 1)]
    counts = [int(family.child_counts(k).min()) for k in range(family.depth)]
    ks = list(range(1, family.depth + 1))
    a, a_method = fit_leading(ks, [math.log10(c) if c > 0 else float("-inf") for c in counts], 2)
    g, gks = [], []
    if family.levels[0].gens is not None:
        for k in range(0, family.depth - lag + 1):
            s = boundary_sin(family, k, lag)
            g.append(math.log10(s) if s > 0 else float("-inf"))
            gks.append(k + 1)
    lead, b_method = fit_leading(gks, g, 3)
    overlaps = {}
    if check_overlaps:
        for k in range(1, family.depth + 1):
            pairs, _ = overlapping_siblings(family, k, overlap_limit)
            overlaps[k] = pairs
    return ConditionReport(long_side, min(long_side) if long_side else float("nan"), counts, a, a_method,
                           g, -lead, b_method, overlaps, lag)
