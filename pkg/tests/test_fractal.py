import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ietnue.fractal import (
    NO_DELETION,
    CubeFamily,
    DeletionRule,
    EmptyLevel,
    InsufficientSpan,
    Level,
    NestedFamily,
    NonPositiveParameter,
    SkSource,
    _int_array,
    ball_mass,
    ball_mass_exponent,
    build_family,
    build_sk,
    dimension_bound,
    fit_leading,
    frostman_measure,
    mass_defects,
    overlapping_siblings,
    root_level,
    simplex_coords,
    tree_family,
    trim_blocks,
    verify_conditions,
)
from ietnue.rauzy import RauzyMove, elementary_matrix
from ietnue.iet import Permutation

SOURCE = SkSource()


def test_dimension_bound_examples():
    assert dimension_bound(12, F(8, 3)) == F(5, 2)
    assert dimension_bound(3, 1) == 2
    assert dimension_bound(0, 5) == 1


@given(st.fractions(min_value=0, max_value=100), st.fractions(min_value=F(1, 100), max_value=100),
       st.fractions(min_value=F(1, 100), max_value=100))
def test_dimension_bound_is_scale_free(a, b, t):
    assert dimension_bound(a * t, b * t) == dimension_bound(a, b)


def test_dimension_bound_rejects_bad_parameters():
    with pytest.raises(NonPositiveParameter):
        dimension_bound(-1, 1)
    with pytest.raises(NonPositiveParameter):
        dimension_bound(1, 0)


def test_simplex_coords_are_an_isometric_chart():
    e = np.eye(4)
    p = simplex_coords(e)
    dist = np.linalg.norm(p[:, None] - p[None], axis=2)
    off = dist[~np.eye(4, dtype=bool)]
    assert np.allclose(off, np.sqrt(2))


def test_no_deletion_keeps_every_child():
    blocks = SOURCE.child_blocks(1)
    level, records = build_sk(root_level(), 1, SOURCE, NO_DELETION)
    assert level.n == len(blocks) and records == []


def test_default_rule_removes_four_per_parent():
    raw, _ = build_sk(root_level(), 1, SOURCE, NO_DELETION)
    lvl1, _ = build_sk(root_level(), 1, SOURCE)
    raw2, _ = build_sk(lvl1, 2, SOURCE, NO_DELETION)
    lvl2, recs = build_sk(lvl1, 2, SOURCE)
    assert lvl1.n == raw.n - 4
    assert np.all(np.bincount(lvl2.parent) == np.bincount(raw2.parent) - 4)
    assert len(recs) == 4


def test_trimmed_blocks_are_the_extremes():
    blocks = SOURCE.child_blocks(2)
    keep, removed = trim_blocks(blocks, 2)
    pos = [b.positions for b in blocks]
    c34 = [i for i, why in removed if "C34" in why]
    c12 = [i for i, why in removed if "C12" in why]
    t34 = sorted(p[1] for p in pos)
    assert sorted(pos[i][1] for i in c34) == [t34[0], t34[-1]]
    rest = sorted(pos[i][0] for i in range(len(blocks)) if i not in c34)
    assert sorted(pos[i][0] for i in c12) == [rest[0], rest[-1]]
    assert sorted(keep + [i for i, _ in removed]) == list(range(len(blocks)))


def test_deleted_output_is_a_subset_of_the_raw_enumeration():
    raw, _ = build_sk(root_level(), 1, SOURCE, NO_DELETION)
    kept, _ = build_sk(root_level(), 1, SOURCE)
    raw_set = {tuple(map(int, g.ravel())) for g in raw.gens}
    assert {tuple(map(int, g.ravel())) for g in kept.gens} <= raw_set


def test_aggressive_trim_empties_the_level():
    with pytest.raises(EmptyLevel):
        build_sk(root_level(), 1, SOURCE, DeletionRule(None, 100))


def test_single_chain_masses_are_one():
    fam = tree_family([1, 1, 1])
    assert frostman_measure(fam, 3).masses == (1,)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_uniform_branching_masses(m):
    fam = tree_family([m] * 3)
    mu = frostman_measure(fam, 3)
    assert set(mu.masses) == {F(1, m ** 3)} and mu.total == 1


def test_sk_masses_are_conserved():
    fam = build_family(3, SOURCE)
    for k in range(fam.depth):
        assert mass_defects(fam, k) == []
        assert frostman_measure(fam, k).total == 1
    assert np.isclose(fam.float_masses(3).sum(), 1.0)


def test_micro_family_level_sizes():
    fam = build_family(3, SOURCE, DeletionRule(neighborhood_from_level=1))
    assert [L.n for L in fam.levels] == [1, 6, 126, 55188]


def test_ball_mass_limits():
    cube = CubeFamily()
    assert ball_mass(cube, np.array([0.5, 0.5, 0.5]), 10.0) == pytest.approx(1.0)
    assert ball_mass(cube, np.array([5.0, 5.0, 5.0]), 0.1) == 0.0


def test_cube_slope_is_three():
    fit = ball_mass_exponent(CubeFamily(), samples=16, seed=0)
    assert fit.slope == pytest.approx(3.0, abs=0.2)


def test_atom_slope_is_zero():
    levels = [Level([-1], np.array([[[0.0, 0, 0], [1.0, 0, 0]]]))]
    for k in range(1, 12):
        levels.append(Level([0], np.array([[[0.0, 0, 0], [0.5 ** k, 0, 0]]])))
    fam = NestedFamily(levels)
    radii = np.geomspace(1e-2, 1e-1, 6)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InsufficientSpan)
        fit = ball_mass_exponent(fam, samples=8, radii=radii)
    assert fit.slope == pytest.approx(0.0, abs=0.05)


def test_segment_tree_slope_is_one():
    fit = ball_mass_exponent(tree_family([4] * 6), samples=16)
    assert fit.slope == pytest.approx(1.0, abs=0.1)


def test_narrow_radii_warn():
    with pytest.warns(InsufficientSpan):
        fit = ball_mass_exponent(CubeFamily(), samples=2, radii=[0.1, 0.2])
    assert fit.warning is not None
    assert fit.csv().startswith("r,mass,center")


def test_fit_leading_modes():
    lead, how = fit_leading([1, 2, 3, 4], [2 * k ** 2 + 1 for k in [1, 2, 3, 4]], 2)
    assert lead == pytest.approx(2) and how.startswith("full")
    lead, how = fit_leading([1, 2], [5 - 3 * k ** 3 for k in [1, 2]], 3)
    assert lead == pytest.approx(-3) and how.startswith("two-term")


def two_child_family(X1, X2):
    gens = _int_array([X1.rows, X2.rows])
    return NestedFamily([root_level(), Level.from_gens(gens, [0, 0])])


def test_duplicated_cells_are_reported():
    X = elementary_matrix(Permutation.parse("4321"), RauzyMove.A)
    assert overlapping_siblings(two_child_family(X, X), 1)[0] == [(0, 1)]


def test_rauzy_siblings_are_disjoint():
    p = Permutation.parse("4321")
    fam = two_child_family(elementary_matrix(p, RauzyMove.A), elementary_matrix(p, RauzyMove.B))
    assert overlapping_siblings(fam, 1)[0] == []


def test_conditions_on_the_micro_family():
    fam = build_family(3, SOURCE, DeletionRule(neighborhood_from_level=1))
    rep = verify_conditions(fam, check_overlaps=False)
    assert rep.child_counts == [6, 21, 438]
    assert rep.a > 0 and rep.b > 0
    assert rep.bound == pytest.approx(1 + rep.a / (3 * rep.b))
    assert rep.c > 0
    assert set(rep.to_json()) >= {"a", "b", "c", "dimension_bound"}


def test_save_and_load(tmp_path):
    fam = build_family(2, SOURCE)
    fam.save(tmp_path)
    again = NestedFamily.load(tmp_path)
    assert again.depth == 2
    for A, B in zip(fam.levels, again.levels):
        assert np.array_equal(A.parent, B.parent)
        assert np.array_equal(A.gens, B.gens)
