from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ietnue.linalg import SingularMatrixError, VisitationMatrix, det, mirror, product, solve, tree_product

square4 = st.lists(st.lists(st.integers(-20, 20), min_size=4, max_size=4), min_size=4, max_size=4)


def leibniz(rows):
    from itertools import permutations

    n = len(rows)
    total = 0
    for p in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if p[i] > p[j]:
                    sign = -sign
        term = sign
        for i in range(n):
            term *= rows[i][p[i]]
        total += term
    return total


@given(square4)
def test_bareiss_matches_leibniz(rows):
    assert det(tuple(tuple(r) for r in rows)) == leibniz(rows)


@given(square4, st.lists(st.integers(-9, 9), min_size=4, max_size=4))
def test_solve_is_exact(rows, rhs):
    rows = tuple(tuple(r) for r in rows)
    if leibniz(rows) == 0:
        with pytest.raises(SingularMatrixError):
            solve(rows, rhs)
        return
    x = solve(rows, rhs)
    assert [sum(F(a) * b for a, b in zip(r, x)) for r in rows] == rhs


def test_products_agree_and_json_round_trips():
    M = VisitationMatrix(((1, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1), (0, 1, 0, 0)))
    mats = [M] * 9
    assert product(mats, 4) == tree_product(mats, 4) == M ** 9
    assert VisitationMatrix.from_json(M.to_json()) == M
    assert M.det() in (1, -1)


def test_mirror_reverses_indices():
    M = VisitationMatrix(((1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (5, 0, 0, 1)))
    assert mirror(M)[0, 3] == 5
    assert mirror(mirror(M)) == M
