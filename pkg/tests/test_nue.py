from fractions import Fraction as F

import pytest

from ietnue.iet import DomainError, IntervalExchange
from ietnue.linalg import VisitationMatrix
from ietnue.nue import (
    DegenerateSegment,
    cluster_columns,
    endpoint_divergence,
    fibonacci,
    golden_control,
    limit_segment,
    nue_demo,
    replay,
    witness_iet,
)
from ietnue.paths import MICRO, PAPER, build_chain, l1, l2, n1, sample_mk, u1, u2
from ietnue.rauzy import cylinder, run_length
from ietnue.sl2 import GOLDEN

I4 = VisitationMatrix.identity(4)


@pytest.fixture(scope="module")
def paper_case():
    spec = sample_mk(2, 0, PAPER)
    chain = build_chain(spec)
    seg = limit_segment(chain, base_matrix=spec.blocks()[0].matrix())
    return spec, chain, seg


def positive_loop():
    loop = l1(1) @ u1(1) @ l2(1) @ u2(1)
    P = loop @ loop
    assert all(x > 0 for row in P.rows for x in row)
    return P


def test_perron_powers_form_one_cluster():
    P = positive_loop()
    chain = [P ** k for k in range(1, 13)]
    c = cluster_columns(chain)
    assert c.count == 1
    assert limit_segment(chain).dimension_estimate == 0


def test_identity_chain_keeps_the_whole_simplex():
    assert cluster_columns([I4, I4]).count == 4
    assert limit_segment([I4]).dimension_estimate == 3


def test_single_matrix_uses_absolute_threshold():
    c = cluster_columns(n1(GOLDEN, 1))
    assert c.count == 4 and "sin2 <" in c.rule


def test_paper_chain_has_two_clusters(paper_case):
    _, _, seg = paper_case
    assert seg.cluster_count == 2
    assert seg.clustering.labels == (0, 0, 1, 1)
    assert seg.certified_length_lower_bound == F(1, 50)
    assert seg.certified_length_lower_bound > F(1, 900)


def test_chain_is_nested(paper_case):
    _, chain, _ = paper_case
    for prev, nxt in zip(chain, chain[1:]):
        C = cylinder(prev)
        assert all(C.contains(col) for col in nxt.columns())


def test_midpoint_witness_replays_the_chain(paper_case):
    spec, chain, seg = paper_case
    T = witness_iet(seg, F(1, 2))
    assert T.normalized and T.perm.image == (4, 3, 2, 1)
    rep = replay(T, spec.runs(), chain[-1])
    assert rep.in_cylinder and rep.matched


@pytest.mark.parametrize("mix", [F(1, 10**6), F(1, 3), F(999999, 10**6)])
def test_witnesses_across_the_segment_replay(paper_case, mix):
    spec, chain, seg = paper_case
    assert replay(witness_iet(seg, mix), spec.runs(), chain[-1]).matched


def test_small_profile_chains_collapse_to_one_cluster():
    # micro ranges are too small to hold the two column groups apart
    seg = limit_segment(build_chain(sample_mk(3, 1, MICRO)))
    assert seg.cluster_count == 1


def test_endpoint_mix_is_rejected(paper_case):
    _, _, seg = paper_case
    for mix in (0, 1, F(3, 2)):
        with pytest.raises(DomainError):
            witness_iet(seg, mix)


def test_degenerate_segment_has_no_witness():
    with pytest.raises(DegenerateSegment):
        witness_iet(limit_segment([I4]), F(1, 2))


def test_replay_detects_a_wrong_prefix():
    T = IntervalExchange(tuple(F(x, 10) for x in (4, 3, 2, 1)), "4321")
    assert not replay(T, run_length("B")).matched


def test_same_start_gives_zero_divergence():
    T = golden_control(20)
    rep = nue_demo(T, F(1, 7), F(1, 7), 500)
    assert rep.divergence == 0


@pytest.mark.parametrize("y0", [F(1, 2), F(1, 3), F(5, 7)])
def test_golden_control_orbits_agree_at_large_n(y0):
    T = golden_control()
    assert nue_demo(T, 0, y0, 20000).divergence <= F(1, 1000)


def test_fibonacci():
    assert [fibonacci(n) for n in range(8)] == [0, 1, 1, 2, 3, 5, 8, 13]


def test_endpoint_comparison_reports_both_sides(paper_case):
    _, _, seg = paper_case
    comp = endpoint_divergence(seg, 2000)
    assert comp.witness.steps == comp.control.steps == 2000
    assert comp.expected_divergence > 0
    assert set(comp.to_json()) == {"witness", "control", "expected_divergence", "ratio"}
