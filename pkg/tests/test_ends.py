from fractions import Fraction
from itertools import product

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ifsends.affine import AffineMap, IfsSystem, compose
from ifsends.ends import (
    CertificateRefused,
    build_link_graph,
    classify_ends,
    end_components,
    estimate_ends,
    link_dot,
    link_graph_connected,
    one_ended_certificate,
    truncate_ball,
    walk_end,
)
from ifsends.fixtures import fixture, fixtures
from ifsends.semigroup import build_ball, certify_no_idempotents, word_evaluate

F = fixtures()


def cantor(n):
    """n disjoint similitudes of ratio 1/(2n): a free semigroup."""
    r = Fraction(1, 2 * n)
    maps = tuple(AffineMap.from_parts([[r]], [Fraction(2 * i, 2 * n)]) for i in range(n))
    return IfsSystem(1, 0, tuple("abcdefgh"[:n]), maps)


def ends_oracle(ball, k):
    g = nx.Graph()
    alive = [v for v in range(len(ball)) if ball.depths[v] > k]
    g.add_nodes_from(alive)
    for v, _, t in ball.edges:
        if ball.depths[v] > k and ball.depths[t] > k:
            g.add_edge(v, t)
    return sum(1 for c in nx.connected_components(g)
               if any(ball.depths[v] == ball.radius for v in c))


def link_oracle(system, depth):
    """Pairs f < g with f o u == g o v for some u, v of length 1..depth.

    Generators equal to an earlier one are left out: they are merged, not linked.
    """
    reps = [i for i, m in enumerate(system.maps) if m not in system.maps[:i]]
    left = {}
    for n in range(1, depth + 1):
        for u in product(range(len(system)), repeat=n):
            m = word_evaluate(system, u)
            for f in range(len(system)):
                left.setdefault(f, set()).add(compose(system.maps[f], m).key)
    return {(f, g) for f in reps for g in reps if f < g and left[f] & left[g]}


def test_projection_ends():
    ball = build_ball(F["ex14_projections"].system, 8)
    assert estimate_ends(ball, 2) == 2


def test_ex21_ends():
    ball = build_ball(F["ex21"].system, 8)
    assert estimate_ends(ball, 2) == 2


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_free_binary_tree_ends(k):
    # deleting depth <= k leaves one subtree per depth-(k+1) vertex
    assert estimate_ends(build_ball(cantor(2), k + 3), k) == 2 ** (k + 1)


def test_estimate_needs_margin():
    ball = build_ball(cantor(2), 4)
    with pytest.raises(ValueError):
        estimate_ends(ball, 3)


@pytest.mark.parametrize("name", ["koch3", "koch2", "ex14_projections", "ex14_halfconst",
                                  "ex19_abc", "ex19_abd", "ex21", "sierpinski5"])
def test_end_count_matches_networkx(name):
    ball = build_ball(F[name].system, 6)
    for k in range(1, 5):
        assert len(end_components(ball, k)) == ends_oracle(ball, k)


def test_classify_examples():
    const = IfsSystem(1, 0, ("a",), (AffineMap.from_parts([[0]], [1]),))
    assert classify_ends(const, 3, 2).classification == "ZeroEnds"
    assert classify_ends(F["koch2"].system, 5, 3).classification == "GrowingUnbounded"
    assert classify_ends(F["ex14_halfconst"].system, 6, 3).classification == "Exactly(1)"
    est = classify_ends(F["ex14_projections"].system, 5, 3)
    assert est.exactly == 2
    assert est.to_json()["summary"] == "Exactly(2)"


def test_classify_rejects_small_parameters():
    with pytest.raises(ValueError):
        classify_ends(F["koch3"].system, 1, 3)
    with pytest.raises(ValueError):
        classify_ends(F["koch3"].system, 3, 1)


def test_growing_summary_wording():
    est = classify_ends(cantor(2), 4, 2)
    assert est.classification == "GrowingUnbounded"
    assert est.to_json()["summary"] == "unbounded growth observed"
    assert [c for _, _, c in est.samples] == [4, 8, 16, 32]


def test_truncated_ball_equals_fresh_ball():
    s = F["koch3"].system
    big = build_ball(s, 7)
    for N in range(1, 7):
        t, fresh = truncate_ball(big, N), build_ball(s, N)
        assert [m.key for m in t.maps] == [m.key for m in fresh.maps]
        assert t.succ == fresh.succ


def test_koch_link_graph():
    s = F["koch3"].system
    lg = build_link_graph(s, 3)
    assert lg.edge_set() == {(0, 2), (1, 2)}
    ac = next(e for e in lg.edges if (e.f, e.g) == (0, 2))
    assert (ac.u, ac.v) == (s.word("ab"), s.word("a"))
    assert lg.verify()
    assert link_graph_connected(lg)


def test_unlinked_examples():
    lg = build_link_graph(F["ex14_halfconst"].system, 8)
    assert not lg.edges and not link_graph_connected(lg)
    assert not build_link_graph(F["crooked_koch4"].system, 8).edges


def test_sierpinski_link_graph():
    s = F["sierpinski5"].system
    lg = build_link_graph(s, 3)
    want = {tuple(sorted(s.word(p))) for p in ["ad", "db", "be", "ec"]}
    assert want <= lg.edge_set()
    assert link_graph_connected(lg)


def test_carpet_link_graph_connected():
    assert link_graph_connected(build_link_graph(F["carpet10"].system, 3))


def test_single_generator_is_connected():
    assert link_graph_connected(build_link_graph(cantor(1), 2))


def test_duplicate_generators_are_merged():
    m = AffineMap.from_parts([[Fraction(1, 2)]], [0])
    s = IfsSystem(1, 0, ("a", "b"), (m, m))
    lg = build_link_graph(s, 2)
    assert lg.merged == {1: 0}
    assert link_graph_connected(lg)
    assert "style=dotted" in link_dot(lg)


@pytest.mark.parametrize("name,depth", [("koch3", 3), ("koch2", 4), ("sierpinski5", 2),
                                        ("ex21", 3), ("ex19_abd", 3), ("crooked_koch4", 3)])
def test_link_edges_match_brute_force(name, depth):
    s = F[name].system
    lg = build_link_graph(s, depth)
    assert lg.edge_set() == link_oracle(s, depth)
    for e in lg.edges:
        assert compose(s.maps[e.f], word_evaluate(s, e.u)) == compose(s.maps[e.g], word_evaluate(s, e.v))
        assert 1 <= len(e.u) <= depth and 1 <= len(e.v) <= depth


@pytest.mark.parametrize("name", ["koch3", "sierpinski5", "ex19_abc"])
def test_link_edges_grow_with_depth(name):
    s = F[name].system
    prev = set()
    for d in range(1, 5):
        cur = build_link_graph(s, d).edge_set()
        assert prev <= cur
        prev = cur


@pytest.mark.parametrize("name", ["koch3", "sierpinski5", "carpet10"])
def test_certificate_issued(name):
    cert = one_ended_certificate(F[name].system, 6)
    assert cert.no_idempotents.certified_none
    assert cert.depth == 2
    assert len(cert.spanning_tree) == len(F[name].system) - 1


def test_certificate_refusals():
    with pytest.raises(CertificateRefused, match="idempotent 'a b'"):
        one_ended_certificate(F["ex14_projections"].system, 6)
    with pytest.raises(CertificateRefused, match="disconnected up to depth 8") as info:
        one_ended_certificate(F["crooked_koch4"].system, 8)
    assert info.value.partition == [["a"], ["b"], ["c"], ["d"]]


def test_walk_end_separates_the_two_rays():
    s = F["ex14_projections"].system
    ball = build_ball(s, 8)
    ea = walk_end(ball, 2, (0,) * 8)
    eb = walk_end(ball, 2, (1,) * 8)
    assert ea is not None and eb is not None and ea != eb
    assert walk_end(ball, 2, (0, 1, 0, 0, 0, 0, 0, 0)) is None


def test_link_dot_labels():
    text = link_dot(build_link_graph(F["koch3"].system, 3))
    assert '"a" -- "c" [label="a a b = c a"]' in text
    assert text.count(" -- ") == 2


@settings(max_examples=30)
@given(st.integers(2, 4), st.integers(1, 3))
def test_free_ends_are_powers(n, k):
    assert estimate_ends(build_ball(cantor(n), k + 2), k) == n ** (k + 1)


coeff = st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(-1, 2), Fraction(1, 3)])


@st.composite
def small_systems(draw):
    n = draw(st.integers(2, 3))
    maps = []
    for _ in range(n):
        lin = [[draw(coeff) for _ in range(2)] for _ in range(2)]
        tr = [draw(st.sampled_from([Fraction(0), Fraction(1)])) for _ in range(2)]
        maps.append(AffineMap.from_parts(lin, tr))
    try:
        return IfsSystem(2, 0, tuple("abc"[:n]), tuple(maps))
    except ValueError:
        return cantor(n)


@settings(max_examples=40)
@given(small_systems())
def test_random_end_counts_match_networkx(s):
    ball = build_ball(s, 5)
    for k in (1, 2, 3):
        assert len(end_components(ball, k)) == ends_oracle(ball, k)


@settings(max_examples=40)
@given(small_systems())
def test_random_link_graphs_match_brute_force(s):
    assert build_link_graph(s, 2).edge_set() == link_oracle(s, 2)


@pytest.mark.parametrize("name", ["ex14_projections", "ex14_halfconst", "ex21", "koch3"])
def test_exact_counts_are_stable_under_larger_balls(name):
    p = fixture(name).params
    s = F[name].system
    k = p["k_max"]
    margins = (p["margin"], p["margin"] + 1, p["margin"] + 2)
    counts = {estimate_ends(build_ball(s, k + m), k) for m in margins}
    assert len(counts) == 1


@pytest.mark.parametrize("name", sorted(F))
def test_certificate_implies_one_end(name):
    p = fixture(name).params
    s = F[name].system
    try:
        one_ended_certificate(s, p["link_depth"])
    except CertificateRefused:
        return
    assert classify_ends(s, p["k_max"], p["margin"]).classification == "Exactly(1)"


@pytest.mark.parametrize("name", sorted(F))
def test_one_end_without_idempotents_is_linked(name):
    p = fixture(name).params
    s = F[name].system
    if not certify_no_idempotents(s).certified_none:
        return
    if classify_ends(s, p["k_max"], p["margin"]).classification != "Exactly(1)":
        return
    assert any(link_graph_connected(build_link_graph(s, d)) for d in range(1, 9))
