import json
import random

import pytest

from amalgamkit import portraits as P
from amalgamkit.acceptance import fixator_pairs
from amalgamkit.amalgam import Syllable
from amalgamkit.bass_serre import (
    TreeEdge,
    TreeVertex,
    act,
    ball_from_json,
    build_ball,
    cylinder_fix_check,
    dot_counts,
    export_ball,
    fixator_membership,
    fixed_points,
    half_tree,
    interior_witness,
    parse_rep,
    parse_vertex,
    rep_label,
)
from amalgamkit.finite_groups import builtin_spec
from amalgamkit.gamma import GAMMA

G = GAMMA
V0, V1 = TreeVertex(0, ()), TreeVertex(1, ())
A0 = (Syllable(0, 1),)


@pytest.fixture(scope="module")
def ball4():
    return build_ball(G, 4)


def test_ball_sizes():
    b0 = build_ball(G, 0)
    assert b0.vertices == [V0, V1] and b0.edges == [TreeEdge(())]
    b1 = build_ball(G, 1)
    assert (len(b1.vertices), len(b1.edges)) == (6, 5)
    b2 = build_ball(G, 2)
    assert all(b2.degree(v) == 3 for v in b2.interior())


@pytest.mark.parametrize("R", range(5))
def test_tree_property(R):
    b = build_ball(G, R)
    assert len(b.edges) == len(b.vertices) - 1
    assert len(b.distances_from(V0)) == len(b.vertices)  # connected


def test_finite_degrees():
    b = build_ball(builtin_spec("sl2").amalgam(), 3)
    for v in b.interior():
        assert b.degree(v) == (2 if v.side == 0 else 3)


def test_sphere_sizes(ball4):
    dist = ball4.distances_from(V0)
    for r in range(1, 5):
        assert sum(1 for d in dist.values() if d == r) == 3 * 2 ** (r - 1)


def test_radius_limit():
    with pytest.raises(ValueError):
        build_ball(G, 99)


def test_act_examples(ball4):
    for v in ball4.vertices[:20]:
        assert act(G, G.identity, v) == v
    assert act(G, G.g0, V1) == TreeVertex(1, A0)
    for p in P.enumerate_truncation(2):
        for v in (V0, V1):
            assert act(G, G.from_H(p), v) == v


def test_action_is_left_action(ball4, rng):
    words = ["g0", "g1", "h:1", "g0 h:01", "g1 g0 h:1"]
    for _ in range(50):
        x, y = G.word(rng.choice(words)), G.word(rng.choice(words))
        v = rng.choice(ball4.vertices)
        assert act(G, G.mul(x, y), v) == act(G, x, act(G, y, v))


def test_action_preserves_adjacency(ball4):
    inner = build_ball(G, 2)
    x = G.word("g0 h:1 g1")
    for e in inner.edges:
        a, b = e.endpoints()
        ea = act(G, x, e)
        assert set(ea.endpoints()) == {act(G, x, a), act(G, x, b)}


def test_fixed_points(ball4):
    assert fixed_points(G, G.identity, ball4) == set(ball4.vertices)
    fx = fixed_points(G, G.h((0, 1)), ball4)
    assert {v for v in ball4.vertices if v.rep[:1] and v.rep[0].factor == 0} <= fx
    fx = fixed_points(G, G.g0, ball4)
    assert V0 in fx and V1 not in fx


def test_half_tree():
    b1 = build_ball(G, 1)
    e = TreeEdge(())
    toward0 = half_tree(b1, e, V0)
    assert toward0 == {V0, TreeVertex(1, (Syllable(0, 1),)), TreeVertex(1, (Syllable(0, 2),))}
    toward1 = half_tree(b1, e, V1)
    assert toward0 | toward1 == set(b1.vertices) and not toward0 & toward1
    b0 = build_ball(G, 0)
    assert half_tree(b0, e, V1) == {V1}
    with pytest.raises(ValueError):
        half_tree(b1, e, TreeVertex(0, A0))


def test_fixator_examples():
    assert fixator_membership(G, G.h((0, 1)), A0)
    assert not fixator_membership(G, G.h((1,)), A0)
    for prefix in [A0, (Syllable(1, 2), Syllable(0, 1))]:
        assert fixator_membership(G, G.identity, prefix)
    assert not fixator_membership(G, G.h((0,)), ())


def test_cylinder_examples(ball4):
    assert cylinder_fix_check(G, G.identity, (Syllable(1, 1),), ball4)
    assert not cylinder_fix_check(G, G.h((0,)), (Syllable(1, 1),), ball4)
    with pytest.raises(ValueError):
        cylinder_fix_check(G, G.identity, A0 * 4, ball4)


def test_fixator_agreement(ball4):
    rng = random.Random(5)
    for x, prefix in fixator_pairs(rng, 300):
        assert fixator_membership(G, x, prefix) == cylinder_fix_check(G, x, prefix, ball4)


def test_interior_witness():
    assert interior_witness(G, G.h((0,)), 2) == A0
    w = interior_witness(G, G.h((1,)), 2)
    assert w is not None and w[0].factor == 1
    with pytest.raises(ValueError):
        interior_witness(G, G.identity, 2)
    am = builtin_spec("s3").amalgam()
    for h in am.h_elements()[1:]:
        assert interior_witness(am, am.from_H(h), 4) is None
    assert interior_witness(am, am.word("0:(0,1,2)"), 4) is None


def test_rep_labels():
    rep = (Syllable(0, 1), Syllable(1, 2))
    assert rep_label(rep) == "0:1.1:2"
    assert parse_rep("0:1.1:2") == rep and parse_rep("e") == ()
    v = TreeVertex(1, rep[:1])
    assert parse_vertex(v.label()) == v


def test_exports():
    b0 = build_ball(G, 0)
    assert dot_counts(export_ball(b0, "dot")) == (2, 1)
    b1 = build_ball(G, 1)
    dot = export_ball(b1, "dot")
    assert dot_counts(dot) == (6, 5)
    assert dot.startswith("graph {") and '"v:0:e" -- "v:1:e" [label="e"];' in dot
    stmts = [line for line in dot.splitlines() if "--" in line]
    assert stmts == sorted(stmts)
    with pytest.raises(ValueError):
        export_ball(b1, "svg")


@pytest.mark.parametrize("R", [0, 2, 3])
def test_json_round_trip(R):
    b = build_ball(G, R)
    text = export_ball(b, "json")
    assert ball_from_json(text) == b
    assert json.loads(text)["radius"] == R
    assert export_ball(ball_from_json(text), "json") == text
