import random

import pytest

from amalgamkit import portraits as P
from amalgamkit.finite_groups import builtin_spec
from amalgamkit.gamma import GAMMA, h_generator, theta
from amalgamkit.kernels import (
    ConjugationFailure,
    ConjugationWitness,
    c_jk_membership,
    chain_sweep,
    classify_finite_H,
    conjugate_out,
    element_ball,
    exclusion_length,
    free_pair_check,
    interior_generation_check,
    k0_truncated,
    k0k1_fixed_point,
    k0k1_relation_check,
    kernel_truncated,
    parse_predicate,
    powers_partition_ball_check,
    powers_witness_transform,
    verify_conjugated_out,
)
from amalgamkit.portraits import Portrait

E = Portrait.identity()
G = GAMMA
FINITE = ["s3", "sl2", "direct", "z2z3"]


def h(*w):
    return h_generator(w)


# -- C_{j,k} -------------------------------------------------------------
def test_c_jk_examples():
    assert not c_jk_membership(G, h(1), 0, 1)
    assert c_jk_membership(G, h(0, 1, 1), 0, 1)
    for j in (0, 1):
        for k in range(4):
            assert c_jk_membership(G, E, j, k)


def test_exclusion_length_matches_membership():
    for p in P.enumerate_truncation(2):
        ex = exclusion_length(G, p, 0, 4)
        for k in range(1, 5):
            inside = all(c_jk_membership(G, p, 0, i) for i in range(1, k + 1))
            assert inside == (ex is None or ex > k)


def test_chain_sweep_parallel_matches_serial():
    assert chain_sweep(2, 0, 2, jobs=2) == chain_sweep(2, 0, 2, jobs=1)


# -- finite H ------------------------------------------------------------
def test_fixed_point_examples():
    sl2 = k0k1_fixed_point(builtin_spec("sl2"))
    assert len(sl2.K0) == len(sl2.K1) == len(sl2.ker) == 2
    s3 = k0k1_fixed_point(builtin_spec("s3"))
    assert s3.K0 == s3.K1 == s3.ker == frozenset({0})
    assert s3.stabilized_at == 1
    direct = builtin_spec("direct")
    assert k0k1_fixed_point(direct).ker == frozenset(range(direct.H.order))


@pytest.mark.parametrize("name", FINITE)
def test_kernel_report_invariants(name):
    spec = builtin_spec(name)
    rep = k0k1_fixed_point(spec)
    for (a, b), (a2, b2) in zip(rep.chain, rep.chain[1:]):
        assert a2 <= a and b2 <= b
    assert rep.K0 & rep.K1 == rep.ker
    # one more round changes nothing
    again = k0k1_fixed_point(spec)
    assert again.chain[-1] == rep.chain[-1]
    for i in (0, 1):
        G_i, inj = spec.factor(i), spec.injection(i)
        img = {inj.map[x] for x in rep.ker}
        assert all(G_i.conj(g, x) in img for g in range(G_i.order) for x in img)
    if rep.K0 == rep.ker:
        assert rep.K0 == rep.K1


@pytest.mark.parametrize("name", FINITE)
def test_fixed_point_matches_generic_membership(name):
    am = builtin_spec(name).amalgam()
    rep = k0k1_fixed_point(am.spec)
    for k in range(len(rep.chain)):
        A, B = rep.chain[k]
        for x in am.h_elements():
            assert (x in A) == all(c_jk_membership(am, x, 0, i) for i in range(k + 1))
            assert (x in B) == all(c_jk_membership(am, x, 1, i) for i in range(k + 1))


def test_classifier_examples():
    s3 = classify_finite_H(builtin_spec("s3"))
    assert s3.ker_trivial and s3.ck_trivial_at == 1 and s3.witness_status == "found"
    assert s3.all_equivalent
    sl2 = classify_finite_H(builtin_spec("sl2"))
    assert not sl2.ker_trivial and sl2.condition_vii_witness is None
    assert sl2.witness_status == "proven-absent" and sl2.all_equivalent
    z = classify_finite_H(builtin_spec("z2z3"))
    assert z.ker_trivial and z.ck_trivial_at == 0 and z.all_equivalent and z.k0_trivial


@pytest.mark.parametrize("name", FINITE)
def test_classifier_report_json(name):
    rep = classify_finite_H(builtin_spec(name))
    d = rep.to_dict()
    assert d["ker_trivial"] == rep.ker_trivial
    assert d["fc_equals_ker"] is True


def test_classifier_rejects_degenerate():
    from amalgamkit.finite_groups import AmalgamSpec, cyclic

    z2 = cyclic(2)
    with pytest.raises(ValueError):
        classify_finite_H(AmalgamSpec.build(z2, z2, [(0,)], [(0, 1)], [(0, 1)]))


# -- conjugate out -------------------------------------------------------
def test_conjugate_out_outside_H():
    F = [G.g0, G.word("g1 h:0")]
    w = conjugate_out(G, F)
    assert isinstance(w, ConjugationWitness) and G.is_identity(w.r) and not w.pieces


def test_conjugate_out_s3():
    am = builtin_spec("s3").amalgam()
    F = [am.from_H(x) for x in am.h_elements() if x != 0]
    w = conjugate_out(am, F, 8)
    assert isinstance(w, ConjugationWitness)
    assert verify_conjugated_out(am, F, w.r)
    assert am.prod(*w.pieces) == w.r
    for p in w.pieces:
        assert len(p) % 2 == 0 and p.syllables[0].factor == 0
    d = w.to_dict(am)
    assert d["success"] and d["r"] == am.format(w.r)


def test_conjugate_out_gamma_fails():
    out = conjugate_out(G, [G.h((0,))], 6)
    assert isinstance(out, ConjugationFailure)
    assert out.bound == 6 and out.words_tried == 4 + 16 + 64
    assert out.to_dict(G)["success"] is False


def test_conjugate_out_gamma_succeeds_outside_K0():
    # h(1) is not in K0, so an even word moves it out
    w = conjugate_out(G, [G.h((1,))], 4)
    assert isinstance(w, ConjugationWitness) and verify_conjugated_out(G, [G.h((1,))], w.r)


def test_conjugate_out_rejects_identity():
    with pytest.raises(ValueError):
        conjugate_out(G, [G.identity])


# -- Gamma truncations -----------------------------------------------------
def test_k0_truncated_depth2():
    rep = k0_truncated(2, 6)
    assert len(rep.members) == 8 and not rep.undecided
    assert rep.member_set() == {p for p in P.enumerate_truncation(2) if P.in_prefix_subgroup(p, (0,), 1)}
    assert rep.excluded[h(1)] == 1
    assert E in rep.member_set()
    assert rep.to_dict()["members"] == 8


def test_k0_truncated_default_bound():
    rep = k0_truncated(2, None)
    assert len(rep.members) == 8 and not rep.undecided


def test_kernel_truncated():
    assert kernel_truncated(2) == {E}


def test_undecided_when_bound_too_small():
    # with no conjugators at all nothing is excluded and H(1) elements stay undecided
    rep = k0_truncated(1, 0)
    assert set(rep.undecided) == {h(1), h(0) * h(1)}


def test_relation_and_generation():
    assert k0k1_relation_check(1) and k0k1_relation_check(2)
    assert interior_generation_check(0)
    assert interior_generation_check(1) and interior_generation_check(2)


# -- Powers machinery ----------------------------------------------------
def test_witness_transform_examples():
    f = G.h((0, 1))
    assert powers_witness_transform(G, f, [G.g1]) == [G.identity]
    s = powers_witness_transform(G, f, [G.g0, G.g0, G.g0])
    assert s[1] == s[2] == f


def test_witness_transform_random(rng):
    f = G.h((0, 0, 1))
    gs = [G.word(" ".join(rng.choice(["g0", "g1", "h:1", "h:01"]) for _ in range(5))) for _ in range(4)]
    s = powers_witness_transform(G, f, gs, member=lambda x: theta(x) in {(1, 1), theta(f)})
    for g, si in zip(gs[1:], s[1:]):
        c = G.mul(G.inv(gs[0]), g)
        assert G.mul(si, c) == G.mul(c, f)


def test_predicates():
    pred = parse_predicate("starts:0 and not isH")
    assert pred(G.g0) and not pred(G.g1) and not pred(G.identity)
    assert parse_predicate("isE")(G.identity)
    assert not parse_predicate("isE")(G.h((0,)))
    assert parse_predicate("isH")(G.h((0,)))
    assert parse_predicate("(starts:1 or isH) and true")(G.g1)
    assert not parse_predicate("false or (false)")(G.g1)
    assert parse_predicate("not not starts:1")(G.g1)


@pytest.mark.parametrize("bad", ["starts:2", "isH and", "(isH", "isH)", "or isH", ""])
def test_predicate_errors(bad):
    with pytest.raises(ValueError):
        parse_predicate(bad)


def test_partition_examples():
    f = [G.h((0,)), G.g0]
    r = powers_partition_ball_check(G, "isE", "not isE", [G.identity], f, 2)
    assert r.passed and r.ball_size == len(element_ball(G, 2))
    r = powers_partition_ball_check(G, "false", "true", [G.identity], f, 2)
    assert r.partition_ok and r.d_family_ok
    r = powers_partition_ball_check(G, "isH", "not isH", [G.g0, G.g0], f, 2)
    assert not r.e_family_ok
    v = [x for x in r.violations if x["kind"] == "gE"][0]
    assert {"i", "j", "x", "y"} <= set(v)
    r = powers_partition_ball_check(G, "isH", "isH", [G.g0], f, 1)
    assert not r.partition_ok


def test_element_ball_sizes():
    assert len(element_ball(G, 0)) == 4
    assert len(element_ball(G, 1)) == 4 * (1 + 2 + 2)
    am = builtin_spec("s3").amalgam()
    assert len(element_ball(am, 1)) == 2 * 5


def test_free_pair_examples():
    x, y = G.word("g0 h:1"), G.word("g1 h:0")
    assert free_pair_check(G, x, y, 6)
    assert not free_pair_check(G, x, x, 2)
    assert not free_pair_check(G, G.identity, G.identity, 3)
    assert not free_pair_check(G, G.g0, y, 2)  # g0 has order 2
