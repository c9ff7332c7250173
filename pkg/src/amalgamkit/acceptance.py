"""Acceptance suite shared by ``amalgamkit selftest`` and the pytest module.

Each criterion returns ``(passed, detail)``.
"""

from __future__ import annotations

import inspect
import random
from dataclasses import dataclass
from typing import Callable

from . import portraits as P
from .amalgam import NormalForm, Syllable
from .bass_serre import build_ball, cylinder_fix_check, fixator_membership
from .finite_groups import builtin_spec, quotient_amalgam
from .gamma import (
    GAMMA,
    THETA_ONE,
    Tag,
    GammaFactorElement,
    factor_inv,
    factor_mul,
    gamma_prime_generators,
    h_generator,
    relation_instances,
    tag_element,
    theta,
    verify_presentation,
)
from .kernels import (
    ConjugationFailure,
    ConjugationWitness,
    chain_sweep,
    classify_finite_H,
    conjugate_out,
    free_pair_check,
    interior_generation_check,
    k0_truncated,
    k0k1_fixed_point,
    k0k1_relation_check,
    kernel_truncated,
    verify_conjugated_out,
)
from .portraits import Portrait

DEFAULT_SEED = 20240611


# -- random elements -----------------------------------------------------
def random_h(rng: random.Random, max_depth: int = 6) -> Portrait:
    return P.random_portrait(rng, max_depth)


def random_factor_element(rng: random.Random, factor: int, max_depth: int = 4) -> GammaFactorElement:
    return GammaFactorElement(factor, rng.choice(list(Tag)), random_h(rng, max_depth))


def random_normal_form(rng: random.Random, max_syllables: int = 4, max_depth: int = 3) -> NormalForm:
    n = rng.randint(0, max_syllables)
    f = rng.randint(0, 1)
    syl = tuple(Syllable((f + i) % 2, rng.randint(1, 2)) for i in range(n))
    return NormalForm(syl, random_h(rng, max_depth))


def random_factor_word(rng: random.Random, factor: int, max_len: int = 10, max_depth: int = 4) -> list:
    g = tag_element(factor, Tag.A)
    out = []
    for _ in range(rng.randint(1, max_len)):
        if rng.random() < 0.4:
            out.append(g)
        else:
            n = rng.randint(1, max_depth)
            w = tuple(rng.randint(0, 1) for _ in range(n))
            out.append(GammaFactorElement(factor, Tag.EPS, h_generator(w)))
    return out


# -- criteria ------------------------------------------------------------
def presentation_soundness(seed: int = DEFAULT_SEED):
    failures = verify_presentation(5)
    n = sum(1 for _ in relation_instances(5))
    return not failures, f"{n} relation instances, {len(failures)} failures {failures[:3]}"


def group_laws(seed: int = DEFAULT_SEED, n: int = 10_000):
    rng = random.Random(seed)
    bad = []
    E = Portrait.identity()
    for _ in range(n):
        a, b, c = (random_h(rng, 6) for _ in range(3))
        if (a * b) * c != a * (b * c) or a * E != a or E * a != a or a * a.inverse() != E:
            bad.append(("H", a, b, c))
    for factor in (0, 1):
        e = GammaFactorElement(factor, Tag.EPS, E)
        for _ in range(n):
            a, b, c = (random_factor_element(rng, factor) for _ in range(3))
            if (
                factor_mul(factor_mul(a, b), c) != factor_mul(a, factor_mul(b, c))
                or factor_mul(a, e) != a
                or factor_mul(e, a) != a
                or factor_mul(a, factor_inv(a)) != e
            ):
                bad.append((f"G{factor}", a, b, c))
    G = GAMMA
    for _ in range(n):
        a, b, c = (random_normal_form(rng) for _ in range(3))
        if (
            G.mul(G.mul(a, b), c) != G.mul(a, G.mul(b, c))
            or G.mul(a, G.identity) != a
            or G.mul(G.identity, a) != a
            or not G.is_identity(G.mul(a, G.inv(a)))
        ):
            bad.append(("Gamma", a, b, c))
    return not bad, f"{4 * n} triples, {len(bad)} failures"


def coset_tags(seed: int = DEFAULT_SEED, n: int = 10_000):
    rng = random.Random(seed)
    ok = True
    seen = {0: set(), 1: set()}
    for factor in (0, 1):
        e = GammaFactorElement(factor, Tag.EPS, Portrait.identity())
        for _ in range(n):
            word = random_factor_word(rng, factor)
            x = e
            for letter in word:
                x = factor_mul(x, letter)
            nf = GAMMA.normalize((factor, letter) for letter in word)
            seen[factor].add(x.tag)
            expect = (Syllable(factor, x.tag.index),) if x.tag is not Tag.EPS else ()
            if x.tag not in Tag or nf.syllables != expect or nf.tail != x.h:
                ok = False
    ok = ok and all(seen[f] == set(Tag) for f in (0, 1))
    return ok, f"tags realized G0={sorted(t.value for t in seen[0])} G1={sorted(t.value for t in seen[1])}"


CHAIN_EXPECTED = {1: 8192, 2: 2048}


def truncated_chain(seed: int = DEFAULT_SEED, jobs: int = 1):
    ok = True
    detail = []
    B3 = list(P.enumerate_truncation(3))
    for j in (0, 1):
        for k, expected in CHAIN_EXPECTED.items():
            got = set(chain_sweep(3, j, k, jobs))
            factors = [((j,), 1), ((1 - j,), k + 1)]
            oracle = {p for p in B3 if P.in_product_subgroup(p, factors)}
            ok = ok and got == oracle and len(got) == expected
            detail.append(f"j={j} k<={k}: {len(got)}")
    return ok, ", ".join(detail)


def truncated_kernels(seed: int = DEFAULT_SEED, jobs: int = 1):
    rep = k0_truncated(3, 6, jobs)
    expected = {p for p in P.enumerate_truncation(3) if P.in_prefix_subgroup(p, (0,), 1)}
    ker = kernel_truncated(3, 6, jobs)
    ok = rep.member_set() == expected and len(expected) == 128 and not rep.undecided
    ok = ok and ker == {Portrait.identity()}
    return ok, f"|K0 n B3| = {len(rep.members)}, undecided = {len(rep.undecided)}, |ker| = {len(ker)}"


def theta_suite(seed: int = DEFAULT_SEED):
    bad = [name for name, lhs, rhs in relation_instances(4) if theta(lhs) != theta(rhs)]
    gens = list(gamma_prime_generators(2))
    prime_ok = all(theta(w) == THETA_ONE for w in gens)
    values = {theta(p) for p in P.enumerate_truncation(1)}
    ok = not bad and prime_ok and len(values) == 4
    return ok, f"relation breaks {len(bad)}, {len(gens)} generators of ker theta ok={prime_ok}, values={len(values)}"


def finite_classifier(seed: int = DEFAULT_SEED):
    s3 = classify_finite_H(builtin_spec("s3"))
    sl2 = classify_finite_H(builtin_spec("sl2"))
    direct = classify_finite_H(builtin_spec("direct"))
    ok = (
        s3.ker_trivial
        and s3.ck_trivial_at is not None
        and s3.condition_vii_witness is not None
        and s3.k0_trivial
        and s3.all_equivalent
    )
    ok = ok and len(sl2.kernel.ker) == 2 and not sl2.ker_trivial and sl2.ck_trivial_at is None
    ok = ok and sl2.condition_vii_witness is None and sl2.witness_status == "proven-absent"
    ok = ok and sl2.all_equivalent
    spec = builtin_spec("direct")
    ok = ok and direct.kernel.ker == frozenset(range(spec.H.order)) and direct.all_equivalent
    for name in ("s3", "sl2", "direct", "z2z3"):
        sp = builtin_spec(name)
        rep = k0k1_fixed_point(sp)
        q = quotient_amalgam(sp, rep.ker)
        ok = ok and k0k1_fixed_point(q).ker == frozenset({0}) and q.indices() == sp.indices()
        ok = ok and classify_finite_H(sp).fc_equals_ker
    return ok, f"s3 ker={s3.kernel.to_dict()['ker']} sl2 ker order={len(sl2.kernel.ker)} direct ker=H"


def conjugate_out_suite(seed: int = DEFAULT_SEED):
    am = builtin_spec("s3").amalgam()
    F = [am.from_H(h) for h in am.h_elements() if h != 0]
    w = conjugate_out(am, F, 8)
    ok = isinstance(w, ConjugationWitness) and verify_conjugated_out(am, F, w.r)
    fail = conjugate_out(GAMMA, [GAMMA.h((0,))], 6)
    ok = ok and isinstance(fail, ConjugationFailure) and fail.bound == 6
    return ok, f"s3 r = {am.format(w.r) if ok else w}; gamma stuck after {getattr(fail, 'words_tried', '?')} words"


def _vertices_starting(ball, factor: int):
    return [v for v in ball.vertices if v.rep and v.rep[0].factor == factor]


def fixator_pairs(rng: random.Random, n: int):
    """Random (x, prefix) pairs whose outcome is visible inside a radius-4 ball."""
    G = GAMMA
    B2 = list(P.enumerate_truncation(2))
    out = []
    for _ in range(n):
        plen = rng.randint(1, 2)
        f = rng.randint(0, 1)
        prefix = tuple(Syllable((f + i) % 2, rng.randint(1, 2)) for i in range(plen))
        kind = rng.randrange(3)
        if kind == 0:
            x = G.from_H(rng.choice(B2))
        elif kind == 1:
            p = G.transversal_element(prefix)
            x = G.prod(p, G.from_H(rng.choice(B2)), G.inv(p))
        else:
            x = random_normal_form(rng, 2, 2)
        out.append((x, prefix))
    return out


def tree_suite(seed: int = DEFAULT_SEED, n_pairs: int = 1000):
    rng = random.Random(seed)
    G = GAMMA
    ball = build_ball(G, 4)
    ok = len(ball.edges) == len(ball.vertices) - 1
    ok = ok and all(ball.degree(v) == 3 for v in ball.interior())
    for base in (ball.vertices[0], next(v for v in ball.vertices if v.side == 1 and not v.rep)):
        dist = ball.distances_from(base)
        for r in range(1, 5):
            ok = ok and sum(1 for d in dist.values() if d == r) == 3 * 2 ** (r - 1)
    k0 = [p for p in P.enumerate_truncation(2) if P.in_prefix_subgroup(p, (0,), 1) and p]
    s0, s1 = _vertices_starting(ball, 0), _vertices_starting(ball, 1)
    from .bass_serre import act

    for _ in range(20):
        p = rng.choice(k0)
        x = G.from_H(p)
        if any(act(G, x, v) != v for v in s0):
            ok = False
        if not any(act(G, x, v) != v for v in s1 if len(v.rep) <= p.depth + 2):
            ok = False
    disagree = 0
    for x, prefix in fixator_pairs(rng, n_pairs):
        if fixator_membership(G, x, prefix) != cylinder_fix_check(G, x, prefix, ball):
            disagree += 1
    ok = ok and disagree == 0
    return ok, f"|V|={len(ball.vertices)} |E|={len(ball.edges)}, fixator disagreements {disagree}/{n_pairs}"


def structural_identities(seed: int = DEFAULT_SEED):
    gen = all(interior_generation_check(d) for d in range(4))
    rel = k0k1_relation_check(2, 4)
    G = GAMMA
    free = free_pair_check(G, G.word("g0 h:1"), G.word("g1 h:0"), 6)
    return gen and rel and free, f"<K0 u K1> = H: {gen}, K0/K1 relation: {rel}, Z3*Z3 at L=6: {free}"


@dataclass(frozen=True)
class Criterion:
    number: int
    name: str
    run: Callable


CRITERIA = [
    Criterion(1, "presentation soundness", presentation_soundness),
    Criterion(2, "group laws", group_laws),
    Criterion(3, "coset tags", coset_tags),
    Criterion(4, "truncated C-chain at depth 3", truncated_chain),
    Criterion(5, "one-sided kernels at depth 3", truncated_kernels),
    Criterion(6, "theta suite", theta_suite),
    Criterion(7, "finite-H classifier", finite_classifier),
    Criterion(8, "conjugate out", conjugate_out_suite),
    Criterion(9, "Bass-Serre ball", tree_suite),
    Criterion(10, "structural identities", structural_identities),
]


def run_criterion(c: Criterion, seed: int = DEFAULT_SEED, jobs: int = 1):
    if "jobs" in inspect.signature(c.run).parameters:
        return c.run(seed=seed, jobs=jobs)
    return c.run(seed=seed)


def run_all(seed: int = DEFAULT_SEED, jobs: int = 1, only=None, echo=print) -> bool:
    all_ok = True
    for c in CRITERIA:
        if only and c.number not in only:
            continue
        ok, detail = run_criterion(c, seed, jobs)
        all_ok = all_ok and ok
        echo(f"[{'PASS' if ok else 'FAIL'}] {c.number:2d} {c.name}: {detail}")
    return all_ok
