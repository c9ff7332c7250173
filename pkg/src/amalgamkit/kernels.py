"""One-sided kernels, their finite-length approximations, and related checks."""

from __future__ import annotations

import itertools
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

from . import portraits as P
from .amalgam import Amalgam, NormalForm
from .finite_groups import AmalgamSpec, FiniteAmalgam
from .gamma import GAMMA, mirror
from .portraits import Portrait, portrait_closure


# -- C_{j,k} membership --------------------------------------------------
def c_jk_membership(am: Amalgam, h, j: int, k: int) -> bool:
    """Is ``h`` in ``gHg^-1`` for every word ``g`` of length k starting in factor j?

    Only transversal words are tried: ``gHg^-1`` depends on ``gH`` alone.
    """
    if k == 0:
        return True
    x = am.from_H(h)
    return all(am.conjugate(x, g).in_H() for g in am.transversal_words(j, k))


def _conj_step(am: Amalgam, h, factor: int, index: int):
    """``T^-1 h T`` for the transversal letter T; its H part, or None if outside H."""
    F = am.factors[factor]
    t = F.transversal(index)
    i, h2 = F.decompose(F.mul(F.inv(t), F.mul(F.embed(h), t)))
    return h2 if i == 0 else None


def exclusion_length(am: Amalgam, h, j: int, max_len: int) -> Optional[int]:
    """Shortest k <= max_len with ``h`` outside ``C_{j,k}``, else None.

    Conjugating letter by letter is exact: once an intermediate conjugate
    leaves H it lies in ``G_i - H`` and every further alternating letter
    lengthens the reduced word, so it never returns to H.
    """
    frontier = [h]
    for k in range(1, max_len + 1):
        f = (j + k - 1) % 2
        nxt = []
        for x in frontier:
            for idx in range(1, am.factors[f].index):
                y = _conj_step(am, x, f, idx)
                if y is None:
                    return k
                nxt.append(y)
        # conjugates reached at this level are enough; duplicates add nothing
        frontier = list(dict.fromkeys(nxt))
    return None


# -- finite H: fixed point -----------------------------------------------
@dataclass
class KernelReport:
    chain: list  # [(A_k, B_k)] as frozensets of H indices
    stabilized_at: int
    K0: frozenset
    K1: frozenset
    ker: frozenset
    labels: Callable = field(default=str, repr=False)

    def ck(self, k: int) -> frozenset:
        a, b = self.chain[min(k, len(self.chain) - 1)]
        return a & b

    def to_dict(self) -> dict:
        lab = lambda s: [self.labels(x) for x in sorted(s)]  # noqa: E731
        return {
            "chain": [{"A": lab(a), "B": lab(b)} for a, b in self.chain],
            "stabilized_at": self.stabilized_at,
            "K0": lab(self.K0),
            "K1": lab(self.K1),
            "ker": lab(self.ker),
            "ker_order": len(self.ker),
        }


def k0k1_fixed_point(spec: AmalgamSpec) -> KernelReport:
    """Iterate ``A_{k+1} = H n (n_s s B_k s^-1)`` and its mirror until both settle."""
    am = FiniteAmalgam(spec) if isinstance(spec, AmalgamSpec) else spec
    spec = am.spec
    Hall = frozenset(range(spec.H.order))
    idx0, idx1 = (F.index for F in am.factors)

    def step(src: frozenset, factor: int, nidx: int) -> frozenset:
        out = set()
        for h in Hall:
            if all(
                (y := _conj_step(am, h, factor, s)) is not None and y in src for s in range(1, nidx)
            ):
                out.add(h)
        return frozenset(out)

    A = B = Hall
    chain = [(A, B)]
    while True:
        A2, B2 = step(B, 0, idx0), step(A, 1, idx1)
        if A2 == A and B2 == B:
            break
        A, B = A2, B2
        chain.append((A, B))
    return KernelReport(chain, len(chain) - 1, A, B, A & B, labels=spec.H.label)


@dataclass
class ClassifierReport:
    ker_trivial: bool
    k0_trivial: bool
    k1_trivial: bool
    ck_trivial_at: Optional[int]
    condition_vii_witness: Optional[NormalForm]
    witness_status: str  # found | proven-absent | search-exhausted
    witness_method: Optional[str]
    fc_equals_ker: bool
    fc: frozenset
    all_equivalent: bool
    kernel: KernelReport
    witness_label: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "ker_trivial": self.ker_trivial,
            "k0_trivial": self.k0_trivial,
            "k1_trivial": self.k1_trivial,
            "ck_trivial_at": self.ck_trivial_at,
            "condition_vii_witness": self.witness_label,
            "witness_status": self.witness_status,
            "witness_method": self.witness_method,
            "fc_equals_ker": self.fc_equals_ker,
            "fc": [self.kernel.labels(x) for x in sorted(self.fc)],
            "all_equivalent": self.all_equivalent,
            "kernel": self.kernel.to_dict(),
        }


def trivial_intersection(am: Amalgam, g: NormalForm) -> bool:
    """``H n gHg^-1 == {e}``."""
    return all(
        not am.conjugate(am.from_H(h), g).in_H() for h in am.h_elements() if h != am.h_identity
    )


def classify_finite_H(spec: AmalgamSpec, search_len: int = 6, conj_len: int = 8) -> ClassifierReport:
    am = FiniteAmalgam(spec)
    if am.nondegenerate() is False:
        raise ValueError("the classifier needs a nondegenerate amalgam")
    rep = k0k1_fixed_point(am)
    ker_trivial = rep.ker == frozenset({0})
    ck_at = next((k for k in range(len(rep.chain)) if rep.ck(k) == frozenset({0})), None)

    witness, method = None, None
    for n in range(search_len + 1):
        starts = (0,) if n == 0 else (0, 1)
        for j in starts:
            for g in am.transversal_words(j, n):
                if trivial_intersection(am, g):
                    witness, method = g, "bfs"
                    break
            if witness is not None:
                break
        if witness is not None:
            break
    if witness is None and ker_trivial:
        F = [am.from_H(h) for h in am.h_elements() if h != 0]
        out = conjugate_out(am, F, conj_len)
        if isinstance(out, ConjugationWitness):
            witness, method = out.r, "conjugate-out"

    if witness is not None:
        status = "found"
    elif not ker_trivial:
        # ker sits inside every H n gHg^-1
        status = "proven-absent"
    else:
        status = "search-exhausted"
    agree = ker_trivial == (ck_at is not None) == (witness is not None)
    agree = agree and (ker_trivial == (not rep.K0 - {0}) == (not rep.K1 - {0}))
    return ClassifierReport(
        ker_trivial=ker_trivial,
        k0_trivial=rep.K0 == frozenset({0}),
        k1_trivial=rep.K1 == frozenset({0}),
        ck_trivial_at=ck_at,
        condition_vii_witness=witness,
        witness_status=status,
        witness_method=method,
        # finite H: every element of ker has its conjugacy class inside H
        fc_equals_ker=True,
        fc=rep.ker,
        all_equivalent=agree,
        kernel=rep,
        witness_label=None if witness is None else am.format(witness),
    )


# -- conjugating elements out of H ---------------------------------------
@dataclass
class ConjugationWitness:
    r: NormalForm
    pieces: list
    trace: list  # (index into F, piece) per extraction

    def to_dict(self, am: Amalgam) -> dict:
        return {
            "success": True,
            "r": am.format(self.r),
            "pieces": [am.format(p) for p in self.pieces],
            "trace": [{"element": i, "piece": am.format(p)} for i, p in self.trace],
        }


@dataclass
class ConjugationFailure:
    stuck: NormalForm
    stuck_index: int
    bound: int
    partial: NormalForm
    words_tried: int

    def to_dict(self, am: Amalgam) -> dict:
        return {
            "success": False,
            "stuck": am.format(self.stuck),
            "stuck_index": self.stuck_index,
            "bound": self.bound,
            "partial_r": am.format(self.partial),
            "words_tried": self.words_tried,
        }


def even_words(am: Amalgam, max_len: int):
    for n in range(2, max_len + 1, 2):
        yield from am.transversal_words(0, n)


def conjugate_out(am: Amalgam, F: Sequence[NormalForm], max_len: int = 8):
    """Find r with ``r^-1 f r`` outside H for every f in F, one element at a time.

    Each step uses an even-length word starting in factor 0.  Elements
    already pushed out stay out; this is checked after every step.
    """
    F = list(F)
    if any(am.is_identity(f) for f in F):
        raise ValueError("the identity cannot be conjugated out of H")
    r = am.identity
    pieces, trace = [], []
    extracted: set = set()
    while True:
        conj = [am.conjugate(f, r) for f in F]
        stuck = [i for i, c in enumerate(conj) if c.in_H()]
        if not stuck:
            return ConjugationWitness(r, pieces, trace)
        i = stuck[0]
        tried, piece = 0, None
        for w in even_words(am, max_len):
            tried += 1
            if not am.conjugate(conj[i], w).in_H():
                piece = w
                break
        if piece is None:
            return ConjugationFailure(F[i], i, max_len, r, tried)
        for e in extracted:
            if am.conjugate(conj[e], piece).in_H():
                raise AssertionError(f"element {e} fell back into H")
        extracted.add(i)
        r = am.mul(r, piece)
        pieces.append(piece)
        trace.append((i, piece))


def verify_conjugated_out(am: Amalgam, F: Sequence[NormalForm], r: NormalForm) -> bool:
    return all(not am.conjugate(f, r).in_H() for f in F)


# -- Gamma truncations ---------------------------------------------------
@dataclass
class TruncatedKernel:
    depth: int
    j: int
    max_len: Optional[int]
    members: list  # survivors of every conjugator up to the bound
    excluded: dict  # Portrait -> shortest excluding conjugator length
    undecided: list  # survivors the exact K_j predicate rejects

    def member_set(self) -> set:
        return set(self.members)

    def to_dict(self) -> dict:
        return {
            "depth": self.depth,
            "j": self.j,
            "max_len": self.max_len,
            "members": len(self.members),
            "excluded": len(self.excluded),
            "undecided": [str(p) for p in self.undecided],
            "exclusion_lengths": _histogram(self.excluded.values()),
        }


def _histogram(values) -> dict:
    out: dict = {}
    for v in values:
        out[str(v)] = out.get(str(v), 0) + 1
    return dict(sorted(out.items(), key=lambda kv: int(kv[0])))


def default_bound(p: Portrait) -> int:
    return 2 * p.depth + 2


def _sweep_chunk(args) -> list:
    d, j, max_len, start, stop = args
    addrs = P.level_addresses(1, d)
    out = []
    for n in range(start, stop):
        p = Portrait(frozenset(a for i, a in enumerate(addrs) if n >> i & 1))
        bound = default_bound(p) if max_len is None else max_len
        out.append((n, exclusion_length(GAMMA, p, j, bound)))
    return out


def _sweep(d: int, j: int, max_len: Optional[int], jobs: int = 1) -> list:
    total = P.truncation_size(d)
    if d > P.MAX_EXHAUSTIVE_DEPTH:
        raise ValueError(f"exhaustive sweeps are limited to depth {P.MAX_EXHAUSTIVE_DEPTH}")
    if jobs <= 1:
        return _sweep_chunk((d, j, max_len, 0, total))
    step = -(-total // (jobs * 4))
    chunks = [(d, j, max_len, s, min(s + step, total)) for s in range(0, total, step)]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        parts = list(ex.map(_sweep_chunk, chunks))
    return [x for part in parts for x in part]


def chain_sweep(d: int, j: int, k: int, jobs: int = 1) -> list:
    """Elements of B_d lying in ``C_{j,1} n ... n C_{j,k}``."""
    elems = list(P.enumerate_truncation(d))
    return [elems[n] for n, ex in _sweep(d, j, k, jobs) if ex is None]


def k_truncated(d: int, j: int = 0, max_len: Optional[int] = 6, jobs: int = 1) -> TruncatedKernel:
    elems = list(P.enumerate_truncation(d))
    members, excluded, undecided = [], {}, []
    for n, ex in _sweep(d, j, max_len, jobs):
        p = elems[n]
        if ex is None:
            members.append(p)
            if not GAMMA.in_one_sided_kernel(p, j):
                undecided.append(p)
        else:
            excluded[p] = ex
    return TruncatedKernel(d, j, max_len, members, excluded, undecided)


def k0_truncated(d: int, max_len: Optional[int] = 6, jobs: int = 1) -> TruncatedKernel:
    if max_len is not None and max_len > 8:
        raise ValueError("max_len is limited to 8")
    return k_truncated(d, 0, max_len, jobs)


def kernel_truncated(d: int, max_len: Optional[int] = 6, jobs: int = 1) -> set:
    k0 = k0_truncated(d, max_len, jobs).member_set()
    return k0 & {mirror(p) for p in k0}


def k0k1_relation_check(d: int, sample_len: int = 4) -> bool:
    """``K0 = H n (n_s s K1 s^-1)`` at truncation, K1 side via full normal forms."""
    if d > 2:
        raise ValueError("relation check is limited to depth 2")
    for h in P.enumerate_truncation(d):
        lhs = exclusion_length(GAMMA, h, 0, sample_len) is None
        rhs = True
        for s in (1, 2):
            y = _conj_step(GAMMA, h, 0, s)
            if y is None or not all(c_jk_membership(GAMMA, y, 1, k) for k in range(1, sample_len)):
                rhs = False
                break
        if lhs != rhs:
            return False
    return True


def interior_generation_check(d: int) -> bool:
    """``<K0 u K1>`` restricted to B_d is all of B_d."""
    whole = set(P.enumerate_truncation(d))
    gens = [p for p in whole if P.in_prefix_subgroup(p, (0,), 1) or P.in_prefix_subgroup(p, (1,), 1)]
    # the closure lives inside B_d, so reaching |B_d| elements settles it
    return portrait_closure(gens, limit=len(whole)) == whole


# -- Powers machinery ----------------------------------------------------
def powers_witness_transform(am: Amalgam, f: NormalForm, gs: Sequence[NormalForm],
                             member: Optional[Callable] = None) -> list:
    """``s_1 = e`` and ``s_i = g_1^-1 g_i f g_i^-1 g_1``."""
    if not gs:
        raise ValueError("need at least one g_i")
    g1inv = am.inv(gs[0])
    out = [am.identity]
    for g in gs[1:]:
        out.append(am.prod(g1inv, g, f, am.inv(g), gs[0]))
    if member is not None:
        bad = [i for i, s in enumerate(out) if not member(s)]
        if bad:
            raise AssertionError(f"s_i outside the normal subgroup for i in {bad}")
    return out


_PRED_TOKEN = re.compile(r"\s*(starts:[01]|isH|isE|true|false|not|and|or|\(|\))")


def parse_predicate(text: str) -> Callable:
    """Compile ``starts:0``, ``starts:1``, ``isH``, ``isE`` with not/and/or."""
    toks, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _PRED_TOKEN.match(text, pos)
        if not m:
            raise ValueError(f"bad predicate at offset {pos}: {text[pos:]!r}")
        toks.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def atom(t):
        if t.startswith("starts:"):
            j = int(t[-1])
            return lambda x: bool(x.syllables) and x.syllables[0].factor == j
        return {
            "isH": lambda x: not x.syllables,
            # identity tails are falsy for both portraits and finite indices
            "isE": lambda x: not x.syllables and not x.tail,
            "true": lambda x: True,
            "false": lambda x: False,
        }[t]

    i = 0

    def peek():
        return toks[i] if i < len(toks) else None

    def take():
        nonlocal i
        i += 1
        return toks[i - 1]

    def expr():
        left = term()
        while peek() == "or":
            take()
            right = term()
            left = (lambda a, b: lambda x: a(x) or b(x))(left, right)
        return left

    def term():
        left = factor()
        while peek() == "and":
            take()
            right = factor()
            left = (lambda a, b: lambda x: a(x) and b(x))(left, right)
        return left

    def factor():
        t = take() if peek() is not None else None
        if t is None:
            raise ValueError("unexpected end of predicate")
        if t == "not":
            inner = factor()
            return lambda x: not inner(x)
        if t == "(":
            e = expr()
            if peek() != ")":
                raise ValueError("unbalanced parentheses")
            take()
            return e
        if t in ("and", "or", ")"):
            raise ValueError(f"unexpected {t!r}")
        return atom(t)

    result = expr()
    if i != len(toks):
        raise ValueError(f"trailing tokens in predicate: {toks[i:]}")
    return result


def element_ball(am: Amalgam, radius: int, tails: Optional[Iterable] = None) -> list:
    """Normal forms with at most ``radius`` syllables and tails from ``tails``."""
    if tails is None:
        tails = am.h_elements()
        if tails is None:
            tails = list(P.enumerate_truncation(1))
    tails = list(tails)
    out = []
    for n in range(radius + 1):
        for j in ((0,) if n == 0 else (0, 1)):
            for w in am.transversal_words(j, n):
                out.extend(NormalForm(w.syllables, t) for t in tails)
    return out


@dataclass
class PartitionReport:
    partition_ok: bool
    d_family_ok: bool
    e_family_ok: bool
    violations: list
    ball_size: int

    @property
    def passed(self) -> bool:
        return self.partition_ok and self.d_family_ok and self.e_family_ok

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "partition_ok": self.partition_ok,
            "fD_disjoint": self.d_family_ok,
            "gE_disjoint": self.e_family_ok,
            "violations": self.violations,
            "ball_size": self.ball_size,
        }


def powers_partition_ball_check(am: Amalgam, D_pred, E_pred, gs: Sequence[NormalForm],
                                F: Sequence[NormalForm], ball_radius: int, tails=None,
                                max_violations: int = 10) -> PartitionReport:
    """Check ``fD n D`` and ``g_i E n g_j E`` on a finite ball of the group.

    Passing says nothing about the global partition.
    """
    if isinstance(D_pred, str):
        D_pred = parse_predicate(D_pred)
    if isinstance(E_pred, str):
        E_pred = parse_predicate(E_pred)
    ball = element_ball(am, ball_radius, tails)
    violations = []
    partition_ok = True
    for x in ball:
        if D_pred(x) == E_pred(x):
            partition_ok = False
            violations.append({"kind": "partition", "element": am.format(x)})
            break
    d_ok = True
    for f in F:
        for x in ball:
            if D_pred(x) and D_pred(am.mul(f, x)):
                d_ok = False
                violations.append({"kind": "fD", "f": am.format(f), "x": am.format(x)})
                break
    e_ok = True
    for (a, ga), (b, gb) in itertools.permutations(enumerate(gs), 2):
        gbinv_ga = am.mul(am.inv(gb), ga)
        for x in ball:
            if not E_pred(x):
                continue
            y = am.mul(gbinv_ga, x)
            # g_a x == g_b y with x, y in E
            if E_pred(y):
                e_ok = False
                violations.append(
                    {"kind": "gE", "i": a + 1, "j": b + 1, "x": am.format(x), "y": am.format(y)}
                )
                break
        if len(violations) >= max_violations:
            break
    return PartitionReport(partition_ok, d_ok, e_ok, violations, len(ball))


def alternating_words(L: int):
    """Exponent patterns for alternating words in <x> and <y>, lengths 1..L."""
    for n in range(1, L + 1):
        for first in (0, 1):
            for exps in itertools.product((1, 2), repeat=n):
                yield first, exps


def free_pair_check(am: Amalgam, x: NormalForm, y: NormalForm, L: int) -> bool:
    """Finite confirmation that ``<x, y>`` is ``Z3 * Z3`` up to syllable length L."""
    pw = {}
    for name, g in (("x", x), ("y", y)):
        g2 = am.mul(g, g)
        if not am.is_identity(am.mul(g2, g)):
            return False
        pw[name] = {1: g, 2: g2}
    for first, exps in alternating_words(L):
        w = am.identity
        for pos, e in enumerate(exps):
            w = am.mul(w, pw["xy"[(first + pos) % 2]][e])
        if am.is_identity(w):
            return False
    return True
