"""The counterexample group ``Gamma = G0 *_H G1``.

H is the group of finitary portraits with no root swap.  ``G0 = <H, g0>``
permutes the three subtrees at ``0``, ``10`` and ``11``: ``g0`` exchanges the
first two rigidly, ``h(1)`` the last two.  Every element of ``G0`` is
``tag * h`` with ``tag`` one of ``e``, ``a = g0`` or ``b = h(1) g0``.  ``G1``
is the mirror image (bits 0 and 1 exchanged, ``g0`` replaced by ``g1``).
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Union

from . import portraits as P
from .amalgam import Amalgam, FactorGroup, NormalForm, Syllable
from .portraits import Portrait

E = Portrait.identity()


def h_generator(w) -> Portrait:
    w = P.as_bitword(w)
    if not w:
        raise ValueError("h() needs a non-empty index word")
    return P.swap_at(w)


H1 = h_generator((1,))
H0 = h_generator((0,))


class Tag(enum.Enum):
    EPS = "e"
    A = "a"
    B = "b"

    @property
    def index(self) -> int:
        return _TAG_INDEX[self]


_TAG_INDEX = {Tag.EPS: 0, Tag.A: 1, Tag.B: 2}
_INDEX_TAG = {v: k for k, v in _TAG_INDEX.items()}


@dataclass(frozen=True)
class GammaFactorElement:
    """``tag * h`` inside ``G0`` (factor 0) or ``G1`` (factor 1)."""

    factor: int
    tag: Tag
    h: Portrait

    def __post_init__(self):
        if not self.h.in_H():
            raise ValueError("H part must fix the first level")


@dataclass(frozen=True)
class DTriple:
    d0: Portrait
    d10: Portrait
    d11: Portrait
    eps: int

    def recompose(self) -> Portrait:
        out = self.d0 * self.d10 * self.d11
        return out * H1 if self.eps else out


def decompose_D(h: Portrait) -> DTriple:
    """Split ``h = d0 * d10 * d11 * h(1)^eps`` along the subtrees 0, 10, 11."""
    if not h.in_H():
        raise ValueError("element is not in H")
    eps = 1 if (1,) in h.swaps else 0
    d = h * H1 if eps else h
    parts = {(0,): set(), (1, 0): set(), (1, 1): set()}
    for u in d.swaps:
        key = u[:1] if u[0] == 0 else u[:2]
        parts[key].add(u)
    return DTriple(
        Portrait(frozenset(parts[(0,)])),
        Portrait(frozenset(parts[(1, 0)])),
        Portrait(frozenset(parts[(1, 1)])),
        eps,
    )


def alpha(d: Union[DTriple, Portrait]) -> Portrait:
    """Conjugation by ``g0`` on the subgroup ``H(0) x H(1,0) x H(1,1)``."""
    if isinstance(d, Portrait):
        d = decompose_D(d)
    if d.eps:
        raise ValueError("alpha is only defined when the h(1) component is trivial")
    return Portrait(
        P.shift_prefix(d.d10, (1, 0), (0,)).swaps
        | P.shift_prefix(d.d0, (0,), (1, 0)).swaps
        | d.d11.swaps
    )


def push(h: Portrait) -> tuple:
    """Rewrite ``h * g0`` as ``tag * h'`` with tag ``a`` or ``b``."""
    d = decompose_D(h)
    if not d.eps:
        return Tag.A, alpha(d)
    # h g0 = d h(1) g0 = h(1) g0 * (g0 (h(1) d h(1)) g0)
    return Tag.B, alpha(P.conjugate(d.recompose() * H1, H1))


# tag-word products: (x, y) -> (tag, h) with x*y == tag * h
#   g0 g0 = e;  g0 . h(1)g0 = h(1)g0 . h(1);  h(1)g0 . g0 = h(1);  h(1)g0 h(1)g0 = g0 h(1)
TAG_TABLE = {
    (Tag.A, Tag.A): (Tag.EPS, E),
    (Tag.A, Tag.B): (Tag.B, H1),
    (Tag.B, Tag.A): (Tag.EPS, H1),
    (Tag.B, Tag.B): (Tag.A, H1),
}


def _tag_product(x: Tag, y: Tag) -> tuple:
    if x is Tag.EPS:
        return y, E
    if y is Tag.EPS:
        return x, E
    return TAG_TABLE[x, y]


def _mul0(x: GammaFactorElement, y: GammaFactorElement) -> GammaFactorElement:
    if y.tag is Tag.EPS:
        return GammaFactorElement(0, x.tag, x.h * y.h)
    z = x.h if y.tag is Tag.A else x.h * H1
    t, h1 = push(z)
    t2, h2 = _tag_product(x.tag, t)
    return GammaFactorElement(0, t2, h2 * h1 * y.h)


def mirror(x):
    """Exchange 0 and 1 in every index and ``g0`` with ``g1``."""
    if isinstance(x, Portrait):
        return P.mirror(x)
    if isinstance(x, GammaFactorElement):
        return GammaFactorElement(1 - x.factor, x.tag, P.mirror(x.h))
    if isinstance(x, NormalForm):
        return NormalForm(
            tuple(Syllable(1 - s.factor, s.index) for s in x.syllables), P.mirror(x.tail)
        )
    if isinstance(x, Token):
        return Token(x.kind if x.kind == "h" else ("g1" if x.kind == "g0" else "g0"),
                     tuple(b ^ 1 for b in x.bits))
    if isinstance(x, (list, tuple)):
        return type(x)(mirror(t) for t in x)
    raise TypeError(f"cannot mirror {type(x).__name__}")


def factor_mul(x: GammaFactorElement, y: GammaFactorElement) -> GammaFactorElement:
    if x.factor != y.factor:
        raise ValueError("elements live in different factors")
    if x.factor == 0:
        return _mul0(x, y)
    return mirror(_mul0(mirror(x), mirror(y)))


def tag_element(factor: int, tag: Tag) -> GammaFactorElement:
    return GammaFactorElement(factor, tag, E)


def factor_inv(x: GammaFactorElement) -> GammaFactorElement:
    hinv = GammaFactorElement(x.factor, Tag.EPS, x.h.inverse())
    if x.tag is Tag.EPS:
        return hinv
    if x.tag is Tag.A:
        tinv = tag_element(x.factor, Tag.A)
    else:
        # (h(1) g0)^-1 = g0 h(1), mirrored in G1
        hh = H1 if x.factor == 0 else H0
        tinv = GammaFactorElement(x.factor, Tag.A, hh)
    return factor_mul(hinv, tinv)


class GammaFactor(FactorGroup):
    index = 3

    def __init__(self, factor: int):
        self.factor = factor

    def mul(self, x, y):
        return factor_mul(x, y)

    def inv(self, x):
        return factor_inv(x)

    def decompose(self, x):
        return x.tag.index, x.h

    def transversal(self, i):
        return tag_element(self.factor, _INDEX_TAG[i])

    def embed(self, h):
        return GammaFactorElement(self.factor, Tag.EPS, h)

    def is_in_H(self, x):
        return x.tag is Tag.EPS


# -- theta ---------------------------------------------------------------
Sign = tuple  # (±1, ±1)
THETA_ONE = (1, 1)
THETA_G0 = (1, -1)
THETA_G1 = (-1, 1)


def theta_mul(x: Sign, y: Sign) -> Sign:
    return (x[0] * y[0], x[1] * y[1])


def theta_h(w) -> Sign:
    w = P.as_bitword(w)
    return (-1, 1) if (len(w) + w[0]) % 2 else (1, -1)


def theta_portrait(p: Portrait) -> Sign:
    out = THETA_ONE
    for w in p.swaps:
        out = theta_mul(out, theta_h(w))
    return out


def theta_tag(factor: int, tag: Tag) -> Sign:
    g = THETA_G0 if factor == 0 else THETA_G1
    if tag is Tag.EPS:
        return THETA_ONE
    if tag is Tag.A:
        return g
    return theta_mul(theta_h((1 - factor,)), g)


def theta(x) -> Sign:
    """The homomorphism onto ``Z2 x Z2`` (written multiplicatively)."""
    if isinstance(x, str):
        x = parse_word(x)
    if isinstance(x, Portrait):
        return theta_portrait(x)
    if isinstance(x, GammaFactorElement):
        return theta_mul(theta_tag(x.factor, x.tag), theta_portrait(x.h))
    if isinstance(x, NormalForm):
        out = theta_portrait(x.tail)
        for s in x.syllables:
            out = theta_mul(out, theta_tag(s.factor, _INDEX_TAG[s.index]))
        return out
    out = THETA_ONE
    for t in x:
        if t.kind == "g0":
            out = theta_mul(out, THETA_G0)
        elif t.kind == "g1":
            out = theta_mul(out, THETA_G1)
        else:
            out = theta_mul(out, theta_h(t.bits))
    return out


def in_gamma_prime(x) -> bool:
    return theta(x) == THETA_ONE


def format_theta(s: Sign) -> str:
    return f"({s[0]},{s[1]})"


# -- generator words -----------------------------------------------------
@dataclass(frozen=True)
class Token:
    kind: str  # "g0", "g1" or "h"
    bits: tuple = ()

    def __str__(self) -> str:
        if self.kind == "h":
            return "h:" + "".join(map(str, self.bits))
        return self.kind


class WordSyntaxError(ValueError):
    def __init__(self, message: str, position: int, token: str):
        super().__init__(f"{message} at token {position} ({token!r})")
        self.position = position
        self.token = token


_TOKEN_RE = re.compile(r"^(g0|g1|h:[01]+)$")


def parse_word(text: str) -> list:
    """Parse ``"g0 h:10 g1"``; ``e`` stands for the empty word."""
    out = []
    for i, tok in enumerate(text.split()):
        if tok == "e":
            continue
        if not _TOKEN_RE.match(tok):
            raise WordSyntaxError("malformed generator", i, tok)
        if tok.startswith("h:"):
            out.append(Token("h", P.as_bitword(tok[2:])))
        else:
            out.append(Token(tok))
    return out


def format_word(tokens: Iterable[Token]) -> str:
    s = " ".join(str(t) for t in tokens)
    return s or "e"


def h_token(w) -> Token:
    return Token("h", P.as_bitword(w))


G0_TOKEN = Token("g0")
G1_TOKEN = Token("g1")


class GammaAmalgam(Amalgam):
    def __init__(self):
        super().__init__(
            (GammaFactor(0), GammaFactor(1)),
            h_mul=P.compose,
            h_inv=P.invert,
            h_identity=E,
            name="gamma",
        )

    def token_letter(self, t: Token) -> tuple:
        if t.kind == "g0":
            return (0, tag_element(0, Tag.A))
        if t.kind == "g1":
            return (1, tag_element(1, Tag.A))
        return (0, GammaFactorElement(0, Tag.EPS, h_generator(t.bits)))

    def word(self, tokens) -> NormalForm:
        if isinstance(tokens, str):
            tokens = parse_word(tokens)
        return self.normalize(self.token_letter(t) for t in tokens)

    def h(self, w) -> NormalForm:
        return self.from_H(h_generator(w))

    @property
    def g0(self) -> NormalForm:
        return NormalForm((Syllable(0, 1),), E)

    @property
    def g1(self) -> NormalForm:
        return NormalForm((Syllable(1, 1),), E)

    def in_one_sided_kernel(self, h, j):
        # K0 = H(0), K1 = H(1)
        return P.in_prefix_subgroup(h, (j,), 1)

    def to_tokens(self, x: NormalForm) -> list:
        """Generator word for ``x``; reparses to the same normal form."""
        out = []
        for s in x.syllables:
            g = G0_TOKEN if s.factor == 0 else G1_TOKEN
            if s.index == 2:
                out.append(h_token((1 - s.factor,)))
            out.append(g)
        out.extend(h_token(w) for w in P.as_generator_product(x.tail))
        return out

    def format(self, x: NormalForm) -> str:
        return format_word(self.to_tokens(x))

    def syllable_label(self, s) -> str:
        return f"{_INDEX_TAG[s.index].value}{s.factor}"

    def format_h(self, h) -> str:
        return str(h)


GAMMA = GammaAmalgam()


# -- defining relations --------------------------------------------------
def _words(lo: int, hi: int):
    return P.level_addresses(lo, hi)


def relation_instances(max_len: int = 5):
    """Defining relations as ``(name, lhs, rhs)`` token lists, index words up to max_len."""
    h = h_token
    g0, g1 = G0_TOKEN, G1_TOKEN
    yield "g0^2", [g0, g0], []
    yield "g1^2", [g1, g1], []
    yield "(g0 h(1))^3", [g0, h((1,))] * 3, []
    yield "(g1 h(0))^3", [g1, h((0,))] * 3, []
    words = _words(1, max_len)
    for w in words:
        yield f"h({_s(w)})^2", [h(w), h(w)], []
    for i in words:
        for j in words:
            if len(j) < len(i):
                continue
            k = len(i)
            if len(j) > k and j[:k] == i:
                rhs = j[:k] + (j[k] ^ 1,) + j[k + 1:]
            else:
                rhs = j
            yield f"h({_s(i)}) h({_s(j)}) h({_s(i)})", [h(i), h(j), h(i)], [h(rhs)]
    for x in _words(0, max_len - 2):
        yield f"g0 h(10{_s(x)}) g0", [g0, h((1, 0) + x), g0], [h((0,) + x)]
        yield f"g0 h(11{_s(x)}) g0", [g0, h((1, 1) + x), g0], [h((1, 1) + x)]
        yield f"g1 h(00{_s(x)}) g1", [g1, h((0, 0) + x), g1], [h((0, 0) + x)]
        yield f"g1 h(01{_s(x)}) g1", [g1, h((0, 1) + x), g1], [h((1,) + x)]


def _s(w) -> str:
    return "".join(map(str, w))


def verify_presentation(max_len: int = 5) -> list:
    """Names of relation instances that fail; empty means every relation holds.

    Each relation is checked through the normal-form engine and, when it
    only involves H, directly in portrait arithmetic.
    """
    failures = []
    for name, lhs, rhs in relation_instances(max_len):
        # every generator is an involution, so the inverse of rhs is its reversal
        if not GAMMA.is_identity(GAMMA.word(lhs + rhs[::-1])):
            failures.append(name)
            continue
        if all(t.kind == "h" for t in lhs + rhs):
            a, b = E, E
            for t in lhs:
                a = a * h_generator(t.bits)
            for t in rhs:
                b = b * h_generator(t.bits)
            if a != b:
                failures.append(name)
    return failures


def gamma_prime_generators(max_k: int = 2):
    """The listed generators of ker(theta), as token words, for k <= max_k."""
    h = h_token
    yield [h((0,)), G1_TOKEN]
    yield [h((1,)), G0_TOKEN]
    for k in range(1, max_k + 1):
        for x in _words(2 * k, 2 * k):
            yield [h((0,)), h((0,) + x)]
            yield [h((1,)), h((1,) + x)]
        for x in _words(2 * k - 1, 2 * k - 1):
            yield [h((0,)), h((1,) + x)]
            yield [h((1,)), h((0,) + x)]


def generating_set_check(d: int) -> bool:
    """``h(0...0)`` and ``h(1,0...0)`` of length <= d generate all of B_d."""
    gens = [h_generator((0,) * n) for n in range(1, d + 1)]
    gens += [h_generator((1,) + (0,) * (n - 1)) for n in range(1, d + 1)]
    return len(P.portrait_closure(gens)) == P.truncation_size(d)


# -- conjugation identities at a truncation ----------------------------
@dataclass
class IdentityResult:
    name: str
    passed: bool
    checked: int
    counterexample: str | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "counterexample": self.counterexample,
        }


def _shift_identity(depth: int, j: int) -> list:
    # g_j H_k(j) g_j = H_{k+1}(1-j, j), one generator at a time
    g = GAMMA.g0 if j == 0 else GAMMA.g1
    out = []
    for k in range(1, depth + 1):
        name = f"g{j} H_{k}({j}) g{j} = H_{k + 1}({1 - j}{j})"
        bad, n = None, 0
        for u in _words(k, depth):
            if u[0] != j:
                continue
            n += 1
            x = GAMMA.conjugate(GAMMA.h(u), g)
            want = (1 - j, j) + u[1:]
            if not (x.in_H() and x.tail == h_generator(want) and P.in_prefix_subgroup(x.tail, want[:2], k + 1)):
                bad = f"h({_s(u)})"
                break
        out.append(IdentityResult(name, bad is None, n, bad))
    return out


def _intersection_identity(depth: int, j: int, conj: NormalForm, label: str) -> IdentityResult:
    factors = [((j,), 1), ((1 - j,), 2)]
    name = f"H n {label} H {label}^-1 = H({j}) H_2({1 - j})"
    n = 0
    for p in P.enumerate_truncation(depth):
        n += 1
        inside = GAMMA.conjugate(GAMMA.from_H(p), conj).in_H()
        if inside != P.in_product_subgroup(p, factors):
            return IdentityResult(name, False, n, str(p))
    return IdentityResult(name, True, n)


def conjugation_identity_suite(depth: int) -> list:
    """Check the displayed identities on every element of B_depth.

    Depth 0 has nothing to check and passes vacuously.
    """
    if depth > P.MAX_EXHAUSTIVE_DEPTH:
        raise ValueError(f"depth must be at most {P.MAX_EXHAUSTIVE_DEPTH}")
    G = GAMMA
    out = []
    for j in (0, 1):
        g = G.g0 if j == 0 else G.g1
        out.extend(_shift_identity(depth, j))
        out.append(_intersection_identity(depth, j, g, f"g{j}"))
        twisted = G.mul(G.h((1 - j,)), g)
        out.append(_intersection_identity(depth, j, twisted, f"h({1 - j})g{j}"))
    return out
