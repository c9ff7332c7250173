"""Enumeration-backed finite permutation groups and finite amalgams.

Permutations are tuples in array form, composed as ``(p*q)(x) = p(q(x))``.
Group elements are referred to by their index in closure-discovery order,
index 0 being the identity.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .amalgam import Amalgam, FactorGroup

DEFAULT_MAX_CLOSURE = 10_000


class ClosureLimitError(RuntimeError):
    pass


def max_closure() -> int:
    return int(os.environ.get("AMALGAM_MAX_CLOSURE", DEFAULT_MAX_CLOSURE))


def perm_mul(p: tuple, q: tuple) -> tuple:
    return tuple(p[i] for i in q)


def perm_inv(p: tuple) -> tuple:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def perm_from_cycles(text: str, degree: int) -> tuple:
    """``"(0,1,2)(3,4)"`` -> array form of the given degree."""
    out = list(range(degree))
    text = text.strip()
    if text in ("", "()", "e"):
        return tuple(out)
    cycles = re.findall(r"\(([^()]*)\)", text)
    if "".join(f"({c})" for c in cycles) != text.replace(" ", ""):
        raise ValueError(f"malformed cycle notation {text!r}")
    used: set = set()
    for c in cycles:
        pts = [int(x) for x in c.replace(" ", ",").split(",") if x]
        if used & set(pts) or len(set(pts)) != len(pts) or any(x >= degree for x in pts):
            raise ValueError(f"cycles must be disjoint and within degree {degree}: {text!r}")
        used.update(pts)
        for a, b in zip(pts, pts[1:] + pts[:1]):
            out[a] = b
    return check_perm(out)


def perm_to_cycles(p: Sequence[int]) -> str:
    seen, out = set(), []
    for i in range(len(p)):
        if i in seen or p[i] == i:
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            cyc.append(j)
            j = p[j]
        out.append("(" + ",".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


def check_perm(p: Sequence[int]) -> tuple:
    t = tuple(int(x) for x in p)
    if sorted(t) != list(range(len(t))):
        raise ValueError(f"not a permutation: {list(p)!r}")
    return t


class FiniteGroup:
    """A permutation group with every element enumerated."""

    def __init__(self, generators: Iterable[Sequence[int]], degree: Optional[int] = None, cap: Optional[int] = None):
        gens = [check_perm(g) for g in generators]
        degrees = {len(g) for g in gens}
        if degree is None:
            degree = degrees.pop() if degrees else 1
            if degrees:
                raise ValueError("generators have different degrees")
        elif degrees - {degree}:
            raise ValueError("generator degree mismatch")
        self.degree = degree
        self.generators = gens
        cap = max_closure() if cap is None else cap
        ident = tuple(range(degree))
        elements = [ident]
        index = {ident: 0}
        # breadth-first closure, right-multiplying by generators
        i = 0
        while i < len(elements):
            x = elements[i]
            for g in gens:
                y = perm_mul(x, g)
                if y not in index:
                    if len(elements) >= cap:
                        raise ClosureLimitError(f"group order exceeds cap {cap}")
                    index[y] = len(elements)
                    elements.append(y)
            i += 1
        self.elements = elements
        self.index = index
        self.gen_indices = [index[g] for g in gens]

    identity = 0

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def mul(self, i: int, j: int) -> int:
        return self.index[perm_mul(self.elements[i], self.elements[j])]

    def inv(self, i: int) -> int:
        return self.index[perm_inv(self.elements[i])]

    def conj(self, g: int, x: int) -> int:
        """``g x g^-1``."""
        return self.mul(self.mul(g, x), self.inv(g))

    def element(self, p: Sequence[int]) -> int:
        return self.index[check_perm(p)]

    def label(self, i: int) -> str:
        return perm_to_cycles(self.elements[i])

    def parse_element(self, text: str) -> int:
        text = text.strip()
        if text.isdigit():
            i = int(text)
            if i >= self.order:
                raise ValueError(f"element index {i} out of range")
            return i
        return self.element(perm_from_cycles(text, self.degree))

    def whole(self) -> "Subgroup":
        return Subgroup(self, frozenset(range(self.order)))

    def trivial(self) -> "Subgroup":
        return Subgroup(self, frozenset({0}))

    def subgroup(self, generators: Iterable[int]) -> "Subgroup":
        gens = list(generators)
        elems = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in elems:
                        elems.add(y)
                        nxt.append(y)
            frontier = nxt
        return Subgroup(self, frozenset(elems), tuple(gens))


def closure_from_generators(generators, degree=None, cap=None) -> FiniteGroup:
    return FiniteGroup(generators, degree=degree, cap=cap)


@dataclass(frozen=True)
class Subgroup:
    group: FiniteGroup = field(compare=False, hash=False)
    elements: frozenset
    generators: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if 0 not in self.elements:
            raise ValueError("subgroup must contain the identity")

    def is_closed(self) -> bool:
        g = self.group
        return all(g.inv(x) in self.elements for x in self.elements) and all(
            g.mul(x, y) in self.elements for x in self.elements for y in self.elements
        )

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self.elements

    def is_trivial(self) -> bool:
        return self.elements == frozenset({0})

    def labels(self) -> list:
        return [self.group.label(x) for x in sorted(self.elements)]

    def is_normal(self) -> bool:
        g = self.group
        return all(g.conj(s, x) in self.elements for s in g.gen_indices or [0] for x in self.elements)


def conjugate_subgroup(g: int, S: Subgroup) -> Subgroup:
    G = S.group
    return Subgroup(G, frozenset(G.conj(g, x) for x in S.elements))


def subgroup_intersection(A: Subgroup, B: Subgroup) -> Subgroup:
    if A.group is not B.group:
        raise ValueError("subgroups of different groups")
    return Subgroup(A.group, A.elements & B.elements)


def normal_core(G: FiniteGroup, H: Subgroup) -> Subgroup:
    core = set(H.elements)
    for g in range(G.order):
        core &= {G.conj(g, x) for x in H.elements}
    return Subgroup(G, frozenset(core))


def coset_transversal(G: FiniteGroup, H: Subgroup) -> tuple:
    """Left-coset representatives (minimal index per coset, identity first).

    Returns ``(reps, decompose)`` where ``decompose(g) == (i, h)`` and
    ``reps[i] * h == g``.
    """
    rep_of = {}
    reps = []
    for g in range(G.order):
        if g in rep_of:
            continue
        i = len(reps)
        reps.append(g)
        for h in H.elements:
            rep_of[G.mul(g, h)] = i

    def decompose(g: int) -> tuple:
        i = rep_of[g]
        return i, G.mul(G.inv(reps[i]), g)

    return reps, decompose


class Injection:
    """An injective homomorphism from ``H`` into ``G`` given on generators."""

    def __init__(self, H: FiniteGroup, G: FiniteGroup, images: Sequence):
        if len(images) != len(H.generators):
            raise ValueError("need one image per generator of H")
        img = [G.element(p) for p in images]
        phi = {0: 0}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for gi, gimg in zip(H.gen_indices, img):
                    y, yimg = H.mul(x, gi), G.mul(phi[x], gimg)
                    if y in phi:
                        if phi[y] != yimg:
                            raise ValueError("generator map does not extend to a homomorphism")
                    else:
                        phi[y] = yimg
                        nxt.append(y)
            frontier = nxt
        if len(set(phi.values())) != len(phi):
            raise ValueError("homomorphism is not injective")
        self.H, self.G = H, G
        self.images = [G.elements[i] for i in img]
        self.map = phi
        self.preimage = {v: k for k, v in phi.items()}
        self.image = Subgroup(G, frozenset(phi.values()))


@dataclass
class AmalgamSpec:
    """``G0 *_H G1`` with H given abstractly and embedded by generator maps."""

    G0: FiniteGroup
    G1: FiniteGroup
    H: FiniteGroup
    embed0: Injection
    embed1: Injection
    name: str = "finite"

    @classmethod
    def build(cls, G0_gens, G1_gens, H_gens, embed0, embed1, name="finite") -> "AmalgamSpec":
        G0, G1, H = FiniteGroup(G0_gens), FiniteGroup(G1_gens), FiniteGroup(H_gens)
        return cls(G0, G1, H, Injection(H, G0, embed0), Injection(H, G1, embed1), name)

    @classmethod
    def from_dict(cls, d: dict) -> "AmalgamSpec":
        def perms(key, degree_key):
            gens = d[key]
            deg = d.get(degree_key)
            out = []
            for g in gens:
                if isinstance(g, str):
                    if deg is None:
                        raise ValueError(f"{degree_key} required for cycle notation")
                    out.append(perm_from_cycles(g, deg))
                else:
                    out.append(check_perm(g))
            return out

        G0 = FiniteGroup(perms("G0", "degree0"), degree=d.get("degree0"))
        G1 = FiniteGroup(perms("G1", "degree1"), degree=d.get("degree1"))
        H = FiniteGroup(perms("H", "degreeH"), degree=d.get("degreeH"))
        e0 = [perm_from_cycles(p, G0.degree) if isinstance(p, str) else p for p in d["embed0"]]
        e1 = [perm_from_cycles(p, G1.degree) if isinstance(p, str) else p for p in d["embed1"]]
        return cls(G0, G1, H, Injection(H, G0, e0), Injection(H, G1, e1), d.get("name", "finite"))

    @classmethod
    def load(cls, path) -> "AmalgamSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "degree0": self.G0.degree,
            "degree1": self.G1.degree,
            "degreeH": self.H.degree,
            "G0": [list(g) for g in self.G0.generators],
            "G1": [list(g) for g in self.G1.generators],
            "H": [list(g) for g in self.H.generators],
            "embed0": [list(p) for p in self.embed0.images],
            "embed1": [list(p) for p in self.embed1.images],
        }

    def indices(self) -> tuple:
        return (self.G0.order // self.H.order, self.G1.order // self.H.order)

    def factor(self, i: int) -> FiniteGroup:
        return self.G0 if i == 0 else self.G1

    def injection(self, i: int) -> Injection:
        return self.embed0 if i == 0 else self.embed1

    def amalgam(self) -> "FiniteAmalgam":
        return FiniteAmalgam(self)


class FiniteFactor(FactorGroup):
    def __init__(self, G: FiniteGroup, inj: Injection):
        self.G = G
        self.inj = inj
        self.reps, self._decompose = coset_transversal(G, inj.image)
        self.index = len(self.reps)

    def mul(self, x, y):
        return self.G.mul(x, y)

    def inv(self, x):
        return self.G.inv(x)

    def decompose(self, x):
        i, h = self._decompose(x)
        return i, self.inj.preimage[h]

    def transversal(self, i):
        return self.reps[i]

    def embed(self, h):
        return self.inj.map[h]

    def label(self, x):
        return self.G.label(x)


class FiniteAmalgam(Amalgam):
    def __init__(self, spec: AmalgamSpec):
        H = spec.H
        super().__init__(
            (FiniteFactor(spec.G0, spec.embed0), FiniteFactor(spec.G1, spec.embed1)),
            h_mul=H.mul,
            h_inv=H.inv,
            h_identity=0,
            name=spec.name,
        )
        self.spec = spec
        self._kernels = None

    def h_elements(self):
        return list(range(self.spec.H.order))

    def in_one_sided_kernel(self, h, j):
        if self._kernels is None:
            from .kernels import k0k1_fixed_point

            rep = k0k1_fixed_point(self.spec)
            self._kernels = (rep.K0, rep.K1)
        return h in self._kernels[j]

    def format_h(self, h) -> str:
        return "e" if h == 0 else f"h:{self.spec.H.label(h)}"

    def syllable_label(self, s) -> str:
        # the transversal permutation, so formatted words reparse
        G = self.spec.factor(s.factor)
        return f"{s.factor}:{G.label(self.factors[s.factor].transversal(s.index))}"

    def parse_letter(self, token: str) -> tuple:
        """``0:<elem>``, ``1:<elem>`` or ``h:<elem>``; elem is an index or cycles."""
        kind, _, body = token.partition(":")
        if kind == "h":
            return (0, self.spec.embed0.map[self.spec.H.parse_element(body)])
        if kind in ("0", "1"):
            f = int(kind)
            return (f, self.spec.factor(f).parse_element(body))
        raise ValueError(f"malformed letter {token!r}")

    def word(self, text: str):
        out = []
        for i, tok in enumerate(text.split()):
            if tok == "e":
                continue
            try:
                out.append(self.parse_letter(tok))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"bad token {i} ({tok!r}): {exc}") from None
        return self.normalize(out)


def quotient_group(G: FiniteGroup, N: frozenset) -> tuple:
    """Permutation group of ``G/N`` acting on cosets, plus the coset map."""
    cosets, coset_of = [], {}
    for g in range(G.order):
        if g in coset_of:
            continue
        c = frozenset(G.mul(g, n) for n in N)
        for x in c:
            coset_of[x] = len(cosets)
        cosets.append(min(c))

    def image(g: int) -> tuple:
        return tuple(coset_of[G.mul(g, rep)] for rep in cosets)

    return image, len(cosets)


def quotient_amalgam(spec: AmalgamSpec, N: Iterable[int]) -> AmalgamSpec:
    """``(G0/N) *_{H/N} (G1/N)`` for N a subgroup of H normal in both factors."""
    N = frozenset(N)
    Hsub = Subgroup(spec.H, N)
    if not all(spec.H.conj(g, n) in N for g in range(spec.H.order) for n in N):
        raise ValueError("N is not normal in H")
    images = []
    for i in (0, 1):
        G, inj = spec.factor(i), spec.injection(i)
        Ni = frozenset(inj.map[n] for n in Hsub.elements)
        if not all(G.conj(g, n) in Ni for g in G.gen_indices for n in Ni):
            raise ValueError(f"N is not normal in factor {i}")
        images.append((G, inj, *quotient_group(G, Ni)))
    hq, hdeg = quotient_group(spec.H, N)
    Hgens = [hq(g) for g in spec.H.gen_indices] or [tuple(range(hdeg))]
    Ggens, embeds = [], []
    for G, inj, q, deg in images:
        Ggens.append([q(g) for g in G.gen_indices] or [tuple(range(deg))])
        if spec.H.gen_indices:
            embeds.append([q(inj.map[g]) for g in spec.H.gen_indices])
        else:
            embeds.append([tuple(range(deg))])
    return AmalgamSpec.build(Ggens[0], Ggens[1], Hgens, embeds[0], embeds[1], name=f"{spec.name}/N")


# -- small named groups --------------------------------------------------
def cyclic(n: int) -> list:
    return [tuple((i + 1) % n for i in range(n))] if n > 1 else [(0,)]


def builtin_spec(name: str) -> AmalgamSpec:
    if name == "s3":
        t, c = (1, 0, 2), (1, 2, 0)
        return AmalgamSpec.build([t, c], [t, c], [(1, 0)], [t], [t], name="s3")
    if name == "sl2":
        # Z4 *_{Z2} Z6
        z4, z6 = cyclic(4)[0], cyclic(6)[0]
        return AmalgamSpec.build(
            [z4], [z6], [(1, 0)], [perm_mul(z4, z4)], [perm_mul(perm_mul(z6, z6), z6)], name="sl2"
        )
    if name == "direct":
        # (Z3 x Z2) *_{Z2} (Z2 x Z2), H the shared Z2 direct factor
        a3 = (1, 2, 0, 3, 4)
        b2 = (0, 1, 2, 4, 3)
        c = (1, 0, 2, 3)
        d = (0, 1, 3, 2)
        return AmalgamSpec.build([a3, b2], [c, d], [(1, 0)], [b2], [d], name="direct")
    if name == "z2z3":
        return AmalgamSpec.build(cyclic(2), cyclic(3), [(0,)], [(0, 1)], [(0, 1, 2)], name="z2z3")
    raise KeyError(f"unknown builtin group {name!r}")


BUILTIN_FINITE = ("s3", "sl2", "direct", "z2z3")
