"""Finitary automorphisms of the rooted binary tree, stored as sparse portraits.

A portrait is the set of vertex addresses carrying a swap bit.  Bits are
indexed by the *image* vertex: when a word ``x`` is moved, the bit that flips
letter ``d+1`` is the one stored at the already-moved prefix of length ``d``.
With that convention composition is a symmetric difference::

    bits(p * q) = bits(p) ^ {p(w) : w in bits(q)}

and ``p * q`` acts as ``p(q(x))``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

BitWord = tuple  # tuple[int, ...] over {0, 1}

MAX_EXHAUSTIVE_DEPTH = 3


def as_bitword(w: Sequence[int] | str) -> BitWord:
    """Coerce ``"101"``, ``[1, 0, 1]`` or ``(1, 0, 1)`` to a bit tuple."""
    if isinstance(w, str):
        if any(c not in "01" for c in w):
            raise ValueError(f"not a bit string: {w!r}")
        return tuple(int(c) for c in w)
    t = tuple(int(b) for b in w)
    if any(b not in (0, 1) for b in t):
        raise ValueError(f"not a bit word: {w!r}")
    return t


def address_key(w: BitWord) -> tuple:
    # breadth-first: shorter addresses first, then lexicographic
    return (len(w), w)


def _bitstr(w: BitWord) -> str:
    return "".join(map(str, w))


@dataclass(frozen=True)
class Portrait:
    """Canonical sparse portrait; structural equality is group equality."""

    swaps: frozenset = frozenset()

    # -- construction -----------------------------------------------------
    @classmethod
    def identity(cls) -> "Portrait":
        return _IDENTITY

    @classmethod
    def from_addresses(cls, addresses: Iterable) -> "Portrait":
        seen = set()
        for a in addresses:
            w = as_bitword(a)
            if w in seen:
                raise ValueError(f"duplicate address {_bitstr(w)!r}")
            seen.add(w)
        return cls(frozenset(seen))

    @classmethod
    def parse(cls, text: str) -> "Portrait":
        """Parse the literal format ``"0;101"`` (the stored address set).

        ``"e"`` and the empty string denote the identity; the root address is
        written ``"*"``.
        """
        text = text.strip()
        if text in ("", "e"):
            return _IDENTITY
        parts = []
        for i, tok in enumerate(text.split(";")):
            tok = tok.strip()
            if tok == "*":
                parts.append(())
                continue
            if not tok or any(c not in "01" for c in tok):
                raise ValueError(f"bad address {tok!r} at position {i} in {text!r}")
            parts.append(tok)
        return cls.from_addresses(parts)

    def __str__(self) -> str:
        if not self.swaps:
            return "e"
        return ";".join(_bitstr(w) if w else "*" for w in self.addresses())

    def __repr__(self) -> str:
        return f"Portrait({str(self)!r})"

    # -- inspection -------------------------------------------------------
    def addresses(self) -> list:
        return sorted(self.swaps, key=address_key)

    @property
    def depth(self) -> int:
        return max((len(w) for w in self.swaps), default=0)

    def is_identity(self) -> bool:
        return not self.swaps

    def in_H(self) -> bool:
        return () not in self.swaps

    def __bool__(self) -> bool:
        return bool(self.swaps)

    def __len__(self) -> int:
        return len(self.swaps)

    # -- group law --------------------------------------------------------
    def __mul__(self, other: "Portrait") -> "Portrait":
        return compose(self, other)

    def inverse(self) -> "Portrait":
        return invert(self)

    def __call__(self, w) -> BitWord:
        return apply(self, w)


_IDENTITY = Portrait()


def swap_at(w) -> Portrait:
    """The involution exchanging the two subtrees hanging below ``w``."""
    return Portrait(frozenset((as_bitword(w),)))


def apply(p: Portrait, w) -> BitWord:
    w = as_bitword(w)
    bits = p.swaps
    if not bits:
        return w
    out = []
    for b in w:
        out.append(b ^ 1 if tuple(out) in bits else b)
    return tuple(out)


def apply_inverse(p: Portrait, w) -> BitWord:
    w = as_bitword(w)
    bits = p.swaps
    if not bits:
        return w
    return tuple(b ^ 1 if w[:d] in bits else b for d, b in enumerate(w))


def compose(p: Portrait, q: Portrait) -> Portrait:
    if not q.swaps:
        return p
    if not p.swaps:
        return q
    moved = {apply(p, w) for w in q.swaps}
    return Portrait(p.swaps.symmetric_difference(moved))


def invert(p: Portrait) -> Portrait:
    if not p.swaps:
        return p
    return Portrait(frozenset(apply_inverse(p, w) for w in p.swaps))


def conjugate(p: Portrait, by: Portrait) -> Portrait:
    """``by * p * by^-1``."""
    return compose(compose(by, p), invert(by))


def section(p: Portrait, w) -> Portrait:
    """Restriction of ``p`` to the subtree at ``w``, re-rooted."""
    w = as_bitword(w)
    if apply(p, w) != w:
        raise ValueError(f"{p} moves vertex {_bitstr(w)!r}")
    n = len(w)
    return Portrait(frozenset(u[n:] for u in p.swaps if u[:n] == w))


def shift_prefix(p: Portrait, src, dst) -> Portrait:
    src, dst = as_bitword(src), as_bitword(dst)
    n = len(src)
    out = set()
    for u in p.swaps:
        if u[:n] != src or len(u) < n:
            raise ValueError(f"address {_bitstr(u)!r} lacks prefix {_bitstr(src)!r}")
        out.add(dst + u[n:])
    return Portrait(frozenset(out))


def in_prefix_subgroup(p: Portrait, w, min_depth: int) -> bool:
    """Membership in the subgroup generated by swaps at ``w...`` of length >= min_depth."""
    w = as_bitword(w)
    if min_depth < len(w):
        raise ValueError("min_depth must be at least the prefix length")
    n = len(w)
    return all(u[:n] == w and len(u) >= min_depth for u in p.swaps)


def _comparable(u: BitWord, v: BitWord) -> bool:
    n = min(len(u), len(v))
    return u[:n] == v[:n]


def in_product_subgroup(p: Portrait, factors) -> bool:
    """Membership in a product of support-disjoint prefix subgroups.

    ``factors`` is a list of ``(prefix, min_depth)`` pairs whose prefixes are
    pairwise incomparable.
    """
    fs = [(as_bitword(w), int(m)) for w, m in factors]
    for (u, mu), (v, mv) in itertools.combinations(fs, 2):
        if _comparable(u, v):
            raise ValueError(f"overlapping factors {_bitstr(u)!r} and {_bitstr(v)!r}")
    for w, m in fs:
        if m < len(w):
            raise ValueError("min_depth must be at least the prefix length")
    for u in p.swaps:
        if not any(u[: len(w)] == w and len(u) >= m for w, m in fs):
            return False
    return True


def mirror(p: Portrait) -> Portrait:
    """Exchange the letters 0 and 1 in every address."""
    return Portrait(frozenset(tuple(b ^ 1 for b in u) for u in p.swaps))


def level_addresses(lo: int, hi: int) -> list:
    """All addresses with ``lo <= length <= hi`` in breadth-first order."""
    out = []
    for n in range(lo, hi + 1):
        out.extend(itertools.product((0, 1), repeat=n))
    return out


def truncation_size(d: int) -> int:
    return 2 ** (2 ** (d + 1) - 2)


def enumerate_truncation(d: int) -> Iterator[Portrait]:
    """Every element of H with depth <= d, in binary-counting order.

    Bit ``i`` of the counter switches the ``i``-th address (breadth-first).
    """
    if d < 0:
        raise ValueError("depth must be non-negative")
    if d > MAX_EXHAUSTIVE_DEPTH:
        raise ValueError(f"exhaustive enumeration is limited to depth {MAX_EXHAUSTIVE_DEPTH}")
    addrs = level_addresses(1, d)
    for n in range(2 ** len(addrs)):
        yield Portrait(frozenset(a for i, a in enumerate(addrs) if n >> i & 1))


def portrait_closure(generators: Iterable[Portrait], limit: int | None = None) -> set:
    """Subgroup generated by ``generators`` (finite, so products suffice)."""
    gens = [g for g in dict.fromkeys(generators) if g]
    seen = {Portrait.identity()}
    frontier = [Portrait.identity()]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = x * g
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
                    if limit is not None and len(seen) >= limit:
                        return seen
        frontier = nxt
    return seen


def sorted_product_count(d: int) -> tuple:
    """(number of depth-sorted generator products, number of distinct results) at depth d.

    Every subset of addresses of length 1..d gives one product, deepest first.
    Equal counts mean no two sorted words collapse to the same portrait.
    """
    addrs = level_addresses(1, d)
    if d > MAX_EXHAUSTIVE_DEPTH:
        raise ValueError(f"exhaustive enumeration is limited to depth {MAX_EXHAUSTIVE_DEPTH}")
    seen = set()
    total = 0
    for n in range(2 ** len(addrs)):
        word = sorted((a for i, a in enumerate(addrs) if n >> i & 1), key=lambda w: (-len(w), w))
        x = Portrait.identity()
        for w in word:
            x = x * swap_at(w)
        seen.add(x)
        total += 1
    return total, len(seen)


def acts_trivially(p: Portrait, depth: int | None = None) -> bool:
    """Does ``p`` fix every vertex of length <= depth?

    A swap at an address of length n first moves words of length n + 1, so
    the default looks one level below the deepest swap.
    """
    depth = p.depth + 1 if depth is None else depth
    return all(apply(p, w) == w for w in level_addresses(0, depth))


def as_generator_product(p: Portrait) -> list:
    """Addresses ``w`` with ``p == prod swap_at(w)``, deepest factor leftmost."""
    return sorted(p.swaps, key=lambda w: (-len(w), w))


def random_portrait(rng, max_depth: int, max_swaps: int = 8, in_H: bool = True) -> Portrait:
    lo = 1 if in_H else 0
    k = rng.randint(0, max_swaps)
    addrs = set()
    for _ in range(k):
        n = rng.randint(lo, max_depth)
        addrs.add(tuple(rng.randint(0, 1) for _ in range(n)))
    return Portrait(frozenset(addrs))
