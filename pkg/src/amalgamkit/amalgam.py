"""Normal forms in a free product with amalgamation ``G0 *_H G1``.

The engine only needs exact arithmetic in each factor plus a left-coset
decomposition relative to the amalgamated subgroup; see :class:`FactorGroup`.
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, NamedTuple, Optional, Sequence


class FactorGroup(ABC):
    """Capabilities a factor group must expose to the normal-form engine.

    ``decompose(g)`` returns ``(i, h)`` with ``transversal(i) * embed(h) == g``;
    index 0 is reserved for the coset ``H`` itself and ``transversal(0)`` is
    the identity.
    """

    #: ``[G_i : H]`` or ``None`` when unknown / infinite
    index: Optional[int] = None

    @abstractmethod
    def mul(self, x, y): ...

    @abstractmethod
    def inv(self, x): ...

    @abstractmethod
    def decompose(self, x) -> tuple: ...

    @abstractmethod
    def transversal(self, i: int): ...

    @abstractmethod
    def embed(self, h): ...

    def eq(self, x, y) -> bool:
        return x == y

    def is_in_H(self, x) -> bool:
        return self.decompose(x)[0] == 0

    def label(self, x) -> str:
        return str(x)


class Syllable(NamedTuple):
    factor: int
    index: int


@dataclass(frozen=True)
class NormalForm:
    """``s_1 s_2 ... s_n h`` with alternating transversal syllables and an H tail."""

    syllables: tuple
    tail: Any

    def __len__(self) -> int:
        return len(self.syllables)

    def in_H(self) -> bool:
        return not self.syllables


class Amalgam:
    """A free product of two factor groups amalgamated over a common subgroup.

    Parameters
    ----------
    factors
        The two :class:`FactorGroup` backends.
    h_mul, h_inv, h_identity
        Arithmetic in the amalgamated subgroup itself.
    name
        Used in reports.
    """

    def __init__(self, factors: Sequence[FactorGroup], h_mul, h_inv, h_identity, name: str = "amalgam"):
        if len(factors) != 2:
            raise ValueError("an amalgam has exactly two factors")
        self.factors = tuple(factors)
        self.h_mul = h_mul
        self.h_inv = h_inv
        self.h_identity = h_identity
        self.name = name

    # -- basic elements ---------------------------------------------------
    @property
    def identity(self) -> NormalForm:
        return NormalForm((), self.h_identity)

    def from_H(self, h) -> NormalForm:
        return NormalForm((), h)

    def is_identity(self, x: NormalForm) -> bool:
        return not x.syllables and x.tail == self.h_identity

    def letter(self, factor: int, element) -> tuple:
        return (factor, element)

    def letters(self, x: NormalForm) -> list:
        """Factor letters whose product is ``x`` (tail folded into factor 0)."""
        out = [(s.factor, self.factors[s.factor].transversal(s.index)) for s in x.syllables]
        if x.tail != self.h_identity:
            out.append((0, self.factors[0].embed(x.tail)))
        return out

    # -- normalization ----------------------------------------------------
    def _push(self, h, syllables: Sequence[Syllable]) -> tuple:
        # carry h rightwards through the syllables without changing their number
        out = []
        for s in syllables:
            F = self.factors[s.factor]
            j, h = F.decompose(F.mul(F.embed(h), F.transversal(s.index)))
            if j == 0:
                raise ArithmeticError("factor decomposition collapsed a nontrivial coset")
            out.append(Syllable(s.factor, j))
        return out, h

    def _absorb(self, letter, syllables: list, tail) -> tuple:
        f, x = letter
        F = self.factors[f]
        if syllables and syllables[0].factor == f:
            j, h = F.decompose(F.mul(x, F.transversal(syllables[0].index)))
            rest, h = self._push(h, syllables[1:])
        else:
            j, h = F.decompose(x)
            rest, h = self._push(h, syllables)
        tail = self.h_mul(h, tail)
        if j:
            rest.insert(0, Syllable(f, j))
        return rest, tail

    def _absorb_all(self, letters: Sequence, syllables: list, tail) -> NormalForm:
        for letter in reversed(list(letters)):
            syllables, tail = self._absorb(letter, syllables, tail)
        return NormalForm(tuple(syllables), tail)

    def normalize(self, word: Iterable) -> NormalForm:
        """Normal form of a product of factor letters ``(factor, element)``."""
        return self._absorb_all(list(word), [], self.h_identity)

    def mul(self, x: NormalForm, y: NormalForm) -> NormalForm:
        return self._absorb_all(self.letters(x), list(y.syllables), y.tail)

    def prod(self, *xs: NormalForm) -> NormalForm:
        out = self.identity
        for x in reversed(xs):
            out = self.mul(x, out)
        return out

    def inv(self, x: NormalForm) -> NormalForm:
        word = []
        if x.tail != self.h_identity:
            word.append((0, self.factors[0].embed(self.h_inv(x.tail))))
        for s in reversed(x.syllables):
            F = self.factors[s.factor]
            word.append((s.factor, F.inv(F.transversal(s.index))))
        return self.normalize(word)

    def conjugate(self, x: NormalForm, g: NormalForm) -> NormalForm:
        """``g^-1 x g``."""
        return self.prod(self.inv(g), x, g)

    def transversal_element(self, syllables: Sequence) -> NormalForm:
        return NormalForm(tuple(Syllable(*s) for s in syllables), self.h_identity)

    # -- structure --------------------------------------------------------
    def cycle(self, h, letter) -> tuple:
        """Return ``g'`` with ``g h == h g'`` for a letter ``g`` outside H."""
        f, g = letter
        F = self.factors[f]
        if F.is_in_H(g):
            raise ValueError("cycling needs a letter outside the amalgamated subgroup")
        e = F.embed(h)
        return (f, F.mul(F.mul(F.inv(e), g), e))

    def word_type(self, x: NormalForm) -> tuple:
        if not x.syllables:
            return (None, 0)
        return (x.syllables[0].factor, len(x.syllables))

    def transversal_words(self, j: int, k: int) -> Iterator[NormalForm]:
        """Transversal words of length ``k`` whose first syllable lies in factor ``j``.

        Conjugates ``gHg^-1`` only depend on the coset ``gH``, so these words
        stand in for all of ``T_{j,k}``.
        """
        ranges = []
        for pos in range(k):
            idx = self.factors[(j + pos) % 2].index
            if idx is None:
                raise ValueError("transversal enumeration needs finite indices")
            ranges.append(range(1, idx))
        for combo in itertools.product(*ranges):
            yield NormalForm(
                tuple(Syllable((j + pos) % 2, i) for pos, i in enumerate(combo)), self.h_identity
            )

    def count_transversal_words(self, j: int, k: int) -> int:
        return math.prod(self.factors[(j + pos) % 2].index - 1 for pos in range(k))

    def nondegenerate(self) -> Optional[bool]:
        """``([G0:H]-1)([G1:H]-1) >= 2``; ``None`` when an index is unknown."""
        i0, i1 = (F.index for F in self.factors)
        if i0 is None or i1 is None:
            return None
        return (i0 - 1) * (i1 - 1) >= 2

    # -- membership hooks used by kernel / tree code ----------------------
    def in_one_sided_kernel(self, h, j: int) -> bool:
        """Exact membership of ``h`` in ``K_j``; backends override when decidable."""
        raise NotImplementedError(f"{self.name}: one-sided kernels are not decidable here")

    def h_elements(self) -> Optional[list]:
        """All elements of H when H is finite, else ``None``."""
        return None

    # -- display ----------------------------------------------------------
    def syllable_label(self, s: Syllable) -> str:
        return f"{s.factor}:{s.index}"

    def format(self, x: NormalForm) -> str:
        parts = [self.syllable_label(s) for s in x.syllables]
        if x.tail != self.h_identity or not parts:
            parts.append(self.format_h(x.tail))
        return " ".join(parts)

    def format_h(self, h) -> str:
        return "e" if h == self.h_identity else f"h:{h}"
