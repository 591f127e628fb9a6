"""Words with unique normal forms in a free product of cyclic groups.

The ambient group is a free product of cyclic factors, one generator per
factor. Factor order 0 means an infinite cyclic factor; order m >= 2 means
Z/m. A word is a sequence of syllables (factor, exponent) in normal form:
adjacent syllables use distinct factors, exponents are nonzero (and reduced
into [1, m-1] for a finite factor of order m).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidFactorError, InvalidWordError

_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
_TOKEN_RE = re.compile(r"^([A-Za-z][A-Za-z0-9_]*)(?:\^(-?\d+))?$")

_DEFAULT_NAMES = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True, slots=True)
class Word:
    """A group element in normal form; the empty word is the identity."""

    syllables: tuple[tuple[int, int], ...] = ()

    @property
    def is_identity(self) -> bool:
        return not self.syllables

    def __len__(self) -> int:
        return len(self.syllables)


IDENTITY = Word(())


@dataclass(frozen=True)
class Presentation:
    """A free product of cyclic groups with named generators.

    factors[i] is the order of the i-th cyclic factor (0 for Z, m >= 2 for
    Z/m). The standard symmetric generating set consists of every generator
    together with its inverse, with self-inverse (order 2) generators
    counted once.
    """

    factors: tuple[int, ...]
    names: tuple[str, ...]

    def __post_init__(self):
        if not self.factors:
            raise InvalidFactorError("a presentation needs at least one factor")
        for m in self.factors:
            if m < 0 or m == 1:
                raise InvalidFactorError(f"factor order must be 0 or >= 2, got {m}")
        if len(self.names) != len(self.factors):
            raise InvalidFactorError(
                f"{len(self.factors)} factors but {len(self.names)} names"
            )
        for name in self.names:
            if not _NAME_RE.match(name):
                raise InvalidFactorError(f"bad generator name {name!r}")
        if len(set(self.names)) != len(self.names):
            raise InvalidFactorError("generator names must be distinct")

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    def order(self, i: int) -> int:
        if not 0 <= i < len(self.factors):
            raise InvalidFactorError(f"factor index {i} out of range")
        return self.factors[i]

    # -- normal forms ------------------------------------------------------

    def _norm_exp(self, i: int, e: int) -> int:
        m = self.order(i)
        return e % m if m else e

    def reduce(self, raw: Iterable[tuple[int, int]]) -> Word:
        """Reduce a raw syllable sequence to its unique normal form."""
        stack: list[list[int]] = []
        for i, e in raw:
            e = self._norm_exp(i, e)
            if e == 0:
                continue
            if stack and stack[-1][0] == i:
                stack[-1][1] = self._norm_exp(i, stack[-1][1] + e)
                if stack[-1][1] == 0:
                    stack.pop()
            else:
                stack.append([i, e])
        return Word(tuple((i, e) for i, e in stack))

    def mul(self, *words: Word) -> Word:
        out: list[tuple[int, int]] = []
        for w in words:
            out.extend(w.syllables)
        return self.reduce(out)

    def inv(self, w: Word) -> Word:
        return self.reduce((i, -e) for i, e in reversed(w.syllables))

    def gen(self, i: int, e: int = 1) -> Word:
        return self.reduce([(i, e)])

    def standard_generators(self) -> list[Word]:
        """The symmetric set S: each generator and its inverse, deduplicated."""
        out: list[Word] = []
        seen = set()
        for i in range(self.n_factors):
            for e in (1, -1):
                w = self.gen(i, e)
                if w.syllables not in seen:
                    seen.add(w.syllables)
                    out.append(w)
        return out

    def letter_length(self, w: Word) -> int:
        """Length of w in the letter metric of the standard generators."""
        total = 0
        for i, e in w.syllables:
            m = self.factors[i]
            total += min(e, m - e) if m else abs(e)
        return total

    # -- parsing and formatting -------------------------------------------

    def format(self, w: Word) -> str:
        if w.is_identity:
            return "e"
        parts = []
        for i, e in w.syllables:
            name = self.names[i]
            parts.append(name if e == 1 else f"{name}^{e}")
        return " ".join(parts)

    def parse(self, text: str) -> Word:
        text = text.strip()
        if text in ("", "e", "1"):
            return IDENTITY
        index = {name: i for i, name in enumerate(self.names)}
        raw = []
        for token in text.split():
            m = _TOKEN_RE.match(token)
            if not m:
                raise InvalidWordError(f"cannot parse token {token!r}")
            name, exp = m.group(1), m.group(2)
            if name not in index:
                raise InvalidWordError(f"unknown generator {name!r}")
            raw.append((index[name], int(exp) if exp is not None else 1))
        return self.reduce(raw)


def presentation(factors: Sequence[int], names: Sequence[str] | None = None) -> Presentation:
    """Build a presentation, generating default names a, b, c, ... if absent."""
    factors = tuple(int(m) for m in factors)
    if names is None:
        if len(factors) > len(_DEFAULT_NAMES):
            raise InvalidFactorError("too many factors for default names")
        names = tuple(_DEFAULT_NAMES[: len(factors)])
    else:
        names = tuple(str(n) for n in names)
    return Presentation(factors, names)


def free_group(rank: int) -> Presentation:
    return presentation([0] * rank)


def reduce_word(raw: Iterable[tuple[int, int]], p: Presentation) -> Word:
    """Normal form of a raw syllable sequence; idempotent."""
    return p.reduce(raw)
