"""Finite measure-preserving actions as generator-indexed permutations.

Points carry the uniform measure, which every permutation preserves, so a
valid action is exactly a tuple of permutations whose orders divide the
corresponding factor orders. The pushforward of a word measure is a doubly
stochastic matrix with exact rational entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import InfiniteIndexError, InvalidActionError
from .groups import Presentation, Word
from .measures import Measure
from .subgroups import SubgroupAutomaton


@lru_cache(maxsize=4096)
def _inverted(perm: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for x, y in enumerate(perm):
        inv[y] = x
    return tuple(inv)


@dataclass(frozen=True)
class FiniteAction:
    """An action of the presentation on points 0..n_points-1."""

    pres: Presentation
    n_points: int
    perms: tuple[tuple[int, ...], ...]  # one permutation per factor

    def inverse_perm(self, factor: int) -> tuple[int, ...]:
        return _inverted(self.perms[factor])

    def apply_syllable(self, x: int, factor: int, exp: int) -> int:
        m = self.pres.factors[factor]
        if m:
            exp %= m
        if exp >= 0:
            perm = self.perms[factor]
            for _ in range(exp):
                x = perm[x]
        else:
            inv = self.inverse_perm(factor)
            for _ in range(-exp):
                x = inv[x]
        return x

    def apply_word(self, x: int, w: Word) -> int:
        for i, e in w.syllables:
            x = self.apply_syllable(x, i, e)
        return x


def make_action(
    p: Presentation, perms: Sequence[Sequence[int]], n_points: int | None = None
) -> FiniteAction:
    perms = tuple(tuple(int(v) for v in perm) for perm in perms)
    if len(perms) != p.n_factors:
        raise InvalidActionError(
            f"{p.n_factors} factors but {len(perms)} permutations"
        )
    if n_points is None:
        if not perms or not perms[0]:
            raise InvalidActionError("cannot infer the point count")
        n_points = len(perms[0])
    act = FiniteAction(p, n_points, perms)
    report = validate_action(act)
    if not report.ok:
        raise InvalidActionError("; ".join(report.violations))
    return act


@dataclass(frozen=True)
class ActionValidation:
    ok: bool
    violations: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations)}


def validate_action(act: FiniteAction) -> ActionValidation:
    """Check bijectivity and that generator orders divide factor orders."""
    problems = []
    n = act.n_points
    for i, perm in enumerate(act.perms):
        name = act.pres.names[i]
        if len(perm) != n:
            problems.append(f"permutation for {name} has length {len(perm)}, not {n}")
            continue
        if sorted(perm) != list(range(n)):
            problems.append(f"table for {name} is not a bijection")
            continue
        m = act.pres.factors[i]
        if m:
            for length in _cycle_lengths(perm):
                if m % length:
                    problems.append(
                        f"order of generator image {name} does not divide {m} "
                        f"(cycle of length {length})"
                    )
                    break
    return ActionValidation(not problems, tuple(problems))


def _cycle_lengths(perm: Sequence[int]) -> Iterable[int]:
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = perm[x]
            length += 1
        yield length


# ---------------------------------------------------------------------------
# Markov matrices
# ---------------------------------------------------------------------------


@dataclass(eq=True)
class MarkovMatrix:
    """Doubly stochastic averaging matrix with exact rational entries.

    Treated as immutable; cached views (dense floats, scaled integers) are
    derived lazily."""

    n: int
    entries: tuple[tuple[Fraction, ...], ...]
    symmetric: bool

    @cached_property
    def dense(self) -> np.ndarray:
        return np.array(
            [[float(v) for v in row] for row in self.entries], dtype=np.float64
        )

    @cached_property
    def common_denominator(self) -> int:
        d = 1
        for row in self.entries:
            for v in row:
                d = math.lcm(d, v.denominator)
        return d

    @cached_property
    def integer_matrix(self) -> list[list[int]]:
        d = self.common_denominator
        return [[int(v * d) for v in row] for row in self.entries]

    def transpose(self) -> MarkovMatrix:
        cols = tuple(
            tuple(self.entries[x][y] for x in range(self.n)) for y in range(self.n)
        )
        return MarkovMatrix(self.n, cols, self.symmetric)

    def matmul(self, other: MarkovMatrix) -> MarkovMatrix:
        if self.n != other.n:
            raise ValueError("size mismatch")
        rows = []
        for x in range(self.n):
            row = []
            for y in range(self.n):
                row.append(
                    sum(
                        (self.entries[x][k] * other.entries[k][y] for k in range(self.n)),
                        Fraction(0),
                    )
                )
            rows.append(tuple(row))
        return _freeze_matrix(rows)

    def restrict(self, points: Sequence[int]) -> MarkovMatrix:
        """Submatrix on a union of orbits; rows must still sum to one."""
        points = list(points)
        rows = []
        for x in points:
            row = tuple(self.entries[x][y] for y in points)
            if sum(row, Fraction(0)) != 1:
                raise ValueError("subset is not invariant: rows do not sum to 1")
            rows.append(row)
        return _freeze_matrix(rows)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "rows": [[str(v) for v in row] for row in self.entries],
            "symmetric": self.symmetric,
        }


def _freeze_matrix(rows) -> MarkovMatrix:
    rows = tuple(tuple(row) for row in rows)
    n = len(rows)
    symmetric = all(rows[x][y] == rows[y][x] for x in range(n) for y in range(x))
    return MarkovMatrix(n, rows, symmetric)


def markov_matrix(act: FiniteAction, m: Measure) -> MarkovMatrix:
    """Pushforward of the measure: entry (x, y) is the mass moving x to y."""
    n = act.n_points
    rows = [[Fraction(0)] * n for _ in range(n)]
    for w, q in m.atoms.items():
        targets = [act.apply_word(x, w) for x in range(n)]
        for x, y in enumerate(targets):
            rows[x][y] += q
    return _freeze_matrix(rows)


# ---------------------------------------------------------------------------
# orbits and Schreier actions
# ---------------------------------------------------------------------------


def orbits(act: FiniteAction, support: Iterable[Word]) -> tuple[tuple[int, ...], ...]:
    """Connected components of the graph joining x to x.w for support words.

    Components are sorted by least point, so the partition is deterministic.
    """
    parent = list(range(act.n_points))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for w in support:
        for x in range(act.n_points):
            a, b = find(x), find(act.apply_word(x, w))
            if a != b:
                if a > b:
                    a, b = b, a
                parent[b] = a
    groups: dict[int, list[int]] = {}
    for x in range(act.n_points):
        groups.setdefault(find(x), []).append(x)
    return tuple(tuple(sorted(v)) for _, v in sorted(groups.items()))


def schreier_from_subgroup(aut: SubgroupAutomaton) -> FiniteAction:
    """The coset action on automaton states; the base state is the coset H."""
    if not aut.is_complete:
        raise InfiniteIndexError(
            "automaton is incomplete, so the subgroup has infinite index"
        )
    perms = []
    for factor in range(aut.pres.n_factors):
        perm = []
        for s in range(aut.n_states):
            t = aut.read_syllable(s, factor, 1)
            if t is None:
                raise InfiniteIndexError("incomplete read on a complete automaton")
            perm.append(t)
        perms.append(tuple(perm))
    return make_action(aut.pres, perms, aut.n_states)


# ---------------------------------------------------------------------------
# chains of actions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ActionChain:
    """A tower of finite actions with equivariant projections downward.

    projections[k] maps the points of level k+1 onto the points of level k.
    """

    levels: tuple[FiniteAction, ...]
    projections: tuple[tuple[int, ...], ...]


def make_chain(
    levels: Sequence[FiniteAction], projections: Sequence[Sequence[int]]
) -> ActionChain:
    chain = ActionChain(
        tuple(levels), tuple(tuple(int(v) for v in proj) for proj in projections)
    )
    report = validate_chain(chain)
    if not report.ok:
        from .errors import InvalidChainError

        raise InvalidChainError("; ".join(report.violations))
    return chain


@dataclass(frozen=True)
class ChainValidation:
    ok: bool
    violations: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations)}


def validate_chain(chain: ActionChain) -> ChainValidation:
    """Surjectivity, equal fiber sizes, and exact equivariance per level."""
    problems = []
    if not chain.levels:
        problems.append("chain has no levels")
        return ChainValidation(False, tuple(problems))
    if len(chain.projections) != len(chain.levels) - 1:
        problems.append(
            f"{len(chain.levels)} levels need {len(chain.levels) - 1} projections, "
            f"got {len(chain.projections)}"
        )
        return ChainValidation(False, tuple(problems))
    for k, proj in enumerate(chain.projections):
        low, high = chain.levels[k], chain.levels[k + 1]
        if len(proj) != high.n_points:
            problems.append(f"projection {k} has length {len(proj)}")
            continue
        fibers: dict[int, int] = {}
        for x in proj:
            if not 0 <= x < low.n_points:
                problems.append(f"projection {k} maps outside level {k}")
                break
            fibers[x] = fibers.get(x, 0) + 1
        else:
            if len(fibers) != low.n_points:
                problems.append(f"projection {k} is not surjective")
            elif len(set(fibers.values())) > 1:
                problems.append(f"projection {k} has unequal fiber sizes")
            for factor in range(low.pres.n_factors):
                hp, lp = high.perms[factor], low.perms[factor]
                if any(proj[hp[x]] != lp[proj[x]] for x in range(high.n_points)):
                    problems.append(
                        f"projection {k} is not equivariant for "
                        f"{low.pres.names[factor]}"
                    )
    return ChainValidation(not problems, tuple(problems))
