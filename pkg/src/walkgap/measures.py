"""Finitely supported probability measures on group words, with exact weights.

All weight arithmetic uses rationals so that convolution identities, the
lazy transform, and membership splits hold exactly and can be tested for
equality rather than closeness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .errors import DegenerateSplitError, InvalidMeasureError, SupportCapError
from .groups import IDENTITY, Presentation, Word

DEFAULT_SUPPORT_CAP = 10**6


@dataclass(frozen=True)
class Measure:
    """A probability measure with finite support and strictly positive weights."""

    atoms: Mapping[Word, Fraction]
    symmetric: bool

    def weight(self, w: Word) -> Fraction:
        return self.atoms.get(w, Fraction(0))

    @property
    def support_size(self) -> int:
        return len(self.atoms)

    def total(self) -> Fraction:
        return sum(self.atoms.values(), Fraction(0))


def make_measure(p: Presentation, atoms: Mapping[Word, Fraction | int | str]) -> Measure:
    """Validate weights and compute the symmetry flag exactly."""
    cleaned: dict[Word, Fraction] = {}
    for w, q in atoms.items():
        q = Fraction(q)
        if q < 0:
            raise InvalidMeasureError(f"negative weight {q} on {p.format(w)}")
        if q == 0:
            continue
        cleaned[w] = cleaned.get(w, Fraction(0)) + q
    total = sum(cleaned.values(), Fraction(0))
    if total != 1:
        raise InvalidMeasureError(f"weights sum to {total}, not 1")
    symmetric = all(cleaned.get(p.inv(w)) == q for w, q in cleaned.items())
    return Measure(cleaned, symmetric)


def point_mass(p: Presentation, w: Word) -> Measure:
    return make_measure(p, {w: Fraction(1)})


def uniform_on(p: Presentation, words) -> Measure:
    words = list(words)
    if not words:
        raise InvalidMeasureError("uniform measure needs a nonempty support")
    q = Fraction(1, len(words))
    atoms: dict[Word, Fraction] = {}
    for w in words:
        atoms[w] = atoms.get(w, Fraction(0)) + q
    return make_measure(p, atoms)


def generator_measure(p: Presentation) -> Measure:
    """Uniform measure on the standard symmetric generating set."""
    return uniform_on(p, p.standard_generators())


def lazify(m: Measure) -> Measure:
    """Average with the point mass at the identity: half weight stays put."""
    atoms = {w: q / 2 for w, q in m.atoms.items()}
    atoms[IDENTITY] = atoms.get(IDENTITY, Fraction(0)) + Fraction(1, 2)
    return Measure(atoms, m.symmetric)


def inverse_measure(m: Measure, p: Presentation) -> Measure:
    atoms: dict[Word, Fraction] = {}
    for w, q in m.atoms.items():
        atoms[p.inv(w)] = q
    return Measure(atoms, m.symmetric)


def convolve(
    m1: Measure,
    m2: Measure,
    p: Presentation,
    support_cap: int = DEFAULT_SUPPORT_CAP,
) -> Measure:
    """Exact convolution: weight of g is the sum of m1(x) m2(y) over xy = g."""
    atoms: dict[Word, Fraction] = {}
    for x, qx in m1.atoms.items():
        for y, qy in m2.atoms.items():
            g = p.mul(x, y)
            atoms[g] = atoms.get(g, Fraction(0)) + qx * qy
        if len(atoms) > support_cap:
            raise SupportCapError(
                f"convolution support exceeded cap of {support_cap} atoms"
            )
    symmetric = all(atoms.get(p.inv(w)) == q for w, q in atoms.items())
    return Measure(atoms, symmetric)


def convolution_power(
    m: Measure, n: int, p: Presentation, support_cap: int = DEFAULT_SUPPORT_CAP
) -> Measure:
    out = point_mass(p, IDENTITY)
    for _ in range(n):
        out = convolve(out, m, p, support_cap=support_cap)
    return out


@dataclass(frozen=True)
class SplitMeasure:
    """A convex split m = kappa * inside + (1 - kappa) * outside.

    inside is supported on the subgroup, outside on its complement. A
    degenerate split (kappa = 1) carries only the inside part.
    """

    kappa: Fraction
    inside: Measure | None
    outside: Measure | None

    @property
    def degenerate(self) -> bool:
        return self.inside is None or self.outside is None

    def reconstruct(self) -> dict[Word, Fraction]:
        atoms: dict[Word, Fraction] = {}
        if self.inside is not None:
            for w, q in self.inside.atoms.items():
                atoms[w] = atoms.get(w, Fraction(0)) + self.kappa * q
        if self.outside is not None:
            for w, q in self.outside.atoms.items():
                atoms[w] = atoms.get(w, Fraction(0)) + (1 - self.kappa) * q
        return atoms


def split_by_membership(
    m: Measure, member: Callable[[Word], bool], p: Presentation
) -> SplitMeasure:
    """Split m along a subgroup membership oracle, renormalizing each part.

    kappa = 0 leaves the inside part undefined and raises; kappa = 1 yields
    a degenerate split whose outside part is None.
    """
    inside_atoms: dict[Word, Fraction] = {}
    outside_atoms: dict[Word, Fraction] = {}
    for w, q in m.atoms.items():
        (inside_atoms if member(w) else outside_atoms)[w] = q
    kappa = sum(inside_atoms.values(), Fraction(0))
    if kappa == 0:
        raise DegenerateSplitError("measure puts no mass on the subgroup")
    inside = Measure(
        {w: q / kappa for w, q in inside_atoms.items()},
        _is_symmetric(inside_atoms, p),
    )
    if kappa == 1:
        return SplitMeasure(kappa, inside, None)
    rest = 1 - kappa
    outside = Measure(
        {w: q / rest for w, q in outside_atoms.items()},
        _is_symmetric(outside_atoms, p),
    )
    return SplitMeasure(kappa, inside, outside)


def _is_symmetric(atoms: Mapping[Word, Fraction], p: Presentation) -> bool:
    return all(atoms.get(p.inv(w)) == q for w, q in atoms.items())
