"""Folded subgroup automata and exact coset-walk dynamic programs.

A finitely generated subgroup H of a free product of cyclic groups is
represented by the core of its coset graph. Edges of a fixed factor i form
partial cycles; each connected piece is stored as a "gadget": a set of
states with residues modulo a period that divides the factor order (period
0 on an infinite factor means no wrap relation is known yet). Folding
processes every generator loop at the base state and maintains three
invariants: residues within a gadget are consistent, no residue holds two
states, and discovering a wrap relation shrinks the period via a gcd and
merges states whose residues collide.

Reading a syllable a_i^u from a state lands on the gadget member at residue
(r + u) mod period, or falls off the core. A word lies in H exactly when
its normal form reads from base back to base without falling off. Cosets
beyond the core hang in trees of full cycles, which is what the coset-walk
DP materializes lazily.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CostCapError, NonSymmetricError, WalkgapError
from .groups import Presentation, Word
from .measures import Measure
from .walks import (
    DEFAULT_WALK_CAP,
    _extrapolate_ratios,
    _nth_root,
    radius_estimate,
    return_probability_series_dp,
)


@dataclass(frozen=True)
class Gadget:
    """One factor-i cycle piece: states with residues modulo a period."""

    factor: int
    period: int  # divides the factor order; 0 = free (infinite factor, no wrap)
    res_of: dict  # state -> residue
    at_res: dict  # residue -> state


@dataclass(frozen=True)
class SubgroupAutomaton:
    """Folded core automaton of a finitely generated subgroup."""

    pres: Presentation
    generators: tuple[Word, ...]
    n_states: int
    gadgets: tuple[Gadget, ...]
    gadget_of: tuple[dict, ...]  # per factor: state -> index into gadgets
    base: int = 0

    # -- reading -----------------------------------------------------------

    def read_syllable(self, state: int, factor: int, exp: int) -> int | None:
        idx = self.gadget_of[factor].get(state)
        if idx is None:
            return None
        g = self.gadgets[idx]
        r = g.res_of[state] + exp
        if g.period:
            r %= g.period
        return g.at_res.get(r)

    def read_word(self, state: int, w: Word) -> int | None:
        for i, e in w.syllables:
            state = self.read_syllable(state, i, e)
            if state is None:
                return None
        return state

    def contains(self, w: Word) -> bool:
        return self.read_word(self.base, w) == self.base

    # -- structure ---------------------------------------------------------

    @property
    def is_complete(self) -> bool:
        """Complete iff every state reads every factor; then states are the
        finitely many cosets."""
        for factor in range(self.pres.n_factors):
            lookup = self.gadget_of[factor]
            for s in range(self.n_states):
                idx = lookup.get(s)
                if idx is None:
                    return False
                g = self.gadgets[idx]
                if g.period == 0 or len(g.res_of) != g.period:
                    return False
        return True

    @property
    def index(self) -> int | None:
        return self.n_states if self.is_complete else None

    def to_json_dict(self) -> dict:
        return {
            "states": self.n_states,
            "base": self.base,
            "generators": [self.pres.format(w) for w in self.generators],
            "gadgets": [
                {
                    "factor": self.pres.names[g.factor],
                    "period": g.period,
                    "members": {str(s): g.res_of[s] for s in sorted(g.res_of)},
                }
                for g in self.gadgets
            ],
        }


class TrivialSubgroup:
    """The trivial subgroup, handled as a mode of its own: its coset walk is
    the walk on the group itself."""

    def __init__(self, pres: Presentation):
        self.pres = pres

    def contains(self, w: Word) -> bool:
        return w.is_identity


# ---------------------------------------------------------------------------
# folding
# ---------------------------------------------------------------------------


class _Folder:
    def __init__(self, pres: Presentation):
        self.pres = pres
        self.parent = [0]
        self.gadgets: dict[int, dict] = {}
        self.next_gid = 0
        self.of: dict[tuple[int, int], int] = {}  # (factor, state) -> gid
        self.queue: deque[tuple[int, int]] = deque()

    # union-find ------------------------------------------------------------

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def new_state(self) -> int:
        s = len(self.parent)
        self.parent.append(s)
        return s

    # gadget primitives ------------------------------------------------------

    def _fresh_gadget(self, factor: int, state: int) -> int:
        order = self.pres.factors[factor]
        gid = self.next_gid
        self.next_gid += 1
        self.gadgets[gid] = {
            "factor": factor,
            "period": order,  # 0 for an infinite factor
            "res_of": {state: 0},
            "at_res": {0: state},
        }
        self.of[(factor, state)] = gid
        return gid

    def _norm(self, g: dict, r: int) -> int:
        return r % g["period"] if g["period"] else r

    def _drop_member(self, gid: int, state: int) -> int | None:
        g = self.gadgets[gid]
        r = g["res_of"].pop(state, None)
        if r is not None and g["at_res"].get(r) == state:
            del g["at_res"][r]
        self.of.pop((g["factor"], state), None)
        return r

    def _insert(self, gid: int, state: int, r: int):
        g = self.gadgets[gid]
        r = self._norm(g, r)
        old = g["res_of"].get(state)
        if old is not None:
            d = old - r
            if d:
                self._shrink(gid, math.gcd(g["period"], abs(d)))
            return
        holder = g["at_res"].get(r)
        if holder is not None:
            self.queue.append((state, holder))
            return
        g["res_of"][state] = r
        g["at_res"][r] = state
        self.of[(g["factor"], state)] = gid

    def _shrink(self, gid: int, new_period: int):
        g = self.gadgets[gid]
        if new_period == g["period"]:
            return
        members = sorted(g["res_of"].items())
        factor = g["factor"]
        g["res_of"] = {}
        g["at_res"] = {}
        g["period"] = new_period
        for state, r in members:
            self.of.pop((factor, state), None)
        for state, r in members:
            self._insert(gid, state, r)

    def _unify(self, gid_a: int, ra: int, gid_b: int, rb: int):
        """Record that residue ra of gadget a and rb of gadget b name the
        same coset."""
        if gid_a == gid_b:
            g = self.gadgets[gid_a]
            d = self._norm(g, ra - rb)
            if d:
                self._shrink(gid_a, math.gcd(g["period"], abs(d)))
            return
        a, b = self.gadgets[gid_a], self.gadgets[gid_b]
        if len(b["res_of"]) > len(a["res_of"]):
            gid_a, gid_b, a, b, ra, rb = gid_b, gid_a, b, a, rb, ra
        new_period = math.gcd(a["period"], b["period"])
        self._shrink(gid_a, new_period)
        ra = self._norm(a, ra)
        moved = sorted(b["res_of"].items())
        for state, _ in moved:
            self.of.pop((b["factor"], state), None)
        del self.gadgets[gid_b]
        for state, r in moved:
            self._insert(gid_a, self.find(state), r - rb + ra)

    # relations ---------------------------------------------------------------

    def assert_edge(self, u: int, factor: int, exp: int, v: int):
        u, v = self.find(u), self.find(v)
        gid_u = self.of.get((factor, u))
        if gid_u is None:
            gid_u = self._fresh_gadget(factor, u)
        target = self.gadgets[gid_u]["res_of"][u] + exp
        gid_v = self.of.get((factor, v))
        if gid_v is None:
            if u == v:
                self._unify(gid_u, target, gid_u, self.gadgets[gid_u]["res_of"][u])
            else:
                self._insert(gid_u, v, target)
        else:
            self._unify(gid_u, target, gid_v, self.gadgets[gid_v]["res_of"][v])
        self._drain()

    def _drain(self):
        while self.queue:
            x, y = self.queue.popleft()
            self._merge_states(x, y)

    def _merge_states(self, x: int, y: int):
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        survivor, loser = (x, y) if x < y else (y, x)
        self.parent[loser] = survivor
        for factor in range(self.pres.n_factors):
            gid_l = self.of.get((factor, loser))
            if gid_l is None:
                continue
            rl = self._drop_member(gid_l, loser)
            if rl is None:
                continue
            gid_s = self.of.get((factor, survivor))
            if gid_s is None:
                self._insert(gid_l, survivor, rl)
            else:
                rs = self.gadgets[gid_s]["res_of"][survivor]
                self._unify(gid_s, rs, gid_l, rl)


def fold_stallings(gens: Sequence[Word], p: Presentation) -> SubgroupAutomaton:
    """Fold the generator loops into the canonical core automaton.

    States are numbered by breadth-first search from the base, so equal
    subgroups given by different generating sets fold to equal automata.
    """
    gens = tuple(gens)
    loops = [w for w in gens if not w.is_identity]
    if not loops:
        raise WalkgapError(
            "all generators reduce to the identity; use TrivialSubgroup instead"
        )
    folder = _Folder(p)
    for w in loops:
        cur = 0
        syllables = w.syllables
        for k, (i, e) in enumerate(syllables):
            nxt = 0 if k == len(syllables) - 1 else folder.new_state()
            folder.assert_edge(cur, i, e, nxt)
            cur = folder.find(nxt)
    return _canonicalize(folder, gens)


def _canonicalize(folder: _Folder, gens: tuple[Word, ...]) -> SubgroupAutomaton:
    pres = folder.pres
    base = folder.find(0)
    order_of: dict[int, int] = {base: 0}
    frontier = deque([base])
    while frontier:
        s = frontier.popleft()
        for factor in range(pres.n_factors):
            gid = folder.of.get((factor, s))
            if gid is None:
                continue
            g = folder.gadgets[gid]
            r0 = g["res_of"][s]
            if g["period"]:
                rel_order = range(1, g["period"])
                neighbors = [
                    g["at_res"].get((r0 + r) % g["period"]) for r in rel_order
                ]
            else:
                deltas = sorted(
                    (r - r0 for r in g["at_res"] if r != r0),
                    key=lambda d: (abs(d), d < 0),
                )
                neighbors = [g["at_res"][r0 + d] for d in deltas]
            for t in neighbors:
                if t is not None and t not in order_of:
                    order_of[t] = len(order_of)
                    frontier.append(t)
    gadget_list: list[Gadget] = []
    gadget_index: dict[int, int] = {}
    gadget_of: list[dict] = [dict() for _ in range(pres.n_factors)]
    for (factor, s), gid in sorted(
        folder.of.items(), key=lambda kv: (kv[0][0], order_of[kv[0][1]])
    ):
        if s not in order_of:
            continue  # unreachable debris from merged intermediate states
        if gid not in gadget_index:
            g = folder.gadgets[gid]
            anchor = min(g["res_of"], key=lambda st: order_of[st])
            shift = g["res_of"][anchor]
            res_of = {}
            at_res = {}
            for st, r in g["res_of"].items():
                rr = r - shift
                if g["period"]:
                    rr %= g["period"]
                res_of[order_of[st]] = rr
                at_res[rr] = order_of[st]
            gadget_index[gid] = len(gadget_list)
            gadget_list.append(Gadget(factor, g["period"], res_of, at_res))
        gadget_of[factor][order_of[s]] = gadget_index[gid]
    return SubgroupAutomaton(
        pres=pres,
        generators=gens,
        n_states=len(order_of),
        gadgets=tuple(gadget_list),
        gadget_of=tuple(gadget_of),
    )


def automaton_from_json(pres: Presentation, data: dict) -> SubgroupAutomaton:
    name_index = {name: i for i, name in enumerate(pres.names)}
    gadget_list = []
    gadget_of: list[dict] = [dict() for _ in range(pres.n_factors)]
    for entry in data["gadgets"]:
        factor = name_index[entry["factor"]]
        res_of = {int(s): int(r) for s, r in entry["members"].items()}
        at_res = {r: s for s, r in res_of.items()}
        if len(at_res) != len(res_of):
            raise WalkgapError("gadget members are not residue-distinct")
        idx = len(gadget_list)
        gadget_list.append(Gadget(factor, int(entry["period"]), res_of, at_res))
        for s in res_of:
            gadget_of[factor][s] = idx
    return SubgroupAutomaton(
        pres=pres,
        generators=tuple(pres.parse(w) for w in data.get("generators", [])),
        n_states=int(data["states"]),
        gadgets=tuple(gadget_list),
        gadget_of=tuple(gadget_of),
        base=int(data.get("base", 0)),
    )


# ---------------------------------------------------------------------------
# coset-walk DP
# ---------------------------------------------------------------------------
#
# Coset states are either a core automaton state (int) or a tuple
# ("o", anchor, path) hanging off the core. The anchor names the factor
# cycle the walk fell off from: ("g", factor, gadget_index) with the first
# path value an absolute residue of that gadget, or ("f", factor, state)
# for a state with no factor edges, with the first path value relative to
# it. Later path entries (factor, value) live in fresh full cycles, which
# is the genuine shape of the coset graph beyond the folded core.


def _off_norm(pres: Presentation, factor: int, value: int) -> int:
    m = pres.factors[factor]
    return value % m if m else value


def _step_syllable(aut: SubgroupAutomaton, cs, factor: int, exp: int):
    pres = aut.pres
    if isinstance(cs, int):
        idx = aut.gadget_of[factor].get(cs)
        if idx is None:
            v = _off_norm(pres, factor, exp)
            return ("o", ("f", factor, cs), ((factor, v),))
        g = aut.gadgets[idx]
        r = g.res_of[cs] + exp
        if g.period:
            r %= g.period
        hit = g.at_res.get(r)
        if hit is not None:
            return hit
        return ("o", ("g", factor, idx), ((factor, r),))
    _, anchor, path = cs
    last_factor, last_value = path[-1]
    if last_factor != factor:
        v = _off_norm(pres, factor, exp)
        return ("o", anchor, path + ((factor, v),))
    if len(path) == 1:
        if anchor[0] == "g":
            g = aut.gadgets[anchor[2]]
            r = last_value + exp
            if g.period:
                r %= g.period
            hit = g.at_res.get(r)
            if hit is not None:
                return hit
            return ("o", anchor, ((factor, r),))
        v = _off_norm(pres, factor, last_value + exp)
        if v == 0:
            return anchor[2]
        return ("o", anchor, ((factor, v),))
    v = _off_norm(pres, factor, last_value + exp)
    if v == 0:
        return ("o", anchor, path[:-1])
    return ("o", anchor, path[:-1] + ((factor, v),))


def step_coset(aut: SubgroupAutomaton, cs, w: Word):
    for i, e in w.syllables:
        cs = _step_syllable(aut, cs, i, e)
    return cs


def _syllable_letters(pres: Presentation, factor: int, value: int) -> int:
    m = pres.factors[factor]
    return min(value % m, (-value) % m) if m else abs(value)


def _return_letter_bound(aut: SubgroupAutomaton, cs) -> int:
    """Letters needed to get back to the core (0 for core states)."""
    if isinstance(cs, int):
        return 0
    _, anchor, path = cs
    pres = aut.pres
    total = 0
    for factor, value in path[1:]:
        total += _syllable_letters(pres, factor, value)
    factor, value = path[0]
    if anchor[0] == "f":
        total += _syllable_letters(pres, factor, value)
    else:
        g = aut.gadgets[anchor[2]]
        if g.period:
            best = min(
                min((value - r) % g.period, (r - value) % g.period)
                for r in g.at_res
            )
        else:
            best = min(abs(value - r) for r in g.at_res)
        total += best
    return total


def coset_hit_series(
    aut: SubgroupAutomaton | TrivialSubgroup,
    m: Measure,
    n: int,
    cost_cap: int = DEFAULT_WALK_CAP,
) -> list[Fraction]:
    """Exact p_{e,H,t} for t = 0..n: mass of the walk sitting in H.

    For the trivial subgroup this is the return-probability series.
    """
    if isinstance(aut, TrivialSubgroup):
        return return_probability_series_dp(aut.pres, m, n, cost_cap=cost_cap)
    pres = aut.pres
    steps = [(w, q) for w, q in m.atoms.items()]
    lmax = max((pres.letter_length(w) for w, _ in steps), default=0)
    dist = {aut.base: Fraction(1)}
    out = [Fraction(1)]
    for t in range(1, n + 1):
        budget = (n - t) * lmax
        new: dict = {}
        for cs, mass in dist.items():
            for w, q in steps:
                nxt = step_coset(aut, cs, w)
                if _return_letter_bound(aut, nxt) > budget:
                    continue
                new[nxt] = new.get(nxt, Fraction(0)) + mass * q
        if len(new) > cost_cap:
            raise CostCapError(f"coset DP exceeded {cost_cap} states at step {t}")
        dist = new
        out.append(dist.get(aut.base, Fraction(0)))
    return out


def coset_hit_probability(
    aut: SubgroupAutomaton | TrivialSubgroup,
    m: Measure,
    n: int,
    cost_cap: int = DEFAULT_WALK_CAP,
) -> Fraction:
    """Exact probability that the n-step walk ends in the subgroup."""
    if n < 0:
        raise ValueError("walk length must be nonnegative")
    return coset_hit_series(aut, m, n, cost_cap=cost_cap)[n]


@dataclass(frozen=True)
class RelativeRadiusEstimate:
    """Certified lower bounds for the norm of the walk operator on cosets."""

    lengths: tuple[int, ...]
    power_bounds: tuple[float, ...]
    rayleigh_bounds: tuple[float, ...]
    ratios: tuple[float, ...]
    best_lower: float
    ratio_estimate: float | None
    method: str

    def to_json_dict(self) -> dict:
        return {
            "lengths": list(self.lengths),
            "power_bounds": list(self.power_bounds),
            "rayleigh_bounds": list(self.rayleigh_bounds),
            "ratios": list(self.ratios),
            "best_lower": self.best_lower,
            "ratio_estimate": self.ratio_estimate,
            "method": self.method,
        }


def relative_radius_bounds(
    aut: SubgroupAutomaton | TrivialSubgroup,
    m: Measure,
    n_max: int,
    cost_cap: int = DEFAULT_WALK_CAP,
) -> RelativeRadiusEstimate:
    """Lower bounds for the relative spectral radius from the coset walk.

    p_{e,H,2n}^(1/2n) is a certified lower bound (the indicator of the base
    coset is a unit vector), and so is every Rayleigh quotient of a DP mass
    vector; the ratio sequence is the fast uncertified estimator.
    """
    if not m.symmetric:
        raise NonSymmetricError("relative radius requires a symmetric measure")
    if n_max < 2 or n_max % 2:
        raise ValueError("n_max must be an even integer >= 2")
    if isinstance(aut, TrivialSubgroup):
        est = radius_estimate(aut.pres, m, n_max, cost_cap=cost_cap)
        return RelativeRadiusEstimate(
            lengths=est.lengths,
            power_bounds=est.lower_bounds,
            rayleigh_bounds=(),
            ratios=est.ratios,
            best_lower=est.best_lower,
            ratio_estimate=est.ratio_estimate,
            method="trivial-subgroup:" + est.method,
        )
    pres = aut.pres
    steps = list(m.atoms.items())
    lmax = max((pres.letter_length(w) for w, _ in steps), default=0)
    dist = {aut.base: Fraction(1)}
    hits: list[Fraction] = [Fraction(1)]
    rayleigh: list[float] = []
    for t in range(1, n_max + 1):
        budget = (n_max - t) * lmax
        new: dict = {}
        for cs, mass in dist.items():
            for w, q in steps:
                nxt = step_coset(aut, cs, w)
                if _return_letter_bound(aut, nxt) > budget:
                    continue
                new[nxt] = new.get(nxt, Fraction(0)) + mass * q
        if len(new) > cost_cap:
            raise CostCapError(f"coset DP exceeded {cost_cap} states at step {t}")
        dist = new
        hits.append(dist.get(aut.base, Fraction(0)))
        if t % 2 == 0:
            num = Fraction(0)
            for cs, mass in dist.items():
                for w, q in steps:
                    nxt = step_coset(aut, cs, w)
                    other = dist.get(nxt)
                    if other is not None:
                        num += mass * q * other
            den = sum((mass * mass for mass in dist.values()), Fraction(0))
            rayleigh.append(float(num / den))
    lengths = tuple(range(2, n_max + 1, 2))
    power = tuple(_nth_root(hits[t], t) for t in lengths)
    ratios = []
    for t in lengths[:-1]:
        if hits[t] > 0 and hits[t + 2] > 0:
            ratios.append(math.sqrt(float(hits[t + 2] / hits[t])))
    best = max(max(power, default=0.0), max(rayleigh, default=0.0))
    return RelativeRadiusEstimate(
        lengths=lengths,
        power_bounds=power,
        rayleigh_bounds=tuple(rayleigh),
        ratios=tuple(ratios),
        best_lower=best,
        ratio_estimate=_extrapolate_ratios(ratios),
        method="coset-dp",
    )
