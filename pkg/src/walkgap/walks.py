"""Exact return probabilities and spectral radius estimates for word walks.

Two engines compute the return-probability sequence p_{e,e,n}:

* a distribution DP over normal-form words, exact at every depth because a
  word too long to cancel within the remaining steps can never contribute
  to a return and is dropped;
* a first-passage power-series recursion for measures whose support lies in
  single syllables (identity allowed, infinite-order factors stepped by
  exponent +-1 only). The walk then acts on the syllable stack, and the
  first-return series of a fresh top syllable satisfies a closed polynomial
  system whose coefficients are computed exactly over the integers.

The series engine makes depth-300 estimates cheap; the word DP covers
arbitrary finitely supported measures under a cost cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import CostCapError, NonSymmetricError, WalkgapError
from .groups import IDENTITY, Presentation, Word
from .measures import Measure

DEFAULT_WALK_CAP = 2_000_000
MONOTONE_SLACK = 1e-9


def log_fraction(q: Fraction) -> float:
    if q <= 0:
        raise ValueError("log of a nonpositive rational")
    return math.log(q.numerator) - math.log(q.denominator)


def _nth_root(q: Fraction, n: int) -> float:
    if q == 0:
        return 0.0
    return math.exp(log_fraction(q) / n)


# ---------------------------------------------------------------------------
# word-distribution DP
# ---------------------------------------------------------------------------


def return_probability_series_dp(
    p: Presentation, m: Measure, n: int, cost_cap: int = DEFAULT_WALK_CAP
) -> list[Fraction]:
    """Exact p_{e,e,t} for t = 0..n via the word-distribution DP."""
    steps = [(w.syllables, q, p.letter_length(w)) for w, q in m.atoms.items()]
    lmax = max((l for _, _, l in steps), default=0)
    lengths: dict[tuple, int] = {(): 0}
    dist: dict[tuple, Fraction] = {(): Fraction(1)}
    out = [Fraction(1)]
    for t in range(1, n + 1):
        budget = (n - t) * lmax
        new: dict[tuple, Fraction] = {}
        for syl, mass in dist.items():
            for step_syl, q, _ in steps:
                w = p.reduce(syl + step_syl)
                key = w.syllables
                length = lengths.get(key)
                if length is None:
                    length = p.letter_length(w)
                    lengths[key] = length
                if length > budget:
                    continue
                new[key] = new.get(key, Fraction(0)) + mass * q
        if len(new) > cost_cap:
            raise CostCapError(
                f"walk DP exceeded {cost_cap} states at step {t}"
            )
        dist = new
        out.append(dist.get((), Fraction(0)))
    return out


def return_probability(
    p: Presentation, m: Measure, n: int, cost_cap: int = DEFAULT_WALK_CAP
) -> Fraction:
    """Exact probability that an n-step walk driven by m returns to e."""
    if n < 0:
        raise ValueError("walk length must be nonnegative")
    return return_probability_series_dp(p, m, n, cost_cap=cost_cap)[n]


# ---------------------------------------------------------------------------
# first-passage series engine
# ---------------------------------------------------------------------------


def first_passage_applicable(p: Presentation, m: Measure) -> bool:
    """True when every atom is the identity or a single syllable, with
    infinite-order factors stepped only by exponent +-1."""
    for w in m.atoms:
        if w.is_identity:
            continue
        if len(w.syllables) != 1:
            return False
        i, e = w.syllables[0]
        if p.order(i) == 0 and abs(e) != 1:
            return False
    return True


def return_probability_series_fp(p: Presentation, m: Measure, n: int) -> list[Fraction]:
    """Exact p_{e,e,t} for t = 0..n via first-passage series.

    Requires first_passage_applicable(p, m). All coefficient arithmetic is
    over the integers after scaling step weights by their common denominator.
    """
    if not first_passage_applicable(p, m):
        raise WalkgapError("measure not supported by the first-passage engine")
    denom = math.lcm(*(q.denominator for q in m.atoms.values())) if m.atoms else 1
    w_e = 0
    step_w: dict[tuple[int, int], int] = {}
    for w, q in m.atoms.items():
        scaled = int(q * denom)
        if w.is_identity:
            w_e = scaled
        else:
            i, e = w.syllables[0]
            step_w[(i, e)] = step_w.get((i, e), 0) + scaled

    # State keys: (i, u) for finite factors (u in 1..m-1); ("dn", i) and
    # ("up", i) for infinite factors (first passage from +1 resp. -1 to 0).
    states: list = []
    for i, order in enumerate(p.factors):
        if order == 0:
            states.extend([("dn", i), ("up", i)])
        else:
            states.extend((i, u) for u in range(1, order))
    series: dict = {s: [0] * (n + 1) for s in states}
    pushes: dict[int, list[tuple[tuple, int]]] = {i: [] for i in range(p.n_factors)}
    for (j, t), wt in step_w.items():
        key = ("dn", j) if p.order(j) == 0 and t == 1 else (
            ("up", j) if p.order(j) == 0 else (j, t)
        )
        for i in range(p.n_factors):
            if i != j:
                pushes[i].append((key, wt))
    push_series = {i: [0] * (n + 1) for i in range(p.n_factors)}

    def step_weight(i: int, t: int) -> int:
        return step_w.get((i, t), 0)

    f_hat = [0] * (n + 1)
    g_hat = [0] * (n + 1)
    g_hat[0] = 1

    for d in range(1, n + 1):
        for s in states:
            if isinstance(s, tuple) and s[0] in ("dn", "up"):
                kind, i = s
                down = step_weight(i, -1) if kind == "dn" else step_weight(i, 1)
                up = step_weight(i, 1) if kind == "dn" else step_weight(i, -1)
                cur = series[s]
                acc = down if d == 1 else 0
                if up:
                    conv = 0
                    for k in range(d):
                        if cur[k]:
                            conv += cur[k] * cur[d - 1 - k]
                    acc += up * conv
                if w_e:
                    acc += w_e * cur[d - 1]
                pi = push_series[i]
                conv = 0
                for k in range(d):
                    if pi[k]:
                        conv += pi[k] * cur[d - 1 - k]
                acc += conv
                series[s][d] = acc
            else:
                i, u = s
                order = p.factors[i]
                cur = series[s]
                acc = 0
                for (j, t), wt in step_w.items():
                    if j != i:
                        continue
                    v = (u + t) % order
                    if v == 0:
                        if d == 1:
                            acc += wt
                    else:
                        acc += wt * series[(i, v)][d - 1]
                if w_e:
                    acc += w_e * cur[d - 1]
                pi = push_series[i]
                conv = 0
                for k in range(d):
                    if pi[k]:
                        conv += pi[k] * cur[d - 1 - k]
                acc += conv
                series[s][d] = acc
        for i in range(p.n_factors):
            push_series[i][d] = sum(wt * series[key][d] for key, wt in pushes[i])
        acc = w_e if d == 1 else 0
        for (j, t), wt in step_w.items():
            order = p.order(j)
            key = ("dn", j) if order == 0 and t == 1 else (
                ("up", j) if order == 0 else (j, t)
            )
            acc += wt * series[key][d - 1]
        f_hat[d] = acc
        g_hat[d] = sum(f_hat[k] * g_hat[d - k] for k in range(1, d + 1) if f_hat[k])

    scale = 1
    out = []
    for d in range(n + 1):
        out.append(Fraction(g_hat[d], scale))
        scale *= denom
    return out


def return_probability_series(
    p: Presentation, m: Measure, n: int, cost_cap: int = DEFAULT_WALK_CAP
) -> tuple[list[Fraction], str]:
    """Exact return series by the cheapest applicable engine."""
    if first_passage_applicable(p, m):
        return return_probability_series_fp(p, m, n), "first-passage"
    return return_probability_series_dp(p, m, n, cost_cap=cost_cap), "word-dp"


# ---------------------------------------------------------------------------
# radius estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadiusEstimate:
    """Certified lower bounds and the ratio estimator for the walk radius.

    Each p_{e,e,2n}^(1/2n) is a true lower bound for the spectral radius;
    the sequence is nondecreasing by supermultiplicativity and converges to
    the radius. The ratios sqrt(p_{2n+2}/p_{2n}) converge much faster, with
    a universal first-order error term proportional to 1/n coming from the
    polynomial factor in the local limit behaviour, so ratio_estimate
    removes it by one Richardson step on the last two ratios. Uncertified,
    unlike the lower bounds.
    """

    lengths: tuple[int, ...]
    lower_bounds: tuple[float, ...]
    ratios: tuple[float, ...]
    best_lower: float
    ratio_estimate: float | None
    method: str

    def to_json_dict(self) -> dict:
        return {
            "lengths": list(self.lengths),
            "lower_bounds": list(self.lower_bounds),
            "ratios": list(self.ratios),
            "best_lower": self.best_lower,
            "ratio_estimate": self.ratio_estimate,
            "method": self.method,
        }


def radius_estimate(
    p: Presentation, m: Measure, n_max: int, cost_cap: int = DEFAULT_WALK_CAP
) -> RadiusEstimate:
    """Lower bounds p_{e,e,2n}^(1/2n) for 2n <= n_max plus the ratio estimator."""
    if not m.symmetric:
        raise NonSymmetricError("radius estimation requires a symmetric measure")
    if n_max < 2 or n_max % 2:
        raise ValueError("n_max must be an even integer >= 2")
    series, method = return_probability_series(p, m, n_max, cost_cap=cost_cap)
    lengths = tuple(range(2, n_max + 1, 2))
    bounds = tuple(_nth_root(series[t], t) for t in lengths)
    for a, b in zip(bounds, bounds[1:]):
        if b < a - MONOTONE_SLACK:
            raise WalkgapError(
                f"lower bounds not monotone: {a} then {b}; "
                "supermultiplicativity violated"
            )
    ratios = []
    for t in lengths[:-1]:
        if series[t] > 0 and series[t + 2] > 0:
            ratios.append(math.sqrt(float(series[t + 2] / series[t])))
    return RadiusEstimate(
        lengths=lengths,
        lower_bounds=bounds,
        ratios=tuple(ratios),
        best_lower=max(bounds) if bounds else 0.0,
        ratio_estimate=_extrapolate_ratios(ratios),
        method=method,
    )


def _extrapolate_ratios(ratios: list[float]) -> float | None:
    if not ratios:
        return None
    if len(ratios) == 1:
        return ratios[0]
    k = len(ratios)
    return k * ratios[-1] - (k - 1) * ratios[-2]
