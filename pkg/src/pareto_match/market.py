"""Tiered-slope market: exact outcome predicates and a small man-optimal oracle.

Men's compensation for utility ``u`` with woman ``j`` is ``u / lam**a[i][j]``;
woman ``j`` needs ``v - (b[i][j] * N + pi[i])`` to reach utility ``v`` with
man ``i``.  Reserves are ``pi[i] * lam**a[i][unmatched]`` and
``b[unmatched][j] * N``.  All arithmetic uses :class:`fractions.Fraction`.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence

from . import fourier_motzkin as fm
from .mechanism import Matching, PriorityAssignment, assign_priorities
from .model import UNMATCHED, Instance, RankUtilities, rank_utilities
from .verifier import SizeLimit, all_matchings


class NotIR(ValueError):
    pass


class NotStable(ValueError):
    pass


class DualityViolation(AssertionError):
    pass


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class TieredSlopeMarket:
    n_men: int
    n_women: int
    pi: tuple[int, ...]
    N: int
    lam: int
    util: RankUtilities
    r: tuple[Fraction, ...] = field(init=False)
    s: tuple[Fraction, ...] = field(init=False)

    def __post_init__(self) -> None:
        a, b = self.util.a, self.util.b
        object.__setattr__(self, "r", tuple(Fraction(self.pi[i] * self.lam ** a[i][UNMATCHED]) for i in range(self.n_men)))
        object.__setattr__(self, "s", tuple(Fraction(b[UNMATCHED][j] * self.N) for j in range(self.n_women)))

    @property
    def a(self):
        return self.util.a

    @property
    def b(self):
        return self.util.b

    def min_lambda(self) -> int:
        values = [(self.b[i][j] + 1) * self.N for i in range(self.n_men + 1) for j in range(self.n_women)]
        return max(values, default=self.N)

    def invariant_violations(self) -> list[str]:
        out = []
        if self.N < self.n_men + 1:
            out.append(f"N={self.N} < |I|+1")
        if self.pi and not (self.N > max(self.pi) >= min(self.pi) >= 1):
            out.append("N > max pi >= min pi >= 1 fails")
        if self.lam < self.min_lambda():
            out.append(f"lambda={self.lam} below max (b+1)N = {self.min_lambda()}")
        if any(x < 0 for row in self.b for x in row):
            out.append("negative woman utility")
        return out


def build_market(
    inst: Instance, pr: PriorityAssignment | None = None, N: int | None = None, lam: int | None = None
) -> TieredSlopeMarket:
    pr = pr or assign_priorities(inst)
    util = rank_utilities(inst)
    N = inst.n_men + 1 if N is None else N
    m = TieredSlopeMarket(inst.n_men, inst.n_women, pr.pi, N, 0, util)
    floor = m.min_lambda()
    if lam is not None and lam < floor:
        raise ValueError(f"lambda must be at least {floor}")
    m = TieredSlopeMarket(inst.n_men, inst.n_women, pr.pi, N, floor if lam is None else lam, util)
    problems = m.invariant_violations()
    if problems:
        raise ValueError("; ".join(problems))
    return m


@dataclass(frozen=True)
class Outcome:
    matching: Matching
    u: tuple[Fraction, ...]
    v: tuple[Fraction, ...]

    def to_dict(self) -> dict:
        return {
            "matching": list(self.matching.assignment),
            "u": [_fmt(x) for x in self.u],
            "v": [_fmt(x) for x in self.v],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Outcome":
        return cls(
            Matching(tuple(doc["matching"])),
            tuple(Fraction(x) for x in doc["u"]),
            tuple(Fraction(x) for x in doc["v"]),
        )


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def compensation(m: TieredSlopeMarket, i: int, j: int, u_i: Fraction, v_j: Fraction) -> tuple[Fraction, Fraction]:
    f = Fraction(u_i) / Fraction(m.lam) ** m.a[i][j]
    g = Fraction(v_j) - (m.b[i][j] * m.N + m.pi[i])
    return f, g


@dataclass(frozen=True)
class Classification:
    feasible: bool
    individually_rational: bool
    stable: bool
    witness: dict | None = None


def classify_outcome(m: TieredSlopeMarket, o: Outcome) -> Classification:
    mu = o.matching
    husband = mu.wife_to_husband(m.n_women)
    for i, j in mu.pairs():
        f, g = compensation(m, i, j, o.u[i], o.v[j])
        if f + g > 0:
            return Classification(False, False, False, {"pair": (i, j), "violated": "f + g <= 0"})
    for i in range(m.n_men):
        if mu[i] == UNMATCHED and o.u[i] != m.r[i]:
            return Classification(False, False, False, {"man": i, "violated": "u_i = r_i"})
    for j in range(m.n_women):
        if husband[j] == UNMATCHED and o.v[j] != m.s[j]:
            return Classification(False, False, False, {"woman": j, "violated": "v_j = s_j"})
    for i in range(m.n_men):
        if o.u[i] < m.r[i]:
            return Classification(True, False, False, {"man": i, "violated": "u_i >= r_i"})
    for j in range(m.n_women):
        if o.v[j] < m.s[j]:
            return Classification(True, False, False, {"woman": j, "violated": "v_j >= s_j"})
    for i in range(m.n_men):
        for j in range(m.n_women):
            f, g = compensation(m, i, j, o.u[i], o.v[j])
            if f + g < 0:
                return Classification(True, True, False, {"pair": (i, j), "violated": "f + g >= 0"})
    return Classification(True, True, True)


def utility_bounds_check(m: TieredSlopeMarket, o: Outcome, man_optimal: bool = False) -> list[str]:
    """Violations of the utility bounds of an individually rational outcome (empty if all hold).

    ``man_optimal`` adds the lower bound ``lam**a[i][mu(i)] <= u_i``.
    """
    if not classify_outcome(m, o).individually_rational:
        raise NotIR("utility bounds apply to individually rational outcomes only")
    lam = Fraction(m.lam)
    mu = o.matching
    husband = mu.wife_to_husband(m.n_women)
    failures = []
    for i in range(m.n_men):
        top = m.a[i][mu[i]]
        if not (0 < lam ** m.a[i][UNMATCHED] <= o.u[i]):
            failures.append(f"man {i}: lam^a[i][0] <= u_i fails")
        if not o.u[i] < lam ** (top + 1):
            failures.append(f"man {i}: u_i < lam^(a[i][mu(i)]+1) fails")
        if man_optimal and not lam**top <= o.u[i]:
            failures.append(f"man {i}: lam^a[i][mu(i)] <= u_i fails")
    for j in range(m.n_women):
        if not (0 <= m.b[UNMATCHED][j] * m.N <= o.v[j] < (m.b[husband[j]][j] + 1) * m.N):
            failures.append(f"woman {j}: b[0][j]N <= v_j < (b[mu(j)][j]+1)N fails")
    return failures


class Duality(NamedTuple):
    lhs: Fraction
    rhs: Fraction
    tight: bool


def duality_gap(m: TieredSlopeMarket, o: Outcome, mu2: Matching) -> Duality:
    """Both sides of the duality inequality of stable outcome ``o`` against ``mu2``.

    Raises :class:`DualityViolation` if the inequality fails or tightness does
    not coincide with stability of ``(mu2, u, v)``.
    """
    if not classify_outcome(m, o).stable:
        raise NotStable("duality applies to stable outcomes only")
    lam = Fraction(m.lam)
    husband = mu2.wife_to_husband(m.n_women)
    lhs = sum((o.u[i] / lam ** m.a[i][mu2[i]] - m.pi[i] for i in range(m.n_men)), Fraction(0))
    rhs = sum((m.b[husband[j]][j] * m.N - o.v[j] for j in range(m.n_women)), Fraction(0))
    result = Duality(lhs, rhs, lhs == rhs)
    if lhs < rhs:
        raise DualityViolation(f"duality fails: {lhs} < {rhs}")
    if result.tight != classify_outcome(m, Outcome(mu2, o.u, o.v)).stable:
        raise DualityViolation("tightness does not match stability of (mu2, u, v)")
    return result


# oracle


class _Affine:
    __slots__ = ("coeffs", "const")

    def __init__(self, coeffs: dict | None = None, const: Fraction = Fraction(0)):
        self.coeffs = coeffs or {}
        self.const = Fraction(const)

    def scaled(self, k: Fraction) -> "_Affine":
        return _Affine({v: c * k for v, c in self.coeffs.items()}, self.const * k)

    def __add__(self, other: "_Affine") -> "_Affine":
        coeffs = dict(self.coeffs)
        for v, c in other.coeffs.items():
            coeffs[v] = coeffs.get(v, 0) + c
        return _Affine(coeffs, self.const + other.const)

    def ge_zero(self) -> fm.Constraint:
        return fm.ge(self.coeffs, -self.const)


def _stable_region(m: TieredSlopeMarket, mu: Matching) -> tuple[list[fm.Constraint], list[_Affine]]:
    """Constraints on matched men's utilities for stable payoffs compatible with ``mu``.

    Unmatched agents sit at their reserves and each matched woman's utility is
    pinned by the tight pair constraint, so only matched men remain free.
    """
    lam = Fraction(m.lam)
    u = [_Affine({i: Fraction(1)}) if mu[i] != UNMATCHED else _Affine(const=m.r[i]) for i in range(m.n_men)]
    husband = mu.wife_to_husband(m.n_women)
    v = []
    for j in range(m.n_women):
        i = husband[j]
        if i == UNMATCHED:
            v.append(_Affine(const=m.s[j]))
        else:
            v.append(u[i].scaled(-1 / lam ** m.a[i][j]) + _Affine(const=Fraction(m.b[i][j] * m.N + m.pi[i])))
    cons = []
    for i in range(m.n_men):
        cons.append((u[i] + _Affine(const=-m.r[i])).ge_zero())
    for j in range(m.n_women):
        cons.append((v[j] + _Affine(const=-m.s[j])).ge_zero())
    for i in range(m.n_men):
        for j in range(m.n_women):
            slack = u[i].scaled(1 / lam ** m.a[i][j]) + v[j] + _Affine(const=-Fraction(m.b[i][j] * m.N + m.pi[i]))
            cons.append(slack.ge_zero())
    return cons, u


def max_stable_utilities(m: TieredSlopeMarket, mu: Matching) -> tuple[Fraction, ...] | None:
    """Per-man maximum utility over stable payoffs compatible with ``mu``; ``None`` if there are none."""
    cons, u = _stable_region(m, mu)
    if not fm.feasible(cons):
        return None
    out = []
    for i in range(m.n_men):
        if mu[i] == UNMATCHED:
            out.append(u[i].const)
        else:
            out.append(fm.maximize(cons, i))
    return tuple(out)


def stable_payoff_for(m: TieredSlopeMarket, mu: Matching, u: Sequence[Fraction]) -> Outcome | None:
    """The unique ``v`` making ``(mu, u, v)`` stable, if one exists."""
    husband = mu.wife_to_husband(m.n_women)
    lam = Fraction(m.lam)
    v = []
    for j in range(m.n_women):
        i = husband[j]
        if i == UNMATCHED:
            v.append(m.s[j])
        else:
            v.append(m.b[i][j] * m.N + m.pi[i] - Fraction(u[i]) / lam ** m.a[i][j])
    o = Outcome(mu, tuple(Fraction(x) for x in u), tuple(v))
    return o if classify_outcome(m, o).stable else None


@dataclass(frozen=True)
class OracleResult:
    outcome: Outcome
    man_optimal_matchings: tuple[Matching, ...]
    stable_matchings: tuple[Matching, ...]


def _max_for(args: tuple[TieredSlopeMarket, Matching]) -> tuple[Fraction, ...] | None:
    return max_stable_utilities(*args)


def man_optimal(m: TieredSlopeMarket, cap: int = 3, parallel: int = 1) -> OracleResult:
    """Man-optimal outcome by enumerating matchings and projecting each stable-payoff polyhedron.

    The componentwise maximum of the per-matching maxima must itself be a
    stable payoff for some matching; :class:`OracleError` is raised otherwise.
    """
    if m.n_men > cap or m.n_women > cap:
        raise SizeLimit(f"oracle is limited to {cap} men and {cap} women")
    matchings = list(all_matchings(m.n_men, m.n_women))
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            tops = list(pool.map(_max_for, [(m, mu) for mu in matchings]))
    else:
        tops = [max_stable_utilities(m, mu) for mu in matchings]
    maxima = {mu: top for mu, top in zip(matchings, tops) if top is not None}
    if not maxima:
        raise OracleError("no stable outcome found")
    best = tuple(max(t[i] for t in maxima.values()) for i in range(m.n_men))
    optimal = []
    outcome = None
    for mu in maxima:
        o = stable_payoff_for(m, mu, best)
        if o is not None:
            optimal.append(mu)
            outcome = outcome or o
    if outcome is None:
        raise OracleError("componentwise maximum of stable utilities is not itself stable")
    return OracleResult(outcome, tuple(optimal), tuple(maxima))


def man_optimal_oracle(m: TieredSlopeMarket, cap: int = 3, parallel: int = 1) -> Outcome:
    return man_optimal(m, cap, parallel).outcome
