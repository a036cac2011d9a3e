"""Exact Fourier-Motzkin elimination over rationals.

A constraint ``({x: 2, y: -1}, 5)`` reads ``2x - y <= 5``.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Hashable, Iterable, Mapping

Var = Hashable
Constraint = tuple[Mapping[Var, Fraction], Fraction]


def le(coeffs: Mapping[Var, object], bound: object) -> Constraint:
    return {v: Fraction(c) for v, c in coeffs.items() if c}, Fraction(bound)


def ge(coeffs: Mapping[Var, object], bound: object) -> Constraint:
    return le({v: -Fraction(c) for v, c in coeffs.items()}, -Fraction(bound))


def eq(coeffs: Mapping[Var, object], bound: object) -> list[Constraint]:
    return [le(coeffs, bound), ge(coeffs, bound)]


def _normalize(constraints: Iterable[Constraint]) -> list[Constraint]:
    """Scale so the first coefficient has magnitude 1 and keep the tightest bound per direction."""
    best: dict[tuple, Fraction] = {}
    for coeffs, bound in constraints:
        coeffs = {v: c for v, c in coeffs.items() if c}
        if coeffs:
            key_vars = sorted(coeffs, key=repr)
            scale = abs(coeffs[key_vars[0]])
            key = tuple((v, coeffs[v] / scale) for v in key_vars)
            bound = bound / scale
        else:
            key = ()
        if key not in best or bound < best[key]:
            best[key] = bound
    return [(dict(k), b) for k, b in best.items()]


def eliminate(constraints: Iterable[Constraint], var: Var) -> list[Constraint]:
    upper, lower, rest = [], [], []
    for coeffs, bound in constraints:
        c = coeffs.get(var, 0)
        (upper if c > 0 else lower if c < 0 else rest).append((coeffs, bound, c))
    out = [(coeffs, bound) for coeffs, bound, _ in rest]
    for cu, bu, au in upper:
        for cl, bl, al in lower:
            # au*x + ... <= bu and al*x + ... <= bl with au > 0 > al
            combined: dict[Var, Fraction] = {}
            for v, c in cu.items():
                combined[v] = combined.get(v, 0) + c / au
            for v, c in cl.items():
                combined[v] = combined.get(v, 0) - c / al
            combined.pop(var, None)
            out.append((combined, bu / au - bl / al))
    return _normalize(out)


def feasible(constraints: Iterable[Constraint]) -> bool:
    cons = _normalize(constraints)
    for var in sorted({v for coeffs, _ in cons for v in coeffs}, key=repr):
        cons = eliminate(cons, var)
    return all(bound >= 0 for coeffs, bound in cons if not coeffs)


def bounds(constraints: Iterable[Constraint], var: Var) -> tuple[Fraction | None, Fraction | None] | None:
    """(min, max) of ``var`` over the polyhedron; ``None`` entries mean unbounded, ``None`` overall means empty."""
    cons = _normalize(constraints)
    others = sorted({v for coeffs, _ in cons for v in coeffs if v != var}, key=repr)
    for other in others:
        cons = eliminate(cons, other)
    lo: Fraction | None = None
    hi: Fraction | None = None
    for coeffs, bound in cons:
        c = coeffs.get(var, 0)
        if c == 0:
            if bound < 0:
                return None
        elif c > 0:
            hi = bound / c if hi is None else min(hi, bound / c)
        else:
            lo = bound / c if lo is None else max(lo, bound / c)
    if lo is not None and hi is not None and lo > hi:
        return None
    return lo, hi


def maximize(constraints: Iterable[Constraint], var: Var) -> Fraction | None:
    """Maximum of ``var``; ``None`` if the polyhedron is empty.  Raises if unbounded."""
    result = bounds(constraints, var)
    if result is None:
        return None
    if result[1] is None:
        raise ValueError(f"{var!r} is unbounded above")
    return result[1]
