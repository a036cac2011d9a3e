import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from pareto_match import fourier_motzkin as fm


def test_box():
    cons = [fm.le({"x": 1}, 3), fm.ge({"x": 1}, -2), fm.le({"x": 1, "y": 1}, 4), fm.ge({"y": 1}, 0)]
    assert fm.bounds(cons, "x") == (-2, 3)
    assert fm.maximize(cons, "y") == 6


def test_equalities():
    cons = fm.eq({"x": 1, "y": -1}, 0) + [fm.le({"y": 2}, 1)]
    assert fm.maximize(cons, "x") == Fraction(1, 2)


def test_empty_and_unbounded():
    assert fm.bounds([fm.le({"x": 1}, 0), fm.ge({"x": 1}, 1)], "x") is None
    assert not fm.feasible([fm.le({}, -1)])
    with pytest.raises(ValueError):
        fm.maximize([fm.ge({"x": 1}, 0)], "x")


@settings(max_examples=60)
@given(st.integers(0, 2**32 - 1))
def test_maximize_matches_linprog(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    cons = [fm.le({k: 1}, 10) for k in range(n)] + [fm.ge({k: 1}, -10) for k in range(n)]
    for _ in range(rng.randint(0, 5)):
        cons.append(fm.le({k: rng.randint(-3, 3) for k in range(n)}, rng.randint(-5, 5)))
    A = [[float(c.get(k, 0)) for k in range(n)] for c, _ in cons]
    b = [float(bound) for _, bound in cons]
    obj = [0.0] * n
    obj[0] = -1.0
    res = linprog(obj, A_ub=A, b_ub=b, bounds=[(None, None)] * n, method="highs")
    exact = fm.maximize(cons, 0)
    if res.status == 2:
        assert exact is None
    else:
        assert res.status == 0
        assert abs(float(exact) + res.fun) < 1e-7
