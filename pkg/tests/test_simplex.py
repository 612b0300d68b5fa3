import random
from fractions import Fraction

import pytest

from cbd.simplex import check_farkas, solve

F = Fraction


def random_lp(rng, m, n):
    cols = [{i: rng.randint(-3, 3) for i in range(m) if rng.random() < 0.6} for _ in range(n)]
    b = [F(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(m)]
    return cols, b


def test_tiny_feasible():
    # x0 + x1 = 1, x0 - x1 = 1/2
    res = solve([{0: 1, 1: 1}, {0: 1, 1: -1}], [1, F(1, 2)])
    assert res.feasible
    assert res.x == {0: F(3, 4), 1: F(1, 4)}


def test_tiny_infeasible():
    # x0 = 1 and x0 = 2
    cols = [{0: 1, 1: 1}]
    res = solve(cols, [1, 2])
    assert res.status == "infeasible"
    assert check_farkas(cols, [1, 2], res.farkas)


def test_unbounded():
    res = solve([{0: 1}, {0: -1}], [1], c=[0, -1])
    assert res.status == "unbounded"


def test_check_farkas_rejects():
    cols = [{0: 1}]
    assert not check_farkas(cols, [1], [0])
    assert not check_farkas(cols, [1], [1, 1])
    assert not check_farkas(cols, [1], [-1])


def test_against_highs():
    linprog = pytest.importorskip("scipy.optimize").linprog
    rng = random.Random(1234)
    seen = set()
    for _ in range(300):
        m, n = rng.randint(1, 5), rng.randint(1, 8)
        cols, b = random_lp(rng, m, n)
        c = [rng.randint(-3, 3) for _ in range(n)]
        res = solve(cols, b, c)
        a_eq = [[float(col.get(i, 0)) for col in cols] for i in range(m)]
        ref = linprog([float(v) for v in c], A_eq=a_eq, b_eq=[float(v) for v in b],
                      bounds=(0, None), method="highs")
        expected = {0: "optimal", 2: "infeasible", 3: "unbounded"}[ref.status]
        assert res.status == expected
        seen.add(expected)
        if expected == "optimal":
            assert abs(float(res.objective) - ref.fun) < 1e-7
            for i in range(m):
                assert sum((F(col.get(i, 0)) * res.x.get(j, 0) for j, col in enumerate(cols)), F(0)) == b[i]
            assert all(v >= 0 for v in res.x.values())
        elif expected == "infeasible":
            assert check_farkas(cols, b, res.farkas)
    assert seen == {"optimal", "infeasible", "unbounded"}
