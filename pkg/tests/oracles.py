"""Independent reference computations used by the tests.

None of these go through the coupling LP builder or the staircase code:
they set up small LPs directly over the 2^k joint outcomes and solve
them with the exact simplex engine (itself cross-checked against a
floating-point solver in test_simplex.py), or enumerate outright.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

from cbd import simplex

PLUS, MINUS = 1, -1


def atoms(k: int) -> list[tuple[int, ...]]:
    return list(itertools.product((PLUS, MINUS), repeat=k))


def _marginal_rows(ps):
    """Columns and rhs fixing Pr[coordinate i = +1] = ps[i] and total mass 1."""
    k = len(ps)
    cols = []
    for a in atoms(k):
        col = {0: 1}
        for i, v in enumerate(a):
            if v == PLUS:
                col[1 + i] = 1
        cols.append(col)
    return cols, [Fraction(1)] + [Fraction(p) for p in ps]


def max_equality(ps, subset) -> Fraction:
    """Largest Pr[all coordinates in subset equal] over couplings with marginals ps."""
    cols, b = _marginal_rows(ps)
    c = [-1 if len({a[i] for i in subset}) == 1 else 0 for a in atoms(len(ps))]
    res = simplex.solve(cols, b, c)
    assert res.status == "optimal"
    return -res.objective


def pairwise_maximal_region(ps):
    """Columns/rhs of the couplings whose consecutive pairs are all maximally equal.

    ``ps`` must be sorted ascending; the equality targets come from
    max_equality, not from any closed form.
    """
    cols, b = _marginal_rows(ps)
    k = len(ps)
    for l in range(k - 1):
        row = len(b)
        b.append(max_equality(ps, (l, l + 1)))
        for a, col in zip(atoms(k), cols):
            if a[l] == a[l + 1]:
                col[row] = 1
    return cols, b


def unique_pairwise_maximal(ps) -> dict[tuple[int, ...], Fraction]:
    """The pairwise-maximal coupling, asserting that the region is a single point.

    Every atom's mass is minimized and maximized exactly; the region is a
    point iff min == max for all atoms.
    """
    cols, b = pairwise_maximal_region(ps)
    out = {}
    for j, a in enumerate(atoms(len(ps))):
        c = [0] * len(cols)
        c[j] = 1
        lo = simplex.solve(cols, b, c)
        c[j] = -1
        hi = simplex.solve(cols, b, c)
        assert lo.status == hi.status == "optimal", "pairwise-maximal region is empty"
        assert lo.objective == -hi.objective, f"atom {a} not determined: {lo.objective} .. {-hi.objective}"
        if lo.objective:
            out[a] = lo.objective
    return out


def brute_odd_sign_max(values) -> Fraction:
    """Enumerate every sign vector with an odd number of -1's."""
    values = [Fraction(v) for v in values]
    scale = math.lcm(*(v.denominator for v in values))
    ints = [int(v * scale) for v in values]
    best = None
    for signs in itertools.product((1, -1), repeat=len(ints)):
        if signs.count(-1) % 2 == 1:
            total = sum(s * v for s, v in zip(signs, ints))
            best = total if best is None else max(best, total)
    return Fraction(best, scale)
