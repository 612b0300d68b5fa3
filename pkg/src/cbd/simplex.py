"""Exact two-phase simplex over the rationals.

Solves ``min c.x  s.t.  A x = b, x >= 0`` with no rounding anywhere.
Tableau rows are kept as Python integers with one positive denominator
per row and are gcd-reduced after every pivot, so entry growth stays
modest. Infeasible problems return a Farkas vector ``y`` with
``y.A >= 0`` componentwise and ``y.b < 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

# Consecutive degenerate Dantzig pivots tolerated before switching to Bland's rule.
_DEGENERATE_STREAK = 50


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: dict[int, Fraction] = field(default_factory=dict)
    objective: Fraction | None = None
    farkas: list[Fraction] | None = None
    pivots: int = 0

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


def _lcm_den(values) -> int:
    out = 1
    for v in values:
        d = Fraction(v).denominator
        out = out * d // math.gcd(out, d)
    return out


class _Tableau:
    def __init__(self, rows: list[list[int]], n: int):
        self.rows = rows
        self.den = [1] * len(rows)
        self.n = n
        self.m = len(rows)
        self.basis = [n + i for i in range(self.m)]
        self.obj: list[int] = []
        self.obj_den = 1
        self.pivots = 0

    @staticmethod
    def _reduce(row: list[int], den: int) -> tuple[list[int], int]:
        g = math.gcd(den, *row)
        if g > 1:
            row = [v // g for v in row]
            den //= g
        return row, den

    def pivot(self, r: int, s: int) -> None:
        tr = self.rows[r]
        if tr[s] < 0:
            tr = [-v for v in tr]
        # row r now represents itself divided by its pivot entry
        tr, dr = self._reduce(tr, tr[s])
        self.rows[r], self.den[r] = tr, dr
        for i in range(self.m):
            if i == r:
                continue
            ti = self.rows[i]
            a = ti[s]
            if a:
                new = [dr * x - a * y for x, y in zip(ti, tr)]
                self.rows[i], self.den[i] = self._reduce(new, self.den[i] * dr)
        a = self.obj[s]
        if a:
            new = [dr * x - a * y for x, y in zip(self.obj, tr)]
            self.obj, self.obj_den = self._reduce(new, self.obj_den * dr)
        self.basis[r] = s
        self.pivots += 1

    def run(self, eligible: int) -> str:
        """Minimize the current objective row over columns < ``eligible``."""
        obj = None
        bland = False
        streak = 0
        while True:
            obj = self.obj
            if bland:
                s = next((j for j in range(eligible) if obj[j] < 0), None)
            else:
                s = min(range(eligible), key=obj.__getitem__)
                if obj[s] >= 0:
                    s = None
            if s is None:
                return "optimal"
            best = None
            for i in range(self.m):
                a = self.rows[i][s]
                if a > 0:
                    rhs = self.rows[i][-1]
                    if best is None:
                        best = (i, rhs, a)
                        continue
                    _, brhs, ba = best
                    lhs_cmp = rhs * ba
                    rhs_cmp = brhs * a
                    if lhs_cmp < rhs_cmp or (lhs_cmp == rhs_cmp and self.basis[i] < self.basis[best[0]]):
                        best = (i, rhs, a)
            if best is None:
                return "unbounded"
            if best[1] == 0:
                streak += 1
                if streak > _DEGENERATE_STREAK:
                    bland = True
            else:
                streak = 0
            self.pivot(best[0], s)

    def value(self, r: int) -> Fraction:
        return Fraction(self.rows[r][-1], self.den[r])


def solve(columns: Sequence[Mapping[int, Fraction | int]], b: Sequence[Fraction | int],
          c: Sequence[Fraction | int] | None = None) -> LPResult:
    """Exact LP. ``columns[j]`` maps row index to the coefficient A[i][j].

    With ``c`` omitted only feasibility is decided (the returned point is a
    vertex of the feasible region).
    """
    m, n = len(b), len(columns)
    b = [Fraction(v) for v in b]
    row_entries: list[dict[int, Fraction]] = [dict() for _ in range(m)]
    for j, col in enumerate(columns):
        for i, a in col.items():
            if a:
                row_entries[i][j] = Fraction(a)

    scale = []
    rows = []
    width = n + m + 1
    for i in range(m):
        lcm = _lcm_den(list(row_entries[i].values()) + [b[i]])
        s = -lcm if b[i] < 0 else lcm
        scale.append(s)
        row = [0] * width
        for j, a in row_entries[i].items():
            row[j] = int(a * s)
        row[n + i] = 1
        row[-1] = int(b[i] * s)
        rows.append(row)

    tab = _Tableau(rows, n)
    obj = [0] * width
    for row in rows:
        for j in range(n):
            if row[j]:
                obj[j] -= row[j]
        obj[-1] -= row[-1]
    tab.obj = obj
    tab.run(n)

    infeasibility = Fraction(-tab.obj[-1], tab.obj_den)
    if infeasibility > 0:
        # phase-1 duals y_i = 1 - reduced cost of artificial i; -y certifies
        y = [1 - Fraction(tab.obj[n + i], tab.obj_den) for i in range(m)]
        farkas = [-yi * s for yi, s in zip(y, scale)]
        lcm = _lcm_den(farkas)
        ints = [int(v * lcm) for v in farkas]
        g = math.gcd(*ints) or 1
        return LPResult("infeasible", farkas=[Fraction(v // g) for v in ints], pivots=tab.pivots)

    # basic artificials are at zero; pivot them out where a structural entry exists
    for r in range(m):
        if tab.basis[r] >= n:
            j = next((j for j in range(n) if tab.rows[r][j]), None)
            if j is not None:
                tab.pivot(r, j)

    status = "optimal"
    if c is not None:
        cost = [Fraction(v) for v in c]
        reduced = cost + [Fraction(0)] * m + [Fraction(0)]
        for r in range(m):
            cb = cost[tab.basis[r]] if tab.basis[r] < n else Fraction(0)
            if cb:
                row, d = tab.rows[r], tab.den[r]
                for j in range(n):
                    if row[j]:
                        reduced[j] -= cb * Fraction(row[j], d)
                reduced[-1] -= cb * Fraction(row[-1], d)
        for r in range(m):
            reduced[tab.basis[r]] = Fraction(0)
        lcm = _lcm_den(reduced)
        tab.obj = [int(v * lcm) for v in reduced]
        tab.obj_den = lcm
        status = tab.run(n)

    x = {}
    for r in range(m):
        if tab.basis[r] < n:
            v = tab.value(r)
            if v:
                x[tab.basis[r]] = v
    objective = None
    if c is not None and status == "optimal":
        objective = sum((Fraction(c[j]) * v for j, v in x.items()), Fraction(0))
    return LPResult(status, x=x, objective=objective, pivots=tab.pivots)


def check_farkas(columns: Sequence[Mapping[int, Fraction | int]], b: Sequence[Fraction | int],
                 y: Sequence[Fraction | int]) -> bool:
    if len(y) != len(b):
        return False
    if sum((Fraction(yi) * Fraction(bi) for yi, bi in zip(y, b)), Fraction(0)) >= 0:
        return False
    return all(sum((Fraction(y[i]) * Fraction(a) for i, a in col.items()), Fraction(0)) >= 0
               for col in columns)
