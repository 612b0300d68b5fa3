"""Exact coupling-feasibility decisions for arbitrary small systems.

A system is noncontextual iff some joint distribution over all of its
measurement cells (an "atom" is one +/-1 assignment to every cell)
reproduces each context table and, along each connection sorted by
Pr[+1], makes consecutive pairs equal with probability

    1                          (traditional mode)
    1 - (p_(l+1) - p_l)        (CbD mode, the maximal value)

``build_lp`` writes this system out over all 2^N atoms. ``decide`` does
not solve it directly: the pair rows force every atom that breaks the
chain pattern of some connection to zero, and cells whose connection is
a singleton can be glued on afterwards from the conditional context
tables, so the solver only sees the remaining product of chain patterns.
Witnesses are expanded back to all N cells; Farkas vectors are lifted
back to the full row set and re-checked against all 2^N atoms.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import simplex
from .cyclic import CyclicVerdict, cyclic_contextuality, detect_cyclic
from .model import (
    MINUS,
    PLUS,
    OutcomeTuple,
    System,
    ValidationError,
    all_tuples,
    connectedness_report,
    connections,
    format_rational,
    format_tuple,
    marginal,
)

MODES = ("cbd", "traditional")
DEFAULT_MAX_CELLS = 20
ENV_MAX_CELLS = "CBD_MAX_CELLS"
COUPLING_FORMAT = "cbd-coupling/1"
CERTIFICATE_FORMAT = "cbd-certificate/1"


class SizeLimitError(ValueError):
    def __init__(self, n_cells: int, limit: int):
        self.n_cells = n_cells
        self.limit = limit
        super().__init__(
            f"system has N={n_cells} measurement cells, over the limit of {limit} "
            f"(raise it with --max-cells or {ENV_MAX_CELLS})"
        )


def default_max_cells() -> int:
    raw = os.environ.get(ENV_MAX_CELLS)
    if raw is None or raw == "":
        return DEFAULT_MAX_CELLS
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{ENV_MAX_CELLS} must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValidationError(f"{ENV_MAX_CELLS} must be positive")
    return value


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


@dataclass(frozen=True)
class Constraint:
    """One equality row of the coupling LP."""

    kind: str  # "normalization", "context" or "pair"
    context: str | None = None
    outcomes: OutcomeTuple | None = None
    property: str | None = None
    contexts: tuple[str, str] | None = None

    def describe(self) -> dict:
        if self.kind == "normalization":
            return {"kind": "normalization"}
        if self.kind == "context":
            return {"kind": "context", "context": self.context, "tuple": format_tuple(self.outcomes)}
        return {"kind": "pair", "property": self.property, "contexts": list(self.contexts)}


@dataclass(frozen=True)
class _Pair:
    row: int
    left: int  # cell index of the lower-p measurement
    right: int
    strict: bool  # p_left < p_right in CbD mode


@dataclass(frozen=True)
class CouplingLP:
    """Equality system ``A x = b`` over the 2^N atoms; A is 0/1.

    Atom index bits run over ``cells`` most-significant first, 0 for +1
    and 1 for -1, so atom 0 is all +1.
    """

    system: System
    mode: str
    cells: tuple[tuple[str, str], ...]
    rows: tuple[Constraint, ...]
    rhs: tuple[Fraction, ...]
    _context_rows: tuple = field(repr=False, compare=False)  # (cell idx tuple, first row)
    _pairs: tuple[_Pair, ...] = field(repr=False, compare=False)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_atoms(self) -> int:
        return 1 << len(self.cells)

    def atom(self, index: int) -> OutcomeTuple:
        n = len(self.cells)
        return tuple(MINUS if (index >> (n - 1 - i)) & 1 else PLUS for i in range(n))

    def atom_index(self, outcomes: Sequence[int]) -> int:
        index = 0
        for v in outcomes:
            index = (index << 1) | (v == MINUS)
        return index

    def column(self, outcomes: Sequence[int]) -> list[int]:
        """Row indices with coefficient 1 for the atom ``outcomes``."""
        rows = [0]
        for cell_idx, first in self._context_rows:
            t = 0
            for i in cell_idx:
                t = (t << 1) | (outcomes[i] == MINUS)
            rows.append(first + t)
        for pair in self._pairs:
            if outcomes[pair.left] == outcomes[pair.right]:
                rows.append(pair.row)
        return rows

    def dense(self) -> list[list[int]]:
        """Full constraint matrix (rows x atoms); only sensible for small N."""
        a = [[0] * self.n_atoms for _ in self.rows]
        for j in range(self.n_atoms):
            for i in self.column(self.atom(j)):
                a[i][j] = 1
        return a

    def atom_values(self, y: Sequence[Fraction]) -> np.ndarray:
        """y.A_j for every atom j, scaled by a positive integer (signs preserved)."""
        y = [Fraction(v) for v in y]
        lcm = 1
        for v in y:
            lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        ints = [int(v * lcm) for v in y]
        n = len(self.cells)
        bound = sum(abs(v) for v in ints)
        dtype = np.int64 if bound < 2**62 else object
        idx = np.arange(1 << n, dtype=np.int64)
        bits = [(idx >> (n - 1 - i)) & 1 for i in range(n)]
        total = np.full(1 << n, ints[0], dtype=dtype)
        for cell_idx, first in self._context_rows:
            t = np.zeros(1 << n, dtype=np.int64)
            for i in cell_idx:
                t = (t << 1) | bits[i]
            vals = np.array(ints[first:first + (1 << len(cell_idx))], dtype=dtype)
            total = total + vals[t]
        for pair in self._pairs:
            eq = (bits[pair.left] == bits[pair.right]).astype(np.int64)
            total = total + eq.astype(dtype) * ints[pair.row]
        return total


def build_lp(s: System, mode: str = "cbd", max_cells: int | None = None) -> CouplingLP:
    _check_mode(mode)
    limit = default_max_cells() if max_cells is None else max_cells
    cells = tuple(s.cells)
    if len(cells) > limit:
        raise SizeLimitError(len(cells), limit)
    cell_index = {cell: i for i, cell in enumerate(cells)}

    rows: list[Constraint] = [Constraint("normalization")]
    rhs: list[Fraction] = [Fraction(1)]
    context_rows = []
    for c in s.contexts:
        cell_idx = tuple(cell_index[(p, c.context)] for p in c.properties)
        context_rows.append((cell_idx, len(rows)))
        for key in all_tuples(len(c.properties)):
            rows.append(Constraint("context", context=c.context, outcomes=key))
            rhs.append(c.prob(key))

    pairs = []
    for conn in connections(s):
        for (c1, p1), (c2, p2) in zip(conn.entries, conn.entries[1:]):
            pairs.append(_Pair(len(rows), cell_index[(conn.property, c1)],
                               cell_index[(conn.property, c2)], mode == "cbd" and p1 < p2))
            rows.append(Constraint("pair", property=conn.property, contexts=(c1, c2)))
            rhs.append(Fraction(1) if mode == "traditional" else 1 - (p2 - p1))
    return CouplingLP(s, mode, cells, tuple(rows), tuple(rhs), tuple(context_rows), tuple(pairs))


# -- verification -------------------------------------------------------------

def _lp_for(s_or_lp, mode: str | None) -> CouplingLP:
    if isinstance(s_or_lp, CouplingLP):
        return s_or_lp
    return build_lp(s_or_lp, mode or "cbd", max_cells=len(s_or_lp.cells))


def verify_witness(s: System | CouplingLP, mode: str | None,
                   witness: Mapping[Sequence[int], Fraction]) -> bool:
    """True iff ``witness`` (atom tuple -> mass) satisfies every LP row exactly."""
    lp = _lp_for(s, mode)
    n = lp.n_cells
    totals = [Fraction(0)] * len(lp.rows)
    for key, mass in witness.items():
        key = tuple(key)
        if len(key) != n:
            raise ValidationError(f"witness atom has arity {len(key)}, expected {n}")
        if any(v not in (PLUS, MINUS) for v in key):
            raise ValidationError("witness atoms must be +1/-1 tuples")
        mass = Fraction(mass)
        if mass < 0:
            return False
        for i in lp.column(key):
            totals[i] += mass
    return all(t == b for t, b in zip(totals, lp.rhs))


def verify_certificate(s: System | CouplingLP, mode: str | None,
                       certificate: Sequence[Fraction]) -> bool:
    """Farkas check: y.b < 0 and y.A_j >= 0 for every one of the 2^N atoms.

    A vector of the wrong length certifies nothing and yields False.
    """
    lp = _lp_for(s, mode)
    if len(certificate) != len(lp.rows):
        return False
    y = [Fraction(v) for v in certificate]
    if sum((a * b for a, b in zip(y, lp.rhs)), Fraction(0)) >= 0:
        return False
    return bool((lp.atom_values(y) >= 0).all())


# -- decision -----------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    mode: str
    contextual: bool
    method: str  # "lp" or "cyclic-formula"
    cells: tuple[tuple[str, str], ...]
    witness: dict[OutcomeTuple, Fraction] | None = field(default=None, hash=False)
    certificate: tuple[Fraction, ...] | None = None
    cyclic: CyclicVerdict | None = None
    lp: CouplingLP | None = field(default=None, repr=False, compare=False, hash=False)

    @property
    def methods(self) -> list[str]:
        if self.method == "lp" and self.cyclic is not None:
            return ["cyclic-formula", "lp"]
        return [self.method]


def _chain_patterns(ps: Sequence[Fraction], mode: str) -> list[OutcomeTuple]:
    """Connection patterns the pair rows leave possible (first l coords -1)."""
    k = len(ps)
    out = []
    for l in range(k + 1):
        if l in (0, k) or (mode == "cbd" and ps[l - 1] < ps[l]):
            out.append((MINUS,) * l + (PLUS,) * (k - l))
    return out


def _solve(lp: CouplingLP):
    s, mode = lp.system, lp.mode
    cell_index = {cell: i for i, cell in enumerate(lp.cells)}
    conns = [c for c in connections(s) if len(c) > 1]
    kept_cells = [[cell_index[(c.property, ctx)] for ctx in c.contexts] for c in conns]
    patterns = [_chain_patterns(c.probabilities, mode) for c in conns]
    kept = {i for group in kept_cells for i in group}

    # reduced rows: normalization + each context marginalized onto its kept cells
    red_rows = 1
    red_b = [Fraction(1)]
    ctx_info = []
    for c in s.contexts:
        kp = [p for p in c.properties if cell_index[(p, c.context)] in kept]
        loose = [p for p in c.properties if cell_index[(p, c.context)] not in kept]
        first = None
        if kp:
            first = red_rows
            marg = marginal(c, kp)
            for key in all_tuples(len(kp)):
                red_b.append(marg.prob(key))
            red_rows += 1 << len(kp)
        ctx_info.append((c, kp, loose, first))

    atoms = []
    columns = []
    for combo in itertools.product(*patterns):
        values = {}
        for group, pattern in zip(kept_cells, combo):
            for i, v in zip(group, pattern):
                values[i] = v
        col = {0: 1}
        for c, kp, _, first in ctx_info:
            if first is None:
                continue
            t = 0
            for p in kp:
                t = (t << 1) | (values[cell_index[(p, c.context)]] == MINUS)
            col[first + t] = 1
        atoms.append(values)
        columns.append(col)

    result = simplex.solve(columns, red_b)
    if result.feasible:
        return _expand_witness(lp, cell_index, ctx_info, atoms, result.x), None
    return None, _lift_certificate(lp, cell_index, ctx_info, result.farkas)


def _expand_witness(lp, cell_index, ctx_info, atoms, x):
    """Glue singleton-connection cells onto the reduced solution."""
    witness: dict[OutcomeTuple, Fraction] = {}
    n = lp.n_cells
    for j, mass in x.items():
        values = atoms[j]
        branches = [([], mass)]
        for c, kp, loose, _ in ctx_info:
            if not loose:
                continue
            idx_k = [c.index(p) for p in kp]
            idx_l = [c.index(p) for p in loose]
            given = tuple(values[cell_index[(p, c.context)]] for p in kp)
            cond = {}
            for key, prob in c.table.items():
                if tuple(key[i] for i in idx_k) == given:
                    cond[tuple(key[i] for i in idx_l)] = prob
            norm = sum(cond.values(), Fraction(0))
            loose_cells = [cell_index[(p, c.context)] for p in loose]
            branches = [
                (assign + list(zip(loose_cells, sub)), w * prob / norm)
                for assign, w in branches
                for sub, prob in cond.items()
            ]
        for assign, w in branches:
            full = dict(values)
            full.update(assign)
            key = tuple(full[i] for i in range(n))
            witness[key] = witness.get(key, Fraction(0)) + w
    return dict(sorted(witness.items(), reverse=True))


def _lift_certificate(lp, cell_index, ctx_info, y_red):
    y = [Fraction(0)] * len(lp.rows)
    y[0] = y_red[0]
    for (cell_idx, first), (c, kp, _, red_first) in zip(lp._context_rows, ctx_info):
        if red_first is None:
            continue
        pos = [c.index(p) for p in kp]
        for t, key in enumerate(all_tuples(len(c.properties))):
            r = 0
            for i in pos:
                r = (r << 1) | (key[i] == MINUS)
            y[first + t] = y_red[red_first + r]

    # Atoms outside the reduced space may still price negative. Each such atom
    # breaks some pair's chain; add that pair's zero-rhs row combination, which
    # is positive on exactly the atoms it rules out.
    values = lp.atom_values(y)
    scale = _positive_scale(y)
    remaining = values < 0
    if remaining.any():
        n = lp.n_cells
        idx = np.arange(1 << n, dtype=np.int64)
        bits = lambda i: (idx >> (n - 1 - i)) & 1  # noqa: E731
        for pair in lp._pairs:
            if not remaining.any():
                break
            bl, br = bits(pair.left), bits(pair.right)
            if pair.strict:
                hit = (bl == 0) & (br == 1)  # (+1, -1)
                coef = 2
            else:
                hit = bl != br
                coef = 1
            sel = remaining & hit
            if not sel.any():
                continue
            worst = Fraction(int(-values[sel].min()), scale)
            for row, w in _zero_combination(lp, pair).items():
                y[row] += worst / coef * w
            remaining &= ~hit
        if remaining.any():
            raise RuntimeError("could not lift reduced Farkas certificate")
    lcm = 1
    for v in y:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
    ints = [int(v * lcm) for v in y]
    g = math.gcd(*ints) or 1
    return tuple(Fraction(v // g) for v in ints)


def _positive_scale(y) -> int:
    lcm = 1
    for v in y:
        lcm = lcm * Fraction(v).denominator // math.gcd(lcm, Fraction(v).denominator)
    return lcm


def _zero_combination(lp: CouplingLP, pair: _Pair) -> dict[int, int]:
    """Rows whose sum has rhs 0 and is nonnegative on every atom.

    Non-strict pairs: normalization - pair, equal to [S_l != S_r].
    Strict CbD pairs: normalization - pair + Pr[S_l=+1] - Pr[S_r=+1],
    equal to 2 [S_l=+1, S_r=-1].
    """
    w = {0: 1, pair.row: -1}
    if pair.strict:
        for cell, sign in ((pair.left, 1), (pair.right, -1)):
            for cell_idx, first in lp._context_rows:
                if cell in cell_idx:
                    pos = cell_idx.index(cell)
                    m = len(cell_idx)
                    for t, key in enumerate(all_tuples(m)):
                        if key[pos] == PLUS:
                            w[first + t] = w.get(first + t, 0) + sign
    return w


def solve_lp(s: System, mode: str = "cbd", max_cells: int | None = None) -> Verdict:
    """LP route only: exact decision plus an exactly verified witness or certificate."""
    lp = build_lp(s, mode, max_cells=max_cells)
    witness, certificate = _solve(lp)
    if witness is not None and not verify_witness(lp, mode, witness):
        raise RuntimeError("solver produced a witness that fails exact verification")
    if certificate is not None and not verify_certificate(lp, mode, certificate):
        raise RuntimeError("solver produced a certificate that fails exact verification")
    return Verdict(mode, witness is None, "lp", lp.cells, witness=witness,
                   certificate=certificate, lp=lp)


def decide(s: System, mode: str = "cbd", max_cells: int | None = None) -> Verdict:
    """Exact contextuality decision.

    Cyclic systems over the cell limit fall back to the closed-form
    criterion alone; otherwise the LP runs and, for cyclic systems, both
    answers are recorded (and must agree).
    """
    _check_mode(mode)
    limit = default_max_cells() if max_cells is None else max_cells
    cells = tuple(s.cells)
    arrangement = detect_cyclic(s)
    cyc = cyclic_contextuality(s, arrangement) if arrangement is not None else None
    formula = None
    if cyc is not None:
        formula = cyc.contextual
        if mode == "traditional":
            formula = formula or not connectedness_report(s).consistent

    if len(cells) > limit:
        if cyc is None:
            raise SizeLimitError(len(cells), limit)
        return Verdict(mode, formula, "cyclic-formula", cells, cyclic=cyc)

    verdict = solve_lp(s, mode, max_cells=limit)
    if formula is not None and formula != verdict.contextual:
        raise RuntimeError("cyclic criterion and LP disagree")
    return replace(verdict, cyclic=cyc)


# -- documents ----------------------------------------------------------------

def witness_to_dict(verdict: Verdict) -> dict:
    return {
        "format": COUPLING_FORMAT,
        "mode": verdict.mode,
        "variables": [list(cell) for cell in verdict.cells],
        "table": {format_tuple(k): format_rational(v) for k, v in verdict.witness.items()},
    }


def certificate_to_dict(verdict: Verdict) -> dict:
    lp = verdict.lp
    return {
        "format": CERTIFICATE_FORMAT,
        "system": lp.system.name,
        "mode": verdict.mode,
        "variables": [list(cell) for cell in lp.cells],
        "rows": [
            dict(row.describe(), rhs=format_rational(b), multiplier=format_rational(y))
            for row, b, y in zip(lp.rows, lp.rhs, verdict.certificate)
        ],
    }


def dump_document(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"
