"""Maximal and multimaximal couplings of binary connections.

For a connection whose Pr[+1] values are sorted ascending, the unique
multimaximal coupling is chain-supported: coordinates switch from -1 to
+1 at most once, left to right, so it puts mass only on k+1 "staircase"
tuples.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .model import (
    MINUS,
    PLUS,
    Connection,
    OutcomeTuple,
    ValidationError,
    format_rational,
    format_tuple,
)

FORMAT = "cbd-coupling/1"


@dataclass(frozen=True)
class ConnectionCoupling:
    """Joint distribution over one connection, coordinates in connection order."""

    property: str
    contexts: tuple[str, ...]
    table: Mapping[OutcomeTuple, Fraction] = field(hash=False)

    def __post_init__(self):
        k = len(self.contexts)
        clean = {}
        for key, value in self.table.items():
            if len(key) != k:
                raise ValidationError(f"coupling tuple of arity {len(key)}, expected {k}")
            value = Fraction(value)
            if value < 0:
                raise ValidationError("negative coupling mass")
            if value:
                clean[tuple(key)] = value
        if sum(clean.values(), Fraction(0)) != 1:
            raise ValidationError("coupling table does not sum to 1")
        object.__setattr__(self, "contexts", tuple(self.contexts))
        object.__setattr__(self, "table", dict(sorted(clean.items(), reverse=True)))

    def coordinate_plus(self, i: int) -> Fraction:
        return sum((v for k, v in self.table.items() if k[i] == PLUS), Fraction(0))


def max_pair_equality(p: Fraction, q: Fraction) -> Fraction:
    """Largest Pr[S = S'] over couplings of two +/-1 variables with Pr[+1] = p, q."""
    return 1 - abs(Fraction(p) - Fraction(q))


def staircase(ps: Iterable[Fraction]) -> dict[OutcomeTuple, Fraction]:
    """Chain distribution for ascending ``ps``; zero-mass steps omitted."""
    ps = [Fraction(p) for p in ps]
    k = len(ps)
    if any(b < a for a, b in zip(ps, ps[1:])):
        raise ValueError("probabilities must be sorted ascending")
    table: dict[OutcomeTuple, Fraction] = {}
    # step l: first l coordinates -1, rest +1
    masses = [ps[0]] + [ps[l] - ps[l - 1] for l in range(1, k)] + [1 - ps[-1]]
    for l, mass in enumerate(masses):
        if mass:
            table[(MINUS,) * l + (PLUS,) * (k - l)] = mass
    return table


def construct_multimaximal(c: Connection) -> ConnectionCoupling:
    return ConnectionCoupling(c.property, c.contexts, staircase(c.probabilities))


def subset_equality_prob(cc: ConnectionCoupling, subset: Iterable[int]) -> Fraction:
    """Pr[all coordinates in ``subset`` (0-based) are equal]."""
    idx = sorted(set(subset))
    if not idx:
        raise ValueError("subset must be nonempty")
    k = len(cc.contexts)
    if idx[0] < 0 or idx[-1] >= k:
        raise IndexError(f"coordinate index out of range for k={k}")
    total = Fraction(0)
    for key, value in cc.table.items():
        first = key[idx[0]]
        if all(key[i] == first for i in idx):
            total += value
    return total


def is_multimaximal(cc: ConnectionCoupling, c: Connection) -> tuple[bool, list[tuple[int, int]]]:
    """Check maximality on consecutive pairs; return (ok, violated pairs).

    Consecutive-pair maximality in the sorted order is equivalent to
    maximality on every subset.
    """
    if cc.contexts != c.contexts:
        raise ValidationError("coupling coordinates do not match the connection's contexts")
    ps = c.probabilities
    for i, p in enumerate(ps):
        if cc.coordinate_plus(i) != p:
            raise ValidationError(
                f"coupling marginal {cc.coordinate_plus(i)} at coordinate {i} != connection value {p}"
            )
    violated = [
        (l, l + 1)
        for l in range(len(ps) - 1)
        if subset_equality_prob(cc, (l, l + 1)) != max_pair_equality(ps[l], ps[l + 1])
    ]
    return not violated, violated


def coupling_to_dict(cc: ConnectionCoupling) -> dict:
    return {
        "format": FORMAT,
        "property": cc.property,
        "contexts": list(cc.contexts),
        "variables": [[cc.property, ctx] for ctx in cc.contexts],
        "table": {format_tuple(k): format_rational(v) for k, v in cc.table.items()},
    }


def dump_coupling(cc: ConnectionCoupling) -> str:
    return json.dumps(coupling_to_dict(cc), indent=2) + "\n"
