"""Closed-form contextuality criterion for cyclic systems.

A cyclic system of rank n has properties q_1..q_n and contexts c_1..c_n
with c_i measuring exactly {q_i, q_(i+1 mod n)}. It is noncontextual iff

    max over odd-minus sign vectors of sum_i s_i <R_i R_(i+1)>_(c_i)
        <= n - 2 + sum_i |<R_i>_(c_i) - <R_i>_(c_(i-1))|
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import System, ValidationError, expectation


@dataclass(frozen=True)
class CyclicArrangement:
    properties: tuple[str, ...]
    contexts: tuple[str, ...]

    @property
    def rank(self) -> int:
        return len(self.properties)


@dataclass(frozen=True)
class CyclicVerdict:
    rank: int
    lhs: Fraction
    rhs: Fraction

    @property
    def slack(self) -> Fraction:
        return self.lhs - self.rhs

    @property
    def contextual(self) -> bool:
        return self.lhs > self.rhs


def detect_cyclic(s: System) -> CyclicArrangement | None:
    """Canonical arrangement, or None if ``s`` is not cyclic.

    Starts at the smallest property label and walks toward its
    smaller-labeled neighbour.
    """
    if any(len(c.properties) != 2 for c in s.contexts):
        return None
    props = s.properties
    n = len(props)
    if n < 2 or len(s.contexts) != n:
        return None
    membership = {p: [] for p in props}
    for c in s.contexts:
        for p in c.properties:
            membership[p].append(c)
    if any(len(cs) != 2 for cs in membership.values()):
        return None

    def other(c, p):
        a, b = c.properties
        return b if a == p else a

    first = props[0]
    start_ctx = min(membership[first], key=lambda c: (other(c, first), c.context))
    order_p, order_c = [first], [start_ctx.context]
    prop, ctx = first, start_ctx
    for _ in range(n - 1):
        prop = other(ctx, prop)
        if prop in order_p:
            return None  # closed a shorter cycle
        ctx = next(c for c in membership[prop] if c.context != ctx.context)
        order_p.append(prop)
        order_c.append(ctx.context)
    if other(ctx, prop) != first:
        return None
    return CyclicArrangement(tuple(order_p), tuple(order_c))


def odd_sign_max(values: Sequence[Fraction]) -> Fraction:
    """max of sum s_i v_i over sign vectors s with an odd number of -1's."""
    values = [Fraction(v) for v in values]
    if not values:
        raise ValueError("need at least one value")
    abs_sum = sum((abs(v) for v in values), Fraction(0))
    negatives = sum(1 for v in values if v < 0)
    has_zero = any(v == 0 for v in values)
    if negatives % 2 == 1 or has_zero:
        return abs_sum
    return abs_sum - 2 * min(abs(v) for v in values)


def _check(s: System, a: CyclicArrangement):
    n = a.rank
    if n < 2 or len(a.contexts) != n or len(s.contexts) != n:
        raise ValidationError("arrangement does not match system size")
    if set(a.properties) != set(s.properties):
        raise ValidationError("arrangement properties do not match the system")
    for i, label in enumerate(a.contexts):
        try:
            ctx = s.context(label)
        except KeyError:
            raise ValidationError(f"arrangement names unknown context {label!r}") from None
        want = {a.properties[i], a.properties[(i + 1) % n]}
        if set(ctx.properties) != want:
            raise ValidationError(
                f"context {label!r} measures {sorted(ctx.properties)}, arrangement expects {sorted(want)}"
            )


def cyclic_contextuality(s: System, a: CyclicArrangement) -> CyclicVerdict:
    _check(s, a)
    n = a.rank
    q, c = a.properties, a.contexts
    products = []
    discrepancy = Fraction(0)
    for i in range(n):
        here = s.context(c[i])
        before = s.context(c[i - 1])
        products.append(expectation(here, [q[i], q[(i + 1) % n]]))
        discrepancy += abs(expectation(here, q[i]) - expectation(before, q[i]))
    return CyclicVerdict(n, odd_sign_max(products), n - 2 + discrepancy)
