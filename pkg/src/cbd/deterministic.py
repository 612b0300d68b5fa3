"""0/1 value assignments under per-context logical constraints.

Used for Kochen-Specker style arguments: if every measurement of a
property carries one fixed value regardless of context, do the context
rules still admit an assignment?
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

from .model import ValidationError, load_json

FORMAT = "cbd-constraints/1"
MAX_PROPERTIES = 30
PREDICATES = ("exactly_k", "at_most_k", "all_equal")


@dataclass(frozen=True)
class Constraint:
    scope: tuple[str, ...]
    predicate: str
    k: int | None = None
    value: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "scope", tuple(self.scope))
        if not self.scope:
            raise ValidationError("constraint scope must be nonempty")
        if len(set(self.scope)) != len(self.scope):
            raise ValidationError(f"duplicate property in scope {list(self.scope)}")
        if self.predicate not in PREDICATES:
            raise ValidationError(f"unknown predicate {self.predicate!r}; expected one of {PREDICATES}")
        if self.predicate == "all_equal":
            if self.value not in (0, 1):
                raise ValidationError("all_equal needs value 0 or 1")
        elif not isinstance(self.k, int) or not 0 <= self.k <= len(self.scope):
            raise ValidationError(f"{self.predicate}: k must be in 0..{len(self.scope)}, got {self.k!r}")

    def holds(self, assignment: Mapping[str, int]) -> bool:
        ones = sum(assignment[p] for p in self.scope)
        if self.predicate == "exactly_k":
            return ones == self.k
        if self.predicate == "at_most_k":
            return ones <= self.k
        return ones == (len(self.scope) if self.value == 1 else 0)

    def _bounds(self) -> tuple[int, int]:
        """Allowed range for the number of ones in scope."""
        n = len(self.scope)
        if self.predicate == "exactly_k":
            return self.k, self.k
        if self.predicate == "at_most_k":
            return 0, self.k
        return (n, n) if self.value == 1 else (0, 0)


@dataclass(frozen=True)
class ConstraintSystem:
    properties: tuple[str, ...]
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        props = tuple(self.properties)
        if len(set(props)) != len(props):
            raise ValidationError("duplicate property in constraint system")
        known = set(props)
        for c in self.constraints:
            missing = [p for p in c.scope if p not in known]
            if missing:
                raise ValidationError(f"constraint scope names unknown properties {missing}")
        object.__setattr__(self, "properties", props)
        object.__setattr__(self, "constraints", tuple(self.constraints))

    def satisfied_by(self, assignment: Mapping[str, int]) -> bool:
        return all(c.holds(assignment) for c in self.constraints)


@dataclass(frozen=True)
class SearchResult:
    assignment: dict[str, int] | None
    count: int | None = None

    @property
    def satisfiable(self) -> bool:
        return self.assignment is not None


def assignment_search(cs: ConstraintSystem, count: bool = False) -> SearchResult:
    """Backtracking over 0/1 assignments, most-constrained property first.

    Returns the first solution found (in search order), and with
    ``count=True`` also the number of all solutions.
    """
    if len(cs.properties) > MAX_PROPERTIES:
        raise ValidationError(
            f"{len(cs.properties)} properties exceed the exhaustive search bound of {MAX_PROPERTIES}"
        )
    membership = {p: [] for p in cs.properties}
    for ci, c in enumerate(cs.constraints):
        for p in c.scope:
            membership[p].append(ci)
    order = sorted(cs.properties, key=lambda p: (-len(membership[p]), p))
    bounds = [c._bounds() for c in cs.constraints]
    ones = [0] * len(cs.constraints)
    free = [len(c.scope) for c in cs.constraints]
    assignment: dict[str, int] = {}
    first: list[dict[str, int]] = []
    total = 0

    def feasible(ci: int) -> bool:
        lo, hi = bounds[ci]
        return ones[ci] <= hi and ones[ci] + free[ci] >= lo

    def visit(depth: int) -> bool:
        nonlocal total
        if depth == len(order):
            total += 1
            if not first:
                first.append(dict(assignment))
            return not count
        p = order[depth]
        for v in (0, 1):
            assignment[p] = v
            for ci in membership[p]:
                ones[ci] += v
                free[ci] -= 1
            if all(feasible(ci) for ci in membership[p]) and visit(depth + 1):
                return True
            for ci in membership[p]:
                ones[ci] -= v
                free[ci] += 1
            del assignment[p]
        return False

    if all(feasible(ci) for ci in range(len(cs.constraints))):
        visit(0)
    found = first[0] if first else None
    if found is not None:
        found = {p: found[p] for p in cs.properties}
    return SearchResult(found, total if count else None)


@dataclass(frozen=True)
class ParityResult:
    status: str  # "contradiction", "inconclusive" or "inapplicable"
    contexts: int = 0
    required_ones: int = 0
    reason: str = ""

    @property
    def contradiction(self) -> bool:
        return self.status == "contradiction"


def parity_check_ks4d(cs: ConstraintSystem) -> ParityResult:
    """Double-counting argument for two-context incidence structures.

    If every property lies in exactly two exactly-k scopes, each true
    property is counted twice, so the scopes' k's must sum to an even
    number. An odd sum is a contradiction.
    """
    if not cs.constraints or any(c.predicate != "exactly_k" for c in cs.constraints):
        return ParityResult("inapplicable", reason="every constraint must be exactly_k")
    degree = {p: 0 for p in cs.properties}
    for c in cs.constraints:
        for p in c.scope:
            degree[p] += 1
    bad = sorted(p for p, d in degree.items() if d != 2)
    if bad:
        return ParityResult("inapplicable", reason=f"properties not in exactly two scopes: {bad}")
    required = sum(c.k for c in cs.constraints)
    n = len(cs.constraints)
    if required % 2:
        return ParityResult("contradiction", n, required,
                            f"{required} true cells required, but each true property fills two")
    return ParityResult("inconclusive", n, required, "required true-cell count is even")


# -- cbd-constraints/1 documents ----------------------------------------------

def constraints_from_dict(doc) -> ConstraintSystem:
    if not isinstance(doc, dict):
        raise ValidationError("document must be a JSON object")
    if "format" in doc and doc["format"] != FORMAT:
        raise ValidationError(f"expected \"format\": \"{FORMAT}\", got {doc['format']!r}")
    props = doc.get("properties")
    if not isinstance(props, list) or not all(isinstance(p, str) and p for p in props):
        raise ValidationError("\"properties\" must be an array of non-empty strings")
    raw = doc.get("constraints")
    if not isinstance(raw, list):
        raise ValidationError("\"constraints\" must be an array")
    out = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ValidationError(f"constraints[{i}] must be an object")
        scope = item.get("scope")
        if not isinstance(scope, list) or not all(isinstance(p, str) for p in scope):
            raise ValidationError(f"constraints[{i}]: \"scope\" must be an array of strings")
        try:
            out.append(Constraint(tuple(scope), item.get("predicate"), item.get("k"), item.get("value")))
        except ValidationError as exc:
            raise ValidationError(f"constraints[{i}]: {exc}") from None
    return ConstraintSystem(tuple(props), tuple(out))


def parse_constraints(text: str) -> ConstraintSystem:
    return constraints_from_dict(load_json(text))


def constraints_to_dict(cs: ConstraintSystem) -> dict:
    items = []
    for c in cs.constraints:
        item = {"scope": list(c.scope), "predicate": c.predicate}
        if c.predicate == "all_equal":
            item["value"] = c.value
        else:
            item["k"] = c.k
        items.append(item)
    return {"format": FORMAT, "properties": list(cs.properties), "constraints": items}


def serialize_constraints(cs: ConstraintSystem) -> str:
    return json.dumps(constraints_to_dict(cs), indent=2) + "\n"


def exactly_one_per_context(contexts: Mapping[str, Iterable[str]]) -> ConstraintSystem:
    props: list[str] = []
    for scope in contexts.values():
        for p in scope:
            if p not in props:
                props.append(p)
    return ConstraintSystem(tuple(props), tuple(
        Constraint(tuple(scope), "exactly_k", k=1) for scope in contexts.values()))


def relabel_constraints(cs: ConstraintSystem, mapping: Mapping[str, str]) -> ConstraintSystem:
    return ConstraintSystem(
        tuple(mapping.get(p, p) for p in cs.properties),
        tuple(Constraint(tuple(mapping.get(p, p) for p in c.scope), c.predicate, c.k, c.value)
              for c in cs.constraints),
    )
