"""Systems of binary measurements with per-context joint distributions.

A system is a list of contexts. Each context names the properties it
measures and carries an exact joint distribution over their +1/-1
outcomes. Outcome tuples are always indexed against the label-sorted
property order of the context.
"""
from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

FORMAT = "cbd-system/1"

PLUS = 1
MINUS = -1
OUTCOMES = (PLUS, MINUS)

Outcome = int
OutcomeTuple = tuple[int, ...]

_DECIMAL_RE = re.compile(r"^[+-]?\d+(\.\d+)?$")
_RATIO_RE = re.compile(r"^[+-]?\d+/\d+$")


class ValidationError(ValueError):
    """Raised when a system or document violates the data model."""


class ParseError(ValidationError):
    """Malformed document; carries the line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


def parse_probability(text: str) -> Fraction:
    """Convert a decimal (``"0.25"``) or ratio (``"1/4"``) string exactly."""
    if not isinstance(text, str):
        raise ValidationError(
            f"probability must be a string, got {type(text).__name__} {text!r}"
        )
    s = text.strip()
    if _DECIMAL_RE.match(s):
        value = Fraction(s)
    elif _RATIO_RE.match(s):
        num, den = s.split("/")
        if int(den) == 0:
            raise ValidationError(f"zero denominator in probability {text!r}")
        value = Fraction(int(num), int(den))
    else:
        raise ValidationError(f"not a probability literal: {text!r}")
    if value < 0 or value > 1:
        raise ValidationError(f"probability out of [0,1]: {text!r}")
    return value


def format_rational(value: Fraction) -> str:
    return str(Fraction(value))


def parse_tuple(text: str) -> OutcomeTuple:
    out = []
    for part in text.split(","):
        part = part.strip()
        if part == "+1":
            out.append(PLUS)
        elif part == "-1":
            out.append(MINUS)
        else:
            raise ValidationError(f"bad outcome {part!r} in tuple {text!r}")
    return tuple(out)


def format_tuple(outcomes: Sequence[int]) -> str:
    return ",".join("+1" if v == PLUS else "-1" for v in outcomes)


def all_tuples(m: int) -> list[OutcomeTuple]:
    """All of {+1,-1}^m, lexicographic with +1 before -1."""
    return list(itertools.product(OUTCOMES, repeat=m))


@dataclass(frozen=True)
class ContextDistribution:
    """Joint distribution of the measurements made in one context.

    ``properties`` must be label-sorted and ``table`` keyed by outcome
    tuples in that order; zero cells are dropped. Use :meth:`create` to
    build one from an arbitrary property order.
    """

    context: str
    properties: tuple[str, ...]
    table: Mapping[OutcomeTuple, Fraction] = field(hash=False)

    def __post_init__(self):
        ctx = self.context
        if not isinstance(ctx, str) or not ctx:
            raise ValidationError("context label must be a non-empty string")
        props = tuple(self.properties)
        if not props:
            raise ValidationError(f"context {ctx!r} measures no properties")
        for p in props:
            if not isinstance(p, str) or not p:
                raise ValidationError(f"context {ctx!r}: property labels must be non-empty strings")
        if len(set(props)) != len(props):
            raise ValidationError(f"context {ctx!r}: duplicate property")
        if list(props) != sorted(props):
            raise ValidationError(f"context {ctx!r}: properties not in sorted order")
        m = len(props)
        clean: dict[OutcomeTuple, Fraction] = {}
        total = Fraction(0)
        for key, value in self.table.items():
            key = tuple(key)
            if len(key) != m:
                raise ValidationError(
                    f"context {ctx!r}: tuple {format_tuple(key)!r} has arity {len(key)}, expected {m}"
                )
            if any(v not in OUTCOMES for v in key):
                raise ValidationError(f"context {ctx!r}: outcomes must be +1 or -1")
            value = Fraction(value)
            if value < 0 or value > 1:
                raise ValidationError(f"context {ctx!r}: probability {value} out of [0,1]")
            total += value
            if value:
                clean[key] = value
        if total != 1:
            raise ValidationError(f"context {ctx!r}: table not normalized (sums to {total})")
        object.__setattr__(self, "properties", props)
        object.__setattr__(self, "table", dict(sorted(clean.items(), reverse=True)))

    @classmethod
    def create(cls, context: str, properties: Sequence[str],
               table: Mapping[Sequence[int], Fraction | int | str]) -> "ContextDistribution":
        """Build from tuples given in ``properties`` order (any order)."""
        properties = list(properties)
        if len(set(properties)) != len(properties):
            raise ValidationError(f"context {context!r}: duplicate property")
        perm = sorted(range(len(properties)), key=lambda i: properties[i])
        out: dict[OutcomeTuple, Fraction] = {}
        for key, value in table.items():
            key = tuple(key)
            if len(key) != len(properties):
                raise ValidationError(
                    f"context {context!r}: tuple of arity {len(key)}, expected {len(properties)}"
                )
            if isinstance(value, str):
                value = parse_probability(value)
            sorted_key = tuple(key[i] for i in perm)
            if sorted_key in out:
                raise ValidationError(f"context {context!r}: duplicate tuple {format_tuple(key)!r}")
            out[sorted_key] = Fraction(value)
        return cls(context, tuple(properties[i] for i in perm), out)

    def prob(self, outcomes: Sequence[int]) -> Fraction:
        return self.table.get(tuple(outcomes), Fraction(0))

    def index(self, prop: str) -> int:
        try:
            return self.properties.index(prop)
        except ValueError:
            raise ValidationError(f"property {prop!r} not measured in context {self.context!r}") from None

    def __contains__(self, prop: str) -> bool:
        return prop in self.properties


@dataclass(frozen=True)
class System:
    name: str
    contexts: tuple[ContextDistribution, ...]

    def __post_init__(self):
        contexts = tuple(self.contexts)
        if not contexts:
            raise ValidationError("a system needs at least one context")
        labels = [c.context for c in contexts]
        if len(set(labels)) != len(labels):
            dup = next(l for l in labels if labels.count(l) > 1)
            raise ValidationError(f"duplicate context {dup!r}")
        object.__setattr__(self, "contexts", contexts)

    def context(self, label: str) -> ContextDistribution:
        for c in self.contexts:
            if c.context == label:
                return c
        raise KeyError(label)

    @property
    def properties(self) -> list[str]:
        return sorted({p for c in self.contexts for p in c.properties})

    @property
    def cells(self) -> list[tuple[str, str]]:
        """Measurement cells as (property, context), sorted."""
        return sorted((p, c.context) for c in self.contexts for p in c.properties)

    def contexts_of(self, prop: str) -> list[str]:
        return [c.context for c in self.contexts if prop in c.properties]


@dataclass(frozen=True)
class Connection:
    """All measurements of one property: (context, Pr[+1]) sorted by Pr, then label."""

    property: str
    entries: tuple[tuple[str, Fraction], ...]

    @property
    def contexts(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.entries)

    @property
    def probabilities(self) -> tuple[Fraction, ...]:
        return tuple(p for _, p in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class ConnectednessReport:
    deltas: dict[str, Fraction]

    @property
    def consistent(self) -> bool:
        return all(d == 0 for d in self.deltas.values())


def marginal(d: ContextDistribution, subset: Sequence[str]) -> ContextDistribution:
    """Exact marginal of ``d`` on ``subset`` (returned in canonical order)."""
    subset = list(subset)
    if not subset:
        raise ValidationError("marginal needs a nonempty subset")
    if len(set(subset)) != len(subset):
        raise ValidationError("marginal subset has duplicates")
    idx = sorted(d.index(p) for p in subset)
    out: dict[OutcomeTuple, Fraction] = {}
    for key, value in d.table.items():
        sub = tuple(key[i] for i in idx)
        out[sub] = out.get(sub, Fraction(0)) + value
    return ContextDistribution(d.context, tuple(d.properties[i] for i in idx), out)


def plus_probability(d: ContextDistribution, prop: str) -> Fraction:
    i = d.index(prop)
    return sum((v for k, v in d.table.items() if k[i] == PLUS), Fraction(0))


def expectation(d: ContextDistribution, props: str | Sequence[str]) -> Fraction:
    """<R> for one property or <R R'> for two, exactly."""
    if isinstance(props, str):
        props = [props]
    props = list(props)
    if not 1 <= len(props) <= 2:
        raise ValueError("expectation takes one or two properties")
    idx = [d.index(p) for p in props]
    total = Fraction(0)
    for key, value in d.table.items():
        sign = 1
        for i in idx:
            sign *= key[i]
        total += sign * value
    return total


def connections(s: System) -> list[Connection]:
    out = []
    for prop in s.properties:
        entries = [(c.context, plus_probability(c, prop)) for c in s.contexts if prop in c]
        entries.sort(key=lambda e: (e[1], e[0]))
        out.append(Connection(prop, tuple(entries)))
    return out


def connection(s: System, prop: str) -> Connection:
    for c in connections(s):
        if c.property == prop:
            return c
    raise ValidationError(f"property {prop!r} not in system {s.name!r}")


def connectedness_report(s: System) -> ConnectednessReport:
    deltas = {}
    for conn in connections(s):
        ps = conn.probabilities
        deltas[conn.property] = max(ps) - min(ps)
    return ConnectednessReport(deltas)


def flip_property(s: System, prop: str) -> System:
    """Swap the +1/-1 encoding of ``prop`` in every context measuring it."""
    new = []
    for c in s.contexts:
        if prop not in c:
            new.append(c)
            continue
        i = c.index(prop)
        table = {k[:i] + (-k[i],) + k[i + 1:]: v for k, v in c.table.items()}
        new.append(ContextDistribution(c.context, c.properties, table))
    return System(s.name, tuple(new))


def relabel(s: System, properties: Mapping[str, str] | None = None,
            contexts: Mapping[str, str] | None = None) -> System:
    """Rename properties and/or contexts; tables are re-sorted as needed."""
    properties = properties or {}
    contexts = contexts or {}
    new = []
    for c in s.contexts:
        names = [properties.get(p, p) for p in c.properties]
        new.append(ContextDistribution.create(contexts.get(c.context, c.context), names, c.table))
    return System(s.name, tuple(new))


def delete_cell(s: System, prop: str, context: str) -> System:
    """Drop one measurement, marginalizing its context (dropped if emptied)."""
    new = []
    found = False
    for c in s.contexts:
        if c.context != context:
            new.append(c)
            continue
        c.index(prop)
        found = True
        rest = [p for p in c.properties if p != prop]
        if rest:
            new.append(marginal(c, rest))
    if not found:
        raise ValidationError(f"no context {context!r} in system {s.name!r}")
    if not new:
        raise ValidationError("deleting the last measurement leaves an empty system")
    return System(s.name, tuple(new))


# -- cbd-system/1 documents -------------------------------------------------

def _reject_duplicate_keys(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise ValidationError(f"duplicate key {key!r} in document")
        seen[key] = value
    return seen


def load_json(text: str):
    try:
        return json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise ParseError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None


def system_from_dict(doc) -> System:
    if not isinstance(doc, dict):
        raise ValidationError("document must be a JSON object")
    if doc.get("format") != FORMAT:
        raise ValidationError(f"expected \"format\": \"{FORMAT}\", got {doc.get('format')!r}")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ValidationError("\"name\" must be a string")
    raw = doc.get("contexts")
    if not isinstance(raw, list):
        raise ValidationError("\"contexts\" must be an array")
    contexts = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise ValidationError(f"contexts[{i}] must be an object")
        label = item.get("id")
        if not isinstance(label, str) or not label:
            raise ValidationError(f"contexts[{i}]: \"id\" must be a non-empty string")
        props = item.get("properties")
        if not isinstance(props, list) or not all(isinstance(p, str) for p in props):
            raise ValidationError(f"context {label!r}: \"properties\" must be an array of strings")
        if len(set(props)) != len(props):
            raise ValidationError(f"context {label!r}: duplicate property")
        table = item.get("table")
        if not isinstance(table, dict):
            raise ValidationError(f"context {label!r}: \"table\" must be an object")
        parsed: dict[OutcomeTuple, Fraction] = {}
        for key, value in table.items():
            try:
                tup = parse_tuple(key)
                prob = parse_probability(value)
            except ValidationError as exc:
                raise ValidationError(f"context {label!r}: {exc}") from None
            if len(tup) != len(props):
                raise ValidationError(
                    f"context {label!r}: tuple {key!r} has arity {len(tup)}, expected {len(props)}"
                )
            if tup in parsed:
                raise ValidationError(f"context {label!r}: duplicate tuple {key!r}")
            parsed[tup] = prob
        # tuples are already in label-sorted order
        contexts.append(ContextDistribution(label, tuple(sorted(props)), parsed))
    return System(name, tuple(contexts))


def parse_system(text: str) -> System:
    """Parse and validate a cbd-system/1 JSON document."""
    return system_from_dict(load_json(text))


def system_to_dict(s: System) -> dict:
    return {
        "format": FORMAT,
        "name": s.name,
        "contexts": [
            {
                "id": c.context,
                "properties": list(c.properties),
                "table": {format_tuple(k): format_rational(v) for k, v in c.table.items()},
            }
            for c in s.contexts
        ],
    }


def serialize_system(s: System) -> str:
    return json.dumps(system_to_dict(s), indent=2) + "\n"


def read_system(path) -> System:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())


def distribution_from_expectations(context: str, properties: Sequence[str],
                                   means: Sequence[Fraction], product: Fraction) -> ContextDistribution:
    """Two-property table from <A>, <B>, <AB>: Pr[a,b] = (1 + a<A> + b<B> + ab<AB>)/4."""
    if len(properties) != 2 or len(means) != 2:
        raise ValueError("expected exactly two properties")
    ea, eb = (Fraction(m) for m in means)
    eab = Fraction(product)
    table = {}
    for a, b in all_tuples(2):
        p = (1 + a * ea + b * eb + a * b * eab) / 4
        if p < 0 or p > 1:
            raise ValidationError(
                f"context {context!r}: <A>={ea}, <B>={eb}, <AB>={eab} not realizable "
                f"(cell {format_tuple((a, b))} would be {p})"
            )
        table[(a, b)] = p
    return ContextDistribution.create(context, properties, table)


def iter_context_rows(d: ContextDistribution) -> Iterable[tuple[OutcomeTuple, Fraction]]:
    """Every outcome tuple of the context, zeros included."""
    for key in all_tuples(len(d.properties)):
        yield key, d.prob(key)
