"""Built-in systems: KCBS, EPR-BB, SZLG, magic boxes, and the two KS sets.

Cyclic entries are parameterized the same way the cyclic criterion reads
them: per-context Pr[+1] for both measurements and the product
expectation <R R'>. Context i measures (q_i, q_(i+1)), wrapping around.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .deterministic import Constraint, ConstraintSystem, exactly_one_per_context
from .model import System, ValidationError, distribution_from_expectations


@dataclass(frozen=True)
class GalleryEntry:
    key: str
    kind: str  # "probabilistic" or "constraint"
    description: str
    builder: Callable


def _as_list(value, n: int, name: str) -> list:
    if isinstance(value, (list, tuple)):
        if len(value) != n:
            raise ValidationError(f"{name}: expected {n} values, got {len(value)}")
        return list(value)
    return [value] * n


def _rational(value, name: str) -> Fraction:
    try:
        return Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ValidationError(f"{name}: not a rational number: {value!r}") from None


def cyclic_system(name: str, properties: Sequence[str], contexts: Sequence[str],
                  marginals=Fraction(1, 2), products=Fraction(0)) -> System:
    """Rank-n cyclic system; context i measures (properties[i], properties[i+1]).

    ``marginals`` is a probability, or n pairs (Pr[q_i=+1], Pr[q_(i+1)=+1])
    per context; ``products`` is one expectation or n of them.
    """
    n = len(properties)
    if n < 2 or len(contexts) != n:
        raise ValidationError("cyclic systems need n >= 2 properties and n contexts")
    marg = _as_list(marginals, n, "marginals")
    prods = _as_list(products, n, "products")
    out = []
    for i in range(n):
        pair = marg[i] if isinstance(marg[i], (list, tuple)) else (marg[i], marg[i])
        if len(pair) != 2:
            raise ValidationError(f"marginals[{i}] must be a pair")
        ps = [_rational(p, "marginals") for p in pair]
        if any(p < 0 or p > 1 for p in ps):
            raise ValidationError(f"marginals[{i}] outside [0,1]: {[str(p) for p in ps]}")
        prod = _rational(prods[i], "products")
        props = (properties[i], properties[(i + 1) % n])
        out.append(distribution_from_expectations(contexts[i], props, [2 * p - 1 for p in ps], prod))
    return System(name, tuple(out))


def kcbs(marginals=Fraction(1, 2), products=Fraction(-4, 5)) -> System:
    return cyclic_system("KCBS", [f"q{i}" for i in range(1, 6)], [f"c{i}" for i in range(1, 6)],
                         marginals, products)


def epr_bb(marginals=Fraction(1, 2), products=(Fraction(7, 10),) * 3 + (Fraction(-7, 10),)) -> System:
    return cyclic_system("EPR-BB", [f"q{i}" for i in range(1, 5)], [f"c{i}" for i in range(1, 5)],
                         marginals, products)


def szlg(marginals=Fraction(1, 2), products=Fraction(-1, 2)) -> System:
    return cyclic_system("SZLG", [f"q{i}" for i in range(1, 4)], [f"c{i}" for i in range(1, 4)],
                         marginals, products)


def magic_boxes(marginals=Fraction(1, 2), products=Fraction(-1)) -> System:
    """Three boxes opened two at a time; default: exactly one gem per pair."""
    return cyclic_system("magic-boxes", ["a", "b", "c"], ["ab", "bc", "ca"], marginals, products)


def magic_boxes_biased(x, y, z) -> System:
    """Perfectly anticorrelated boxes with <R_a>_ab = x, <R_b>_bc = y, <R_c>_ca = z.

    Discrepancies are |x + z|, |x + y|, |y + z| for boxes a, b, c.
    """
    x, y, z = (_rational(v, "expectation") for v in (x, y, z))
    half = Fraction(1, 2)
    pairs = [((1 + x) * half, (1 - x) * half),
             ((1 + y) * half, (1 - y) * half),
             ((1 + z) * half, (1 - z) * half)]
    return magic_boxes(marginals=pairs, products=-1)


# Fig. 1 left: 18 rays in R^4, coordinates as labels ("-1" written "m").
KS4D_CONTEXTS = {
    "c1": ["q0001", "q0010", "q1100", "q1m100"],
    "c2": ["q0001", "q0100", "q1010", "q10m10"],
    "c3": ["q1100", "q1m11m1", "q1m1m11", "q0011"],
    "c4": ["q10m10", "q1m11m1", "q1111", "q010m1"],
    "c5": ["q0010", "q0100", "q1001", "q100m1"],
    "c6": ["q1m1m11", "q1111", "q100m1", "q01m10"],
    "c7": ["q1m100", "q0011", "q11m11", "q111m1"],
    "c8": ["q1010", "q010m1", "q11m11", "qm1111"],
    "c9": ["q1001", "q01m10", "q111m1", "qm1111"],
}

# Fig. 1 right: rays in R^3 ("2" is sqrt 2, "m" a minus sign); contexts
# c_v collect the rays orthogonal to v.
KS3D_CONTEXTS = {
    "c001": ["q100", "q010", "q110", "q1m10"],
    "c101": ["q010", "qm101"],
    "c011": ["q100", "q0m11"],
    "c1m12": ["q110", "qm112", "qm201", "q021"],
    "c102": ["q010", "qm201", "qm211"],
    "c211": ["q0m11", "qm211", "qm102"],
    "c201": ["q010", "qm102", "qm1m12"],
    "c112": ["q1m10", "qm1m12", "q0m21"],
    "c012": ["q100", "q0m21", "q1m21"],
    "c121": ["qm101", "q1m21", "q0m12"],
}
KS3D_BOXED = ("q100", "q021", "q0m12")


def ks_4d() -> ConstraintSystem:
    """Each context: exactly one of its four rays takes value 1."""
    return exactly_one_per_context(KS4D_CONTEXTS)


def ks_3d() -> ConstraintSystem:
    """Every context forces its members to 0; the boxed basis needs exactly one 1."""
    props: list[str] = []
    for scope in KS3D_CONTEXTS.values():
        props.extend(p for p in scope if p not in props)
    constraints = [Constraint(tuple(scope), "all_equal", value=0) for scope in KS3D_CONTEXTS.values()]
    constraints.append(Constraint(KS3D_BOXED, "exactly_k", k=1))
    return ConstraintSystem(tuple(props), tuple(constraints))


ENTRIES = {
    e.key: e
    for e in [
        GalleryEntry("kcbs", "probabilistic",
                     "rank-5 cyclic; defaults: marginals 1/2, products -4/5", kcbs),
        GalleryEntry("epr-bb", "probabilistic",
                     "rank-4 cyclic; defaults: marginals 1/2, products (7/10, 7/10, 7/10, -7/10)", epr_bb),
        GalleryEntry("szlg", "probabilistic",
                     "rank-3 cyclic; defaults: marginals 1/2, products -1/2", szlg),
        GalleryEntry("magic-boxes", "probabilistic",
                     "rank-3 cyclic, Pr[A=-B]=1 in every context; defaults: marginals 1/2, products -1",
                     magic_boxes),
        GalleryEntry("ks-4d", "constraint", "18 rays, 9 contexts, exactly one 1 per context", ks_4d),
        GalleryEntry("ks-3d", "constraint",
                     "15 rays, 10 conditioned contexts forcing 0, boxed basis needs one 1", ks_3d),
    ]
}


def build(key: str, **params) -> System | ConstraintSystem:
    try:
        entry = ENTRIES[key]
    except KeyError:
        raise ValidationError(f"unknown gallery key {key!r}; known: {sorted(ENTRIES)}") from None
    if entry.kind == "constraint" and params:
        raise ValidationError(f"{key} takes no parameters")
    return entry.builder(**params)
