import itertools
import random
import re
import time

import pytest

from cbd import gallery
from cbd.deterministic import (
    Constraint,
    ConstraintSystem,
    assignment_search,
    exactly_one_per_context,
    parity_check_ks4d,
    parse_constraints,
    relabel_constraints,
    serialize_constraints,
)
from cbd.model import ValidationError


def ray(label):
    """Coordinates from a label like 'q1m10'; 'm' negates the next digit."""
    return [(-1 if sign else 1) * int(d) for sign, d in re.findall(r"(m?)(\d)", label[1:])]


def dot_sqrt2(u, v):
    """u.v where a coordinate 2 stands for sqrt 2; result as (a, b) meaning a + b*sqrt 2."""
    a = b = 0
    for x, y in zip(u, v):
        rx, ry = abs(x) == 2, abs(y) == 2
        s = (1 if x > 0 else -1 if x < 0 else 0) * (1 if y > 0 else -1 if y < 0 else 0)
        if rx and ry:
            a += 2 * s
        elif rx or ry:
            b += s * (abs(y) if rx else abs(x))
        else:
            a += x * y
    return a, b


def test_ks4d_geometry():
    rays = {p for scope in gallery.KS4D_CONTEXTS.values() for p in scope}
    assert len(rays) == 18
    for scope in gallery.KS4D_CONTEXTS.values():
        assert len(scope) == 4
        for p, q in itertools.combinations(scope, 2):
            assert sum(x * y for x, y in zip(ray(p), ray(q))) == 0, (p, q)
    for p in rays:
        assert sum(p in s for s in gallery.KS4D_CONTEXTS.values()) == 2


def test_ks3d_geometry():
    for label, scope in gallery.KS3D_CONTEXTS.items():
        v = ray(label)
        for p in scope:
            assert dot_sqrt2(v, ray(p)) == (0, 0), (label, p)
    for p, q in itertools.combinations(gallery.KS3D_BOXED, 2):
        assert dot_sqrt2(ray(p), ray(q)) == (0, 0)


def test_ks_systems_have_no_assignment():
    for key in ("ks-4d", "ks-3d"):
        start = time.perf_counter()
        assert assignment_search(gallery.build(key)).assignment is None
        assert time.perf_counter() - start < 1


def test_ks4d_parity():
    result = parity_check_ks4d(gallery.ks_4d())
    assert result.contradiction
    assert result.contexts == 9
    assert result.required_ones == 9


def test_count_single_context():
    cs = exactly_one_per_context({"c": ["a", "b", "c", "d"]})
    result = assignment_search(cs, count=True)
    assert result.count == 4
    assert cs.satisfied_by(result.assignment)


def test_eight_contexts_inconclusive():
    dropped = gallery.KS4D_CONTEXTS["c9"]
    contexts = {k: [p for p in v if p not in dropped] for k, v in gallery.KS4D_CONTEXTS.items() if k != "c9"}
    cs = exactly_one_per_context(contexts)
    assert parity_check_ks4d(cs).status == "inconclusive"
    result = assignment_search(cs)
    if result.satisfiable:
        assert cs.satisfied_by(result.assignment)


def test_degree_three_inapplicable():
    contexts = dict(gallery.KS4D_CONTEXTS, c10=["q0001", "q1111"])
    assert parity_check_ks4d(exactly_one_per_context(contexts)).status == "inapplicable"
    assert parity_check_ks4d(gallery.ks_3d()).status == "inapplicable"


def random_incidence(rng):
    """Each property placed in two distinct scopes, exactly-k constraints."""
    n_scopes = rng.randint(2, 7)
    scopes = [[] for _ in range(n_scopes)]
    for i in range(rng.randint(2, 12)):
        for j in rng.sample(range(n_scopes), 2):
            scopes[j].append(f"p{i}")
    scopes = [s for s in scopes if s]
    props = sorted({p for s in scopes for p in s})
    cons = [Constraint(tuple(s), "exactly_k", k=rng.randint(0, min(2, len(s)))) for s in scopes]
    return ConstraintSystem(tuple(props), tuple(cons))


def test_parity_implies_no_assignment():
    rng = random.Random(12)
    contradictions = 0
    for _ in range(300):
        cs = random_incidence(rng)
        result = parity_check_ks4d(cs)
        if result.status == "inapplicable":
            continue
        if result.contradiction:
            contradictions += 1
            assert not assignment_search(cs).satisfiable
    assert contradictions > 20


def random_constraints(rng):
    props = [f"x{i}" for i in range(rng.randint(1, 10))]
    cons = []
    for _ in range(rng.randint(1, 6)):
        scope = tuple(rng.sample(props, rng.randint(1, len(props))))
        kind = rng.choice(["exactly_k", "at_most_k", "all_equal"])
        if kind == "all_equal":
            cons.append(Constraint(scope, kind, value=rng.randint(0, 1)))
        else:
            cons.append(Constraint(scope, kind, k=rng.randint(0, len(scope))))
    return ConstraintSystem(tuple(props), tuple(cons))


def brute_count(cs):
    return sum(cs.satisfied_by(dict(zip(cs.properties, bits)))
               for bits in itertools.product((0, 1), repeat=len(cs.properties)))


def test_search_against_enumeration():
    rng = random.Random(77)
    for _ in range(200):
        cs = random_constraints(rng)
        result = assignment_search(cs, count=True)
        assert result.count == brute_count(cs)
        assert result.satisfiable == (result.count > 0)
        if result.satisfiable:
            assert cs.satisfied_by(result.assignment)


def test_relabel_invariance():
    rng = random.Random(5)
    for _ in range(100):
        cs = random_constraints(rng)
        mapping = {p: f"y{rng.randrange(10**6)}_{p}" for p in cs.properties}
        a = assignment_search(cs, count=True)
        b = assignment_search(relabel_constraints(cs, mapping), count=True)
        assert (a.satisfiable, a.count) == (b.satisfiable, b.count)


def test_round_trip():
    for cs in (gallery.ks_4d(), gallery.ks_3d()):
        assert parse_constraints(serialize_constraints(cs)) == cs


@pytest.mark.parametrize("text,pattern", [
    ('{"properties": ["a"], "constraints": [{"scope": ["b"], "predicate": "exactly_k", "k": 1}]}', "unknown"),
    ('{"properties": ["a"], "constraints": [{"scope": ["a"], "predicate": "odd"}]}', "predicate"),
    ('{"properties": ["a"], "constraints": [{"scope": ["a"], "predicate": "exactly_k", "k": 2}]}', "k must"),
    ('{"properties": ["a"], "constraints": [{"scope": ["a"], "predicate": "all_equal"}]}', "value"),
])
def test_document_errors(text, pattern):
    with pytest.raises(ValidationError, match=pattern):
        parse_constraints(text)


def test_size_bound():
    cs = ConstraintSystem(tuple(f"p{i}" for i in range(31)), ())
    with pytest.raises(ValidationError, match="bound"):
        assignment_search(cs)
