"""Seeded random systems for property and acceptance tests."""
from __future__ import annotations

import random
from fractions import Fraction

from cbd.model import ContextDistribution, System, all_tuples, connectedness_report, distribution_from_expectations


def random_table(rng: random.Random, m: int, weights=(0, 0, 1, 2, 3, 5, 8)) -> dict:
    w = [rng.choice(weights) for _ in range(2 ** m)]
    if not any(w):
        w[rng.randrange(len(w))] = 1
    total = sum(w)
    return {k: Fraction(x, total) for k, x in zip(all_tuples(m), w)}


def random_cyclic(rng: random.Random, n: int) -> System:
    """Random rank-n cyclic system, arranged in shuffled label order.

    A quarter get unstructured tables. The rest draw per-property means
    with occasional per-context drift and push each product toward the
    extreme of an odd-minus sign pattern, so both verdicts are common and
    boundary cases (lhs == rhs) occur.
    """
    props = [f"q{i}" for i in range(1, n + 1)]
    rng.shuffle(props)
    labels = [f"c{rng.randrange(10**6)}_{i}" for i in range(n)]
    if rng.random() < 0.25:
        contexts = [ContextDistribution.create(labels[i], (props[i], props[(i + 1) % n]),
                                               random_table(rng, 2)) for i in range(n)]
        return System(f"cyclic-{n}", tuple(contexts))
    steps = rng.choice([2, 4, 5, 10])
    base = [Fraction(rng.randint(-steps // 2, steps // 2), steps) for _ in range(n)]
    signs = [1] * n
    for i in rng.sample(range(n), rng.choice([k for k in range(n + 1) if k % 2]) if rng.random() < 0.8
                        else rng.choice(range(n + 1))):
        signs[i] = -1

    def drift(x):
        if rng.random() < 0.3:
            x += Fraction(rng.choice([-1, 1]), steps)
        return max(Fraction(-1), min(Fraction(1), x))

    contexts = []
    for i in range(n):
        a, b = drift(base[i]), drift(base[(i + 1) % n])
        lo, hi = abs(a + b) - 1, 1 - abs(a - b)
        extreme = hi if signs[i] > 0 else lo
        shrink = Fraction(rng.choice([0, 0, 0, 1, 2]), 10)
        prod = extreme + (Fraction(1, 2) * (lo + hi) - extreme) * shrink
        contexts.append(distribution_from_expectations(labels[i], (props[i], props[(i + 1) % n]),
                                                       [a, b], prod))
    return System(f"cyclic-{n}", tuple(contexts))


def random_structure(rng: random.Random, max_cells: int = 12) -> list[list[str]]:
    n_props = rng.randint(2, 6)
    props = [f"p{i}" for i in range(n_props)]
    scopes: list[list[str]] = []
    cells = 0
    for _ in range(rng.randint(1, 5)):
        m = rng.randint(1, min(3, n_props))
        if cells + m > max_cells:
            break
        scopes.append(sorted(rng.sample(props, m)))
        cells += m
    if not scopes:
        scopes.append([props[0]])
    return scopes


def random_system(rng: random.Random, max_cells: int = 12) -> System:
    scopes = random_structure(rng, max_cells)
    contexts = [ContextDistribution.create(f"k{j}", scope, random_table(rng, len(scope)))
                for j, scope in enumerate(scopes)]
    return System("random", tuple(contexts))


def random_inconsistent(rng: random.Random, max_cells: int = 12) -> System:
    while True:
        s = random_system(rng, max_cells)
        if not connectedness_report(s).consistent:
            return s


def _threshold_table(rng: random.Random, scope: list[str], marg: dict[str, Fraction]) -> dict:
    """Joint table with prescribed Pr[+1] per property, from shared uniforms.

    Each property reads +1 when its latent uniform (or one minus it) falls
    below its threshold; properties sharing a latent are dependent.
    """
    groups: dict[int, list[tuple[int, bool]]] = {}
    for i, _ in enumerate(scope):
        groups.setdefault(rng.randrange(2), []).append((i, rng.random() < 0.5))
    table = {(): Fraction(1)}
    for members in groups.values():
        cuts = {Fraction(0), Fraction(1)}
        for i, flip in members:
            p = marg[scope[i]]
            cuts.add(1 - p if flip else p)
        cuts = sorted(cuts)
        part: dict[tuple, Fraction] = {}
        for lo, hi in zip(cuts, cuts[1:]):
            u = (lo + hi) / 2
            key = tuple((i, 1 if ((1 - u) if flip else u) < marg[scope[i]] else -1) for i, flip in members)
            part[key] = part.get(key, Fraction(0)) + (hi - lo)
        table = {k + pk: v * pv for k, v in table.items() for pk, pv in part.items()}
    out: dict[tuple, Fraction] = {}
    for key, v in table.items():
        full = dict(key)
        tup = tuple(full[i] for i in range(len(scope)))
        out[tup] = out.get(tup, Fraction(0)) + v
    return out


def random_consistent(rng: random.Random, max_cells: int = 12) -> System:
    """Consistently connected system: every context shares per-property marginals."""
    if rng.random() < 0.4:
        n = rng.randint(2, 5)
        props = [f"p{i}" for i in range(n)]
        scopes = [sorted([props[i], props[(i + 1) % n]]) for i in range(n)]
        if n == 2:
            scopes = [props[:], props[:]]
    else:
        scopes = random_structure(rng, max_cells)
    marg = {p: Fraction(rng.randint(0, 6), 6) for scope in scopes for p in scope}
    contexts = []
    for j, scope in enumerate(scopes):
        table = _threshold_table(rng, scope, marg)
        if rng.random() < 0.5:
            other = _threshold_table(rng, scope, marg)
            w = Fraction(rng.randint(1, 3), 4)
            keys = set(table) | set(other)
            table = {k: w * table.get(k, 0) + (1 - w) * other.get(k, 0) for k in keys}
        contexts.append(ContextDistribution.create(f"k{j}", scope, table))
    return System("consistent", tuple(contexts))
