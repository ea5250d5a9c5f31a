"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import itertools
import random
from fractions import Fraction

from meanpayoff.model import Mdp, Query, Variant, make_mdp, make_query


def reachable(adj: dict[str, set[str]], start: str) -> set[str]:
    seen, todo = {start}, [start]
    while todo:
        s = todo.pop()
        for t in adj.get(s, ()):
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def brute_force_mecs(m: Mdp) -> set[tuple[frozenset[str], frozenset[str]]]:
    """Maximal end components by trying every subset of states."""
    ecs = []
    for r in range(1, len(m.states) + 1):
        for subset in itertools.combinations(m.states, r):
            inside = set(subset)
            acts = [a for a in m.actions if a.source in inside and set(a.successors()) <= inside]
            if any(not any(a.source == s for a in acts) for s in inside):
                continue
            adj: dict[str, set[str]] = {s: set() for s in inside}
            for a in acts:
                adj[a.source].update(a.successors())
            if all(reachable(adj, s) == inside for s in inside):
                ecs.append((frozenset(inside), frozenset(a.name for a in acts)))
    return {ec for ec in ecs if not any(ec[0] < other[0] for other in ecs)}


def satisfiable(p: int, clauses) -> bool:
    for bits in itertools.product((False, True), repeat=p):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return True
    return False


def all_clauses(p: int) -> list[tuple[int, ...]]:
    """Every non-empty clause over variables 1..p without a repeated variable."""
    out = []
    for signs in itertools.product((0, 1, -1), repeat=p):
        clause = tuple(s * (i + 1) for i, s in enumerate(signs) if s)
        if clause:
            out.append(clause)
    return out


def all_formulas(max_vars: int = 3, max_clauses: int = 4):
    """``(p, clauses)`` for every set of 1..max_clauses distinct clauses over p <= max_vars variables."""
    for p in range(1, max_vars + 1):
        pool = all_clauses(p)
        for k in range(1, max_clauses + 1):
            for f in itertools.combinations(pool, k):
                yield p, f


def canonical(p: int, clauses) -> tuple:
    """Smallest image of the formula under variable permutations and polarity flips."""
    best = None
    for perm in itertools.permutations(range(1, p + 1)):
        for flips in itertools.product((1, -1), repeat=p):
            image = tuple(
                sorted(tuple(sorted(flips[abs(l) - 1] * perm[abs(l) - 1] * (1 if l > 0 else -1) for l in c)) for c in clauses)
            )
            if best is None or image < best:
                best = image
    return best


def _prob(rng: random.Random, k: int) -> list[Fraction]:
    """Random distribution over ``k`` outcomes with small denominators."""
    cuts = sorted(rng.randint(0, 12) for _ in range(k - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [12])]
    if not any(parts):
        parts[0] = 12
    return [Fraction(x, 12) for x in parts]


def random_mdp(rng: random.Random, max_states: int = 4, max_actions: int = 8, dimension: int | None = None) -> Mdp:
    n_states = rng.randint(1, max_states)
    states = [f"q{i}" for i in range(n_states)]
    n_actions = rng.randint(n_states, max(n_states, max_actions))
    n = dimension if dimension is not None else rng.randint(1, 2)
    sources = states + [rng.choice(states) for _ in range(n_actions - n_states)]
    actions = []
    for j, src in enumerate(sources):
        targets = rng.sample(states, rng.randint(1, min(2, n_states)))
        probs = _prob(rng, len(targets))
        delta = {t: p for t, p in zip(targets, probs) if p}
        reward = [rng.randint(-2, 3) for _ in range(n)]
        actions.append((f"a{j}", src, delta, reward))
    return make_mdp(states, actions, states[0], n)


def random_thresholds(rng: random.Random, m: Mdp) -> tuple[list[Fraction], list[Fraction]]:
    lo = m.min_reward()
    hi = [max(a.reward[i] for a in m.actions) for i in range(m.dimension)]
    exp = [lo[i] + Fraction(rng.randint(0, 8), 8) * (hi[i] - lo[i]) for i in range(m.dimension)]
    sat = [lo[i] + Fraction(rng.randint(0, 8), 8) * (hi[i] - lo[i]) for i in range(m.dimension)]
    return exp, sat


def random_query(rng: random.Random, m: Mdp, variant: Variant = Variant.CONJUNCTIVE) -> Query:
    exp, sat = random_thresholds(rng, m)
    pr = [Fraction(rng.randint(0, 4), 4) for _ in range(m.dimension)]
    return make_query(variant, exp, sat, pr)
