"""Exact evaluation of a finite-memory strategy.

The strategy and the MDP induce a finite Markov chain over locations
``(state, memory, action)``. Every run ends up in a bottom strongly
connected component (BSCC) and, by ergodicity, its mean payoff is the
stationary average of that BSCC almost surely. Everything below is exact.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .linalg import solve_exact
from .model import Mdp, ModelError, Query, Variant, fmt
from .strategy import FiniteStrategy, StrategyError

ZERO = Fraction(0)
ONE = Fraction(1)

Location = tuple[str, str, str]


@dataclass
class ProductChain:
    locations: list[Location]
    transitions: list[dict[int, Fraction]]
    initial: dict[int, Fraction]

    def index(self) -> dict[Location, int]:
        return {loc: i for i, loc in enumerate(self.locations)}


@dataclass
class Bscc:
    locations: list[int]
    reach_probability: Fraction
    mean_payoff: tuple[Fraction, ...]
    stationary: dict[int, Fraction]


@dataclass
class StrategyEvaluation:
    bsccs: list[Bscc]
    expectation: tuple[Fraction, ...]
    sat_probability: tuple[Fraction, ...]
    joint_sat_probability: Fraction | None
    slack: Fraction

    def to_dict(self, chain: ProductChain | None = None) -> dict[str, Any]:
        def name(i: int) -> str | int:
            return "/".join(chain.locations[i]) if chain is not None else i

        return {
            "expectation": [fmt(x) for x in self.expectation],
            "sat_probability": [fmt(x) for x in self.sat_probability],
            "joint_sat_probability": None if self.joint_sat_probability is None else fmt(self.joint_sat_probability),
            "slack": fmt(self.slack),
            "bsccs": [
                {
                    "locations": [name(i) for i in b.locations],
                    "reach_probability": fmt(b.reach_probability),
                    "mean_payoff": [fmt(x) for x in b.mean_payoff],
                }
                for b in self.bsccs
            ],
        }


def product_chain(m: Mdp, sigma: FiniteStrategy) -> ProductChain:
    """The chain over reachable locations ``(s, memory, a)``."""
    try:
        start: dict[Location, Fraction] = {}
        for mem, p in sigma.initial_memory.items():
            for a, q in sigma.next_distribution(m.initial, mem).items():
                if p * q:
                    start[(m.initial, mem, a)] = start.get((m.initial, mem, a), ZERO) + p * q
        locations: list[Location] = []
        index: dict[Location, int] = {}

        def intern(loc: Location) -> int:
            j = index.get(loc)
            if j is None:
                if not m.has_action(loc[2]) or m.action(loc[2]).source != loc[0]:
                    raise StrategyError(f"strategy plays {loc[2]} at {loc[0]}")
                j = index[loc] = len(locations)
                locations.append(loc)
            return j

        initial = {intern(loc): p for loc, p in start.items()}
        transitions: list[dict[int, Fraction]] = []
        k = 0
        while k < len(locations):
            s, mem, a = locations[k]
            row: dict[int, Fraction] = {}
            for t, pt in m.action(a).delta.items():
                if not pt:
                    continue
                for mem2, pm in sigma.update_distribution(t, mem).items():
                    if not pm:
                        continue
                    for b, pb in sigma.next_distribution(t, mem2).items():
                        if pb:
                            j = intern((t, mem2, b))
                            row[j] = row.get(j, ZERO) + pt * pm * pb
            transitions.append(row)
            k += 1
    except KeyError as exc:
        raise StrategyError(f"strategy has no table for {exc}") from exc
    return ProductChain(locations, transitions, initial)


def bottom_components(chain: ProductChain) -> list[list[int]]:
    n = len(chain.locations)
    rows = [i for i, r in enumerate(chain.transitions) for _ in r]
    cols = [j for r in chain.transitions for j in r]
    graph = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="strong")
    leaving = set()
    for i, r in enumerate(chain.transitions):
        if any(labels[j] != labels[i] for j in r):
            leaving.add(labels[i])
    groups: dict[int, list[int]] = {}
    for i in range(n):
        if labels[i] not in leaving:
            groups.setdefault(int(labels[i]), []).append(i)
    return sorted(groups.values())


def stationary(chain: ProductChain, component: list[int]) -> dict[int, Fraction]:
    """Unique stationary distribution of a closed irreducible set of locations."""
    pos = {loc: k for k, loc in enumerate(component)}
    rows: list[dict[int, Fraction]] = [{k: -ONE} for k in range(len(component))]
    for i in component:
        for j, p in chain.transitions[i].items():
            rows[pos[j]][pos[i]] = rows[pos[j]].get(pos[i], ZERO) + p
    rhs = [ZERO] * len(component)
    rows[-1] = {k: ONE for k in range(len(component))}
    rhs[-1] = ONE
    pi = solve_exact(rows, rhs, len(component))
    return {i: pi[pos[i]] for i in component}


def reach_probabilities(chain: ProductChain, components: list[list[int]]) -> list[Fraction]:
    """Probability of ending in each bottom component, via expected visits to transient locations."""
    in_bottom = {i: c for c, comp in enumerate(components) for i in comp}
    transient = [i for i in range(len(chain.locations)) if i not in in_bottom]
    reach = [ZERO] * len(components)
    for i, p in chain.initial.items():
        if i in in_bottom:
            reach[in_bottom[i]] += p
    if not transient:
        return reach
    pos = {i: k for k, i in enumerate(transient)}
    # visits v solve v = mu_T + v Q, i.e. for each transient j: v_j - sum_i v_i P(i, j) = mu_j
    rows: list[dict[int, Fraction]] = [{k: ONE} for k in range(len(transient))]
    for i in transient:
        for j, p in chain.transitions[i].items():
            if j in pos:
                rows[pos[j]][pos[i]] = rows[pos[j]].get(pos[i], ZERO) - p
    rhs = [chain.initial.get(i, ZERO) for i in transient]
    visits = solve_exact(rows, rhs, len(transient))
    for i in transient:
        v = visits[pos[i]]
        if v:
            for j, p in chain.transitions[i].items():
                if j in in_bottom:
                    reach[in_bottom[j]] += v * p
    return reach


def evaluate(m: Mdp, sigma: FiniteStrategy, q: Query, slack: Fraction = ZERO) -> StrategyEvaluation:
    """Exact expectation and satisfaction probabilities of ``sigma``.

    Satisfaction is measured against the value thresholds lowered by
    ``slack`` (``sat - slack`` and ``joint_sat - slack``).
    """
    return _evaluate(m, sigma, q, Fraction(slack))[0]


def _evaluate(m: Mdp, sigma: FiniteStrategy, q: Query, slack: Fraction):
    if q.dimension != m.dimension:
        raise ModelError("query and model dimensions differ")
    chain = product_chain(m, sigma)
    comps = bottom_components(chain)
    reach = reach_probabilities(chain, comps)
    n = m.dimension
    bsccs = []
    for comp, r in zip(comps, reach):
        pi = stationary(chain, comp)
        payoff = [ZERO] * n
        for i, p in pi.items():
            rew = m.action(chain.locations[i][2]).reward
            for d in range(n):
                payoff[d] += p * rew[d]
        bsccs.append(Bscc(comp, r, tuple(payoff), pi))
    expectation = tuple(sum((b.reach_probability * b.mean_payoff[d] for b in bsccs), ZERO) for d in range(n))
    sat_prob = tuple(
        sum((b.reach_probability for b in bsccs if b.mean_payoff[d] >= q.sat[d] - slack), ZERO) for d in range(n)
    )
    joint = None
    target = None
    if q.variant is Variant.JOINT:
        target = q.sat
    elif q.variant is Variant.CONJUNCTIVE_JOINT:
        target = q.joint_sat
    if target is not None:
        joint = sum(
            (b.reach_probability for b in bsccs if all(b.mean_payoff[d] >= target[d] - slack for d in range(n))),
            ZERO,
        )
    return StrategyEvaluation(bsccs, expectation, sat_prob, joint, slack), chain


@dataclass
class Verdict:
    passed: bool
    evaluation: StrategyEvaluation
    failures: list[str]
    chain: ProductChain

    def to_dict(self) -> dict[str, Any]:
        doc = self.evaluation.to_dict(self.chain)
        doc["verdict"] = "PASS" if self.passed else "FAIL"
        doc["failures"] = self.failures
        return doc


def verify(m: Mdp, sigma: FiniteStrategy, q: Query, epsilon: Fraction | None = None) -> Verdict:
    """Check ``sigma`` against ``(exp - eps, sat - eps, pr)`` exactly; eps defaults to the strategy's own."""
    eps = sigma.epsilon if epsilon is None else Fraction(epsilon)
    sigma.validate(m)
    ev, chain = _evaluate(m, sigma, q, eps)
    failures = []
    n = m.dimension
    for d in range(n):
        if ev.expectation[d] < q.exp[d] - eps:
            failures.append(f"expectation[{d + 1}] = {fmt(ev.expectation[d])} < {fmt(q.exp[d] - eps)}")
    if q.variant is Variant.JOINT:
        if ev.joint_sat_probability < q.pr[0]:
            failures.append(f"joint satisfaction {fmt(ev.joint_sat_probability)} < {fmt(q.pr[0])}")
    else:
        for d in range(n):
            if ev.sat_probability[d] < q.pr[d]:
                failures.append(f"satisfaction[{d + 1}] = {fmt(ev.sat_probability[d])} < {fmt(q.pr[d])}")
        if q.variant is Variant.CONJUNCTIVE_JOINT and ev.joint_sat_probability < q.joint_pr:
            failures.append(f"joint satisfaction {fmt(ev.joint_sat_probability)} < {fmt(q.joint_pr)}")
    return Verdict(not failures, ev, failures, chain)
