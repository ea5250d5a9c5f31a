"""Finite-memory stochastic-update strategies built from a solution of the program.

Memory is ``transient`` plus one element per recurrent mode (a subset ``N``
of satisfied thresholds, with the yes/no flag for the conjunctive-joint
variant). A mode may be active in several MECs; since a run that switches
never leaves its MEC again, each mode simply carries one memoryless table
per MEC it is used in.

Semantics of a strategy, step by step: entering state ``t`` while the memory
is ``transient``, the memory becomes mode ``M`` with probability
``switch[t][M]`` and stays ``transient`` otherwise; the next action is then
drawn from ``transient_next[t]`` or ``recurrent_next[M][t]``. The initial
memory distribution is the switch distribution of the initial state.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping

from .graph import Mec, MecDecomposition, is_strongly_connected, mec_decomposition, restrict
from .linalg import SingularSystem, solve_exact
from .lp import LpInstance, Mode, build, check_assignment, x_rec, y_action, y_switch
from .model import Mdp, ModelError, Query, Variant, fmt, to_rational

TRANSIENT = "transient"
ONE = Fraction(1)
ZERO = Fraction(0)

Dist = dict[str, Fraction]


class StrategyError(ValueError):
    pass


def memory_name(mode: Mode, n: int) -> str:
    return "N=" + mode.label(n)


@dataclass(frozen=True)
class FiniteStrategy:
    memory: tuple[str, ...]
    transient_next: dict[str, Dist]
    switch: dict[str, Dist]
    recurrent_next: dict[str, dict[str, Dist]]
    initial_memory: Dist
    epsilon: Fraction
    mode_masks: dict[str, tuple[int, str | None]] = field(default_factory=dict)

    def next_distribution(self, state: str, memory: str) -> Dist:
        if memory == TRANSIENT:
            return self.transient_next[state]
        return self.recurrent_next[memory][state]

    def update_distribution(self, state: str, memory: str) -> Dist:
        """Memory after entering ``state`` with ``memory``."""
        if memory != TRANSIENT:
            return {memory: ONE}
        out = dict(self.switch.get(state, {}))
        rest = ONE - sum(out.values(), ZERO)
        if rest:
            out[TRANSIENT] = rest
        return out

    def validate(self, m: Mdp) -> None:
        """Raise :class:`StrategyError` unless every table is a distribution over valid choices."""
        d = mec_decomposition(m)
        if self.memory[0] != TRANSIENT or len(set(self.memory)) != len(self.memory):
            raise StrategyError("memory must start with 'transient' and contain no duplicates")
        for s in m.states:
            dist = self.transient_next.get(s)
            if dist is None:
                raise StrategyError(f"no transient table for state {s}")
            _check_dist(dist, {a.name for a in m.act(s)}, f"transient_next[{s}]")
        for s, table in self.switch.items():
            if not m.has_state(s):
                raise StrategyError(f"switch table for unknown state {s}")
            total = sum(table.values(), ZERO)
            if any(p < 0 for p in table.values()) or total > 1:
                raise StrategyError(f"switch[{s}] is not a sub-distribution")
            for mem, p in table.items():
                if mem not in self.recurrent_next:
                    raise StrategyError(f"switch[{s}] refers to unknown memory {mem}")
                if p and s not in self.recurrent_next[mem]:
                    raise StrategyError(f"switch[{s}] enters {mem}, which has no table at {s}")
        _check_dist(self.initial_memory, set(self.memory), "initial_memory")
        for mem, tables in self.recurrent_next.items():
            if mem not in self.memory or mem == TRANSIENT:
                raise StrategyError(f"recurrent table for unknown memory {mem}")
            for s, dist in tables.items():
                ci = d.state_to_mec.get(s)
                if ci is None:
                    raise StrategyError(f"{mem} has a table at {s}, which is outside every MEC")
                mec = d.mecs[ci]
                if set(mec.states) - set(tables):
                    raise StrategyError(f"{mem} covers only part of a MEC")
                inside = {a for a in mec.actions if m.action(a).source == s}
                _check_dist(dist, inside, f"recurrent_next[{mem}][{s}]")
                if set(dist) != inside or any(p <= 0 for p in dist.values()):
                    raise StrategyError(f"recurrent_next[{mem}][{s}] must be positive on every MEC action")


def _check_dist(dist: Mapping[str, Fraction], support: set[str], what: str) -> None:
    if any(k not in support for k in dist):
        raise StrategyError(f"{what} uses an invalid choice")
    if any(p < 0 for p in dist.values()):
        raise StrategyError(f"{what} has a negative entry")
    total = sum(dist.values(), ZERO)
    if total != 1:
        raise StrategyError(f"{what} sums to {fmt(total)}")


# --- recurrent part ---------------------------------------------------------


def uniform_frequencies(sub: Mdp) -> dict[str, Fraction]:
    """Stationary action frequencies of the uniform memoryless strategy on a strongly connected MDP."""
    if not is_strongly_connected(sub):
        raise ModelError("uniform_frequencies needs a strongly connected MDP")
    states = list(sub.states)
    idx = {s: i for i, s in enumerate(states)}
    rows: list[dict[int, Fraction]] = []
    rhs: list[Fraction] = []
    # unknowns: the state probabilities pi; each action of s gets pi_s / |Act(s)|
    for t in states:
        row: dict[int, Fraction] = {idx[t]: -ONE}
        for a in sub.actions:
            p = a.delta.get(t, ZERO)
            if p:
                j = idx[a.source]
                row[j] = row.get(j, ZERO) + p / len(sub.act(a.source))
        rows.append(row)
        rhs.append(ZERO)
    rows[-1] = {i: ONE for i in range(len(states))}  # one balance row is redundant
    rhs[-1] = ONE
    pi = solve_exact(rows, rhs, len(states))
    return {a.name: pi[idx[a.source]] / len(sub.act(a.source)) for a in sub.actions}


def perturbed_recurrent(m: Mdp, mec: Mec, xbar: Mapping[str, Fraction], eps: Fraction) -> dict[str, Dist]:
    """Memoryless table on ``mec`` close to the flow ``xbar`` and positive on every action.

    The flow is mixed with a multiple of the uniform frequencies whose total
    mass is ``min(eps/(1-eps), eps/(|A|*R))`` times that of ``xbar``, where
    ``R`` bounds the absolute rewards in the MEC. The mean payoff of the
    resulting table is then within ``2*eps/|A|`` of the flow's average.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise StrategyError(f"epsilon {fmt(eps)} outside (0, 1)")
    total = sum((Fraction(xbar.get(a, ZERO)) for a in mec.actions), ZERO)
    if total <= 0:
        raise StrategyError("flow has no mass on this MEC")
    if len(mec.actions) == 1:
        a = mec.actions[0]
        return {m.action(a).source: {a: ONE}}
    r_max = max((abs(x) for a in mec.actions for x in m.action(a).reward), default=ZERO) or ONE
    scale = min(eps / (1 - eps), eps / (len(mec.actions) * r_max))
    uniform = uniform_frequencies(restrict(m, mec))
    z = {a: Fraction(xbar.get(a, ZERO)) + uniform[a] * scale * total for a in mec.actions}
    table: dict[str, Dist] = {}
    for s in mec.states:
        acts = [a for a in mec.actions if m.action(a).source == s]
        out = sum((z[a] for a in acts), ZERO)
        table[s] = {a: z[a] / out for a in acts}
    return table


# --- synthesis ----------------------------------------------------------------


def memory_bound(q: Query) -> int:
    n = q.dimension
    if q.variant is Variant.JOINT:
        return 3
    if q.variant is Variant.CONJUNCTIVE_JOINT:
        return 2 ** (n + 1) + 1
    return 2**n + 1


def synthesize(
    m: Mdp,
    q: Query,
    assignment: Mapping[str, Fraction],
    eps: Fraction,
    lp: LpInstance | None = None,
) -> FiniteStrategy:
    """Build an eps-witness strategy from a solution of the program for ``(m, q)``.

    ``lp`` defaults to the unpruned program; the assignment may omit
    variables, which count as zero.
    """
    eps = Fraction(eps)
    if not 0 < eps < 1:
        raise StrategyError(f"epsilon {fmt(eps)} outside (0, 1)")
    if lp is None:
        lp = build(m, q)
    unknown = set(assignment) - set(lp.names)
    if unknown:
        raise StrategyError(f"assignment mentions unknown variables, e.g. {sorted(unknown)[0]}")
    values = lp.complete(assignment)
    ok, bad = check_assignment(lp, values)
    if not ok:
        raise StrategyError(f"assignment violates {len(bad)} constraint(s), first {bad[0]}")

    n = m.dimension
    d: MecDecomposition = lp.mecs or mec_decomposition(m)

    def val(name: str) -> Fraction:
        return values.get(name, ZERO)

    # recurrent tables for every (mode, MEC) with positive mass
    recurrent: dict[str, dict[str, Dist]] = {}
    masks: dict[str, tuple[int, str | None]] = {}
    used: list[Mode] = []
    for mode in lp.modes:
        tables: dict[str, Dist] = {}
        for mec in d.mecs:
            xbar = {a: val(x_rec(a, mode)) for a in mec.actions}
            if sum(xbar.values(), ZERO) > 0:
                tables.update(perturbed_recurrent(m, mec, xbar, eps))
        if tables:
            name = memory_name(mode, n)
            recurrent[name] = tables
            masks[name] = (mode.mask, mode.flag)
            used.append(mode)

    transient: dict[str, Dist] = {}
    switch: dict[str, Dist] = {}
    for s in m.states:
        acts = m.act(s)
        ys = {a.name: val(y_action(a.name)) for a in acts}
        sw = {memory_name(mode, n): val(y_switch(s, mode)) for mode in used}
        sw = {k: v for k, v in sw.items() if v}
        flow = sum(ys.values(), ZERO)
        inflow = flow + sum(sw.values(), ZERO)
        if flow > 0:
            transient[s] = {a: y / flow for a, y in ys.items() if y}
        else:
            transient[s] = {a.name: Fraction(1, len(acts)) for a in acts}
        if inflow > 0 and sw:
            switch[s] = {k: v / inflow for k, v in sw.items()}

    initial: Dist = dict(switch.get(m.initial, {}))
    rest = ONE - sum(initial.values(), ZERO)
    if rest:
        initial = {TRANSIENT: rest, **initial}
    memory = (TRANSIENT, *recurrent)
    strategy = FiniteStrategy(memory, transient, switch, recurrent, initial, eps, masks)
    strategy.validate(m)
    if len(memory) > memory_bound(q):
        raise AssertionError(f"{len(memory)} memory elements exceed the bound {memory_bound(q)}")
    return strategy


# --- JSON ---------------------------------------------------------------------


def _dist_out(dist: Mapping[str, Fraction]) -> dict[str, str]:
    return {k: fmt(v) for k, v in dist.items()}


def strategy_to_dict(sigma: FiniteStrategy) -> dict[str, Any]:
    return {
        "epsilon": fmt(sigma.epsilon),
        "memory": list(sigma.memory),
        "initial_memory": _dist_out(sigma.initial_memory),
        "transient_next": {s: _dist_out(d) for s, d in sigma.transient_next.items()},
        "switch": {s: _dist_out(d) for s, d in sigma.switch.items()},
        "recurrent_next": {
            mem: {s: _dist_out(d) for s, d in tables.items()} for mem, tables in sigma.recurrent_next.items()
        },
        "modes": {mem: {"mask": mask, "flag": flag} for mem, (mask, flag) in sigma.mode_masks.items()},
    }


def _dist_in(doc: Any, what: str) -> Dist:
    if not isinstance(doc, Mapping):
        raise ModelError(f"{what} must be an object")
    return {str(k): to_rational(v, what) for k, v in doc.items()}


def strategy_from_dict(doc: Mapping[str, Any]) -> FiniteStrategy:
    try:
        modes = {
            str(k): (int(v["mask"]), v.get("flag")) for k, v in doc.get("modes", {}).items()
        }
        return FiniteStrategy(
            memory=tuple(str(x) for x in doc["memory"]),
            transient_next={s: _dist_in(d, f"transient_next[{s}]") for s, d in doc["transient_next"].items()},
            switch={s: _dist_in(d, f"switch[{s}]") for s, d in doc.get("switch", {}).items()},
            recurrent_next={
                mem: {s: _dist_in(d, f"recurrent_next[{mem}][{s}]") for s, d in tables.items()}
                for mem, tables in doc["recurrent_next"].items()
            },
            initial_memory=_dist_in(doc["initial_memory"], "initial_memory"),
            epsilon=to_rational(doc["epsilon"], "epsilon"),
            mode_masks=modes,
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise ModelError(f"malformed strategy document: {exc}") from exc


def serialize_strategy(sigma: FiniteStrategy) -> str:
    return json.dumps(strategy_to_dict(sigma), indent=2)


def parse_strategy(text: str) -> FiniteStrategy:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"strategy file is not JSON: {exc.msg} (line {exc.lineno})") from exc
    if not isinstance(doc, Mapping):
        raise ModelError("strategy document must be a JSON object")
    return strategy_from_dict(doc)


__all__ = [
    "FiniteStrategy",
    "SingularSystem",
    "StrategyError",
    "TRANSIENT",
    "memory_bound",
    "parse_strategy",
    "perturbed_recurrent",
    "serialize_strategy",
    "strategy_from_dict",
    "strategy_to_dict",
    "synthesize",
    "uniform_frequencies",
]
