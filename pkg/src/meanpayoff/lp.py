"""Construction of the realizability linear program and its variants.

Variables (all implicitly non-negative):

* ``y[a]``                 expected number of uses of action ``a`` before switching,
* ``y[s][N]`` / ``y[s][N][f]``  probability of switching to mode ``N`` upon reaching ``s``,
* ``x[a][N]`` / ``x[a][N][f]``  long-run frequency of ``a`` on runs committed to mode ``N``.

``N`` is written as a bitmask over the reward dimensions (bit ``i-1`` for
dimension ``i``); ``f`` is the yes/no flag of the conjunctive-joint program.
Recurrent variables are only created for actions inside some MEC.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .graph import MecDecomposition, mec_decomposition
from .model import Mdp, ModelError, Query, Variant, fmt, validate_query

ZERO = Fraction(0)
ONE = Fraction(1)

EQ = "="
GE = ">="


class LpError(ValueError):
    pass


@dataclass(frozen=True)
class Mode:
    """A recurrent behaviour class: subset ``mask`` of satisfied thresholds, optional yes/no flag."""

    mask: int
    flag: str | None = None

    def suffix(self) -> str:
        return f"[{self.mask}]" if self.flag is None else f"[{self.mask}][{self.flag}]"

    def dims(self, n: int) -> list[int]:
        return [i for i in range(n) if self.mask >> i & 1]

    def label(self, n: int) -> str:
        body = "{" + ",".join(str(i + 1) for i in self.dims(n)) + "}"
        return body if self.flag is None else f"{body}/{self.flag}"


@dataclass(frozen=True)
class Var:
    name: str
    role: str  # "transient" | "switch" | "recurrent"
    item: str  # action name or state name
    mode: Mode | None = None


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[str, Fraction]
    rel: str
    rhs: Fraction
    label: str = ""

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        return sum((c * values[v] for v, c in self.coeffs.items()), ZERO)

    def holds(self, values: Mapping[str, Fraction]) -> bool:
        lhs = self.evaluate(values)
        return lhs == self.rhs if self.rel == EQ else lhs >= self.rhs

    def is_empty(self) -> bool:
        return not any(self.coeffs.values())


@dataclass
class LpInstance:
    variables: list[Var]
    constraints: list[Constraint]
    objective: dict[str, Fraction] | None = None
    modes: tuple[Mode, ...] = ()
    mecs: MecDecomposition | None = None
    notes: dict[str, object] = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def var(self, name: str) -> Var:
        return self._by_name()[name]

    def _by_name(self) -> dict[str, Var]:
        cache = self.__dict__.get("_cache")
        if cache is None or len(cache) != len(self.variables):
            cache = {v.name: v for v in self.variables}
            self.__dict__["_cache"] = cache
        return cache

    def count(self, role: str) -> int:
        return sum(1 for v in self.variables if v.role == role)

    def with_objective(self, objective: Mapping[str, Fraction] | None) -> "LpInstance":
        return LpInstance(
            list(self.variables), list(self.constraints), None if objective is None else dict(objective),
            self.modes, self.mecs, dict(self.notes),
        )

    def with_constraints(self, extra: Iterable[Constraint], variables: Iterable[Var] = ()) -> "LpInstance":
        return LpInstance(
            list(self.variables) + list(variables), list(self.constraints) + list(extra),
            None if self.objective is None else dict(self.objective), self.modes, self.mecs, dict(self.notes),
        )

    def without(self, dropped: set[str]) -> "LpInstance":
        """Fix the variables in ``dropped`` to zero and remove them."""
        cons = []
        for c in self.constraints:
            cons.append(Constraint({v: k for v, k in c.coeffs.items() if v not in dropped}, c.rel, c.rhs, c.label))
        obj = None if self.objective is None else {v: k for v, k in self.objective.items() if v not in dropped}
        return LpInstance(
            [v for v in self.variables if v.name not in dropped], cons, obj, self.modes, self.mecs, dict(self.notes)
        )

    def complete(self, assignment: Mapping[str, Fraction]) -> dict[str, Fraction]:
        """Extend ``assignment`` by zeros to every variable of this instance."""
        return {v.name: Fraction(assignment.get(v.name, ZERO)) for v in self.variables}


# --- variable naming --------------------------------------------------------


def y_action(a: str) -> str:
    return f"y[{a}]"


def y_switch(s: str, mode: Mode) -> str:
    return f"y[{s}]{mode.suffix()}"


def x_rec(a: str, mode: Mode) -> str:
    return f"x[{a}]{mode.suffix()}"


def mask_of(dims: Iterable[int]) -> int:
    """Bitmask of 1-based dimension indices."""
    out = 0
    for i in dims:
        out |= 1 << (i - 1)
    return out


class _Row:
    def __init__(self) -> None:
        self.coeffs: dict[str, Fraction] = {}

    def add(self, var: str, coef: Fraction) -> None:
        old = self.coeffs.get(var)
        self.coeffs[var] = coef if old is None else old + coef

    def done(self, rel: str, rhs: Fraction, label: str) -> Constraint:
        return Constraint({v: c for v, c in self.coeffs.items() if c != 0}, rel, Fraction(rhs), label)


# --- generic builder --------------------------------------------------------

# commit(mode) -> (dimension, threshold, row tag) triples the mode's flow must meet on average
Commit = Callable[[Mode], list[tuple[int, Fraction, str]]]
# (mode predicate, bound, label): recurrent mass of the selected modes is at least bound
Satisfaction = list[tuple[Callable[[Mode], bool], Fraction, str]]


class _Family:
    """Which (MEC, mode) pairs get variables, plus the rows that depend on the mode."""

    def __init__(self, m: Mdp, mecs: MecDecomposition, modes: list[Mode], commit: Commit):
        self.m = m
        self.mecs = mecs
        self.modes = modes
        self.commit = commit
        self.keep = {(ci, mode) for ci in range(len(mecs.mecs)) for mode in modes}
        self.switch_at = {s for mec in mecs.mecs for s in mec.states}
        self._margin: dict[tuple[str, int, Fraction], Fraction] = {}

    def margin(self, action: str, i: int, threshold: Fraction) -> Fraction:
        key = (action, i, threshold)
        out = self._margin.get(key)
        if out is None:
            out = self._margin[key] = self.m.action(action).reward[i] - threshold
        return out

    def commitment_rows(self, ci: int, mode: Mode) -> list[Constraint]:
        actions = self.mecs.mecs[ci].actions
        suffix = mode.suffix()
        rows = []
        for i, threshold, tag in self.commit(mode):
            coeffs = {}
            for name in actions:
                k = self.margin(name, i, threshold)
                if k:
                    coeffs[f"x[{name}]{suffix}"] = k
            rows.append(Constraint(coeffs, GE, ZERO, f"{tag}[C{ci}]{suffix}[{i + 1}]"))
        return rows


def _build(
    m: Mdp,
    family: _Family,
    exp: tuple[Fraction, ...],
    satisfaction: Satisfaction,
) -> LpInstance:
    """Shared skeleton of every program variant.

    ``family.commit(mode)`` lists the (dimension, threshold, tag) triples each
    MEC flow of that mode must reach on average; ``satisfaction`` lists
    (selector, bound, label) rows saying the total recurrent mass of the
    selected modes is at least ``bound``. Only pairs in ``family.keep`` get variables.
    """
    n = m.dimension
    mecs = family.mecs
    keep = family.keep
    modes = [mode for mode in family.modes if any((ci, mode) in keep for ci in range(len(mecs.mecs)))]
    mec_of = {a.name: mecs.mec_of_action(m, a.name) for a in m.actions}
    mec_actions = [a for a in m.actions if mec_of[a.name] is not None]
    mec_states = [s for mec in mecs.mecs for s in mec.states if s in family.switch_at]

    variables: list[Var] = [Var(y_action(a.name), "transient", a.name) for a in m.actions]
    for s in mec_states:
        for mode in modes:
            if (mecs.state_to_mec[s], mode) in keep:
                variables.append(Var(y_switch(s, mode), "switch", s, mode))
    for a in mec_actions:
        for mode in modes:
            if (mec_of[a.name], mode) in keep:
                variables.append(Var(x_rec(a.name, mode), "recurrent", a.name, mode))

    def x_of(a: str, mode: Mode):
        ci = mec_of[a]
        return x_rec(a, mode) if ci is not None and (ci, mode) in keep else None

    incoming: dict[str, list[tuple[str, Fraction]]] = {s: [] for s in m.states}
    for a in m.actions:
        for t, p in a.delta.items():
            if p:
                incoming[t].append((a.name, p))

    cons: list[Constraint] = []
    # transient flow conservation
    for s in m.states:
        row = _Row()
        for a in m.act(s):
            row.add(y_action(a.name), ONE)
        for name, p in incoming[s]:
            row.add(y_action(name), -p)
        ci = mecs.state_to_mec[s]
        if ci is not None and s in family.switch_at:
            for mode in modes:
                if (ci, mode) in keep:
                    row.add(y_switch(s, mode), ONE)
        cons.append(row.done(EQ, ONE if s == m.initial else ZERO, f"flow[{s}]"))
    # switching happens almost surely
    row = _Row()
    for s in mec_states:
        for mode in modes:
            if (mecs.state_to_mec[s], mode) in keep:
                row.add(y_switch(s, mode), ONE)
    cons.append(row.done(EQ, ONE, "switch"))
    # switch mass in a MEC equals its recurrent mass
    for ci, mec in enumerate(mecs.mecs):
        for mode in modes:
            if (ci, mode) not in keep:
                continue
            row = _Row()
            for s in mec.states:
                if s in family.switch_at:
                    row.add(y_switch(s, mode), ONE)
            for a in mec.actions:
                row.add(x_rec(a, mode), -ONE)
            cons.append(row.done(EQ, ZERO, f"absorb[C{ci}]{mode.suffix()}"))
    # recurrent flow conservation
    for s in m.states:
        for mode in modes:
            row = _Row()
            for name, p in incoming[s]:
                v = x_of(name, mode)
                if v is not None:
                    row.add(v, p)
            for a in m.act(s):
                v = x_of(a.name, mode)
                if v is not None:
                    row.add(v, -ONE)
            cons.append(row.done(EQ, ZERO, f"cycle[{s}]{mode.suffix()}"))
    # expected rewards
    for i in range(n):
        row = _Row()
        for a in mec_actions:
            if a.reward[i]:
                for mode in modes:
                    v = x_of(a.name, mode)
                    if v is not None:
                        row.add(v, a.reward[i])
        cons.append(row.done(GE, exp[i], f"exp[{i + 1}]"))
    # per-MEC commitment to the thresholds of a mode (plus the joint copy)
    for ci in range(len(mecs.mecs)):
        for mode in modes:
            if (ci, mode) in keep:
                cons.extend(family.commitment_rows(ci, mode))
    # probability thresholds (plus the joint copy)
    for selects, bound, label in satisfaction:
        row = _Row()
        group = [mode for mode in modes if selects(mode)]
        for a in mec_actions:
            for mode in group:
                v = x_of(a.name, mode)
                if v is not None:
                    row.add(v, ONE)
        cons.append(row.done(GE, bound, label))
    return LpInstance(variables, cons, None, tuple(modes), mecs)


def _check_variant(m: Mdp, q: Query, allowed: tuple[Variant, ...]) -> None:
    validate_query(m, q)
    if q.variant not in allowed:
        raise LpError(f"variant {q.variant.value} not handled by this builder")


def _finish(m: Mdp, q: Query, modes: list[Mode], commit: Commit, satisfaction: Satisfaction, prune: bool) -> LpInstance:
    family = _Family(m, mec_decomposition(m), modes, commit)
    if prune:
        _prune_family(family, q.sat)
    lp = _build(m, family, q.exp, satisfaction)
    if prune:
        lp.constraints = [c for c in lp.constraints if not _implied(c)]
        lp.notes["pruned_modes"] = len(family.mecs.mecs) * len(modes) - len(family.keep)
    lp.notes["variant"] = q.variant.value
    return lp


def build_conjunctive(m: Mdp, q: Query, prune: bool = False) -> LpInstance:
    """The program for (multi-quant-conjunctive) and its special cases."""
    _check_variant(m, q, (Variant.CONJUNCTIVE, Variant.MULTI_QUAL, Variant.MONO_QUANT, Variant.MONO_QUAL))
    n = m.dimension
    full = (1 << n) - 1
    masks = [full] if q.variant.is_qual else list(range(1 << n))
    modes = [Mode(k) for k in masks]

    def commit(mode: Mode):
        return [(i, q.sat[i], "commit") for i in mode.dims(n)]

    return _finish(m, q, modes, commit, _per_dimension(q), prune)


def build_joint(m: Mdp, q: Query, prune: bool = False) -> LpInstance:
    """Reduced program where only the modes {} and [n] carry mass."""
    _check_variant(m, q, (Variant.JOINT, Variant.MULTI_QUAL, Variant.MONO_QUAL))
    n = m.dimension
    full = Mode((1 << n) - 1)
    modes = [full] if q.variant.is_qual else [Mode(0), full]

    def commit(mode: Mode):
        return [(i, q.sat[i], "commit") for i in range(n)] if mode == full else []

    return _finish(m, q, modes, commit, [(lambda mode: mode == full, q.pr[0], "prob")], prune)


def build_conjunctive_joint(m: Mdp, q: Query, prune: bool = False) -> LpInstance:
    """Conjunctive program with every mode split into yes/no copies plus the joint rows."""
    _check_variant(m, q, (Variant.CONJUNCTIVE_JOINT,))
    n = m.dimension
    assert q.joint_sat is not None and q.joint_pr is not None
    modes = [Mode(k, f) for k in range(1 << n) for f in ("yes", "no")]
    joint_sat = q.joint_sat

    def commit(mode: Mode):
        rows = [(i, q.sat[i], "commit") for i in mode.dims(n)]
        if mode.flag == "yes":
            rows += [(i, joint_sat[i], "commit~") for i in range(n)]
        return rows

    satisfaction = _per_dimension(q) + [(lambda mode: mode.flag == "yes", q.joint_pr, "prob~")]
    return _finish(m, q, modes, commit, satisfaction, prune)


def _per_dimension(q: Query) -> Satisfaction:
    return [((lambda mode, i=i: bool(mode.mask >> i & 1)), q.pr[i], f"prob[{i + 1}]") for i in range(q.dimension)]


def build(m: Mdp, q: Query, prune: bool = False) -> LpInstance:
    """Dispatch on the query variant."""
    validate_query(m, q)
    if q.variant is Variant.JOINT:
        return build_joint(m, q, prune)
    if q.variant is Variant.CONJUNCTIVE_JOINT:
        return build_conjunctive_joint(m, q, prune)
    return build_conjunctive(m, q, prune)


# --- equivalence-preserving reduction ---------------------------------------


def _prune_family(family: _Family, sat: tuple[Fraction, ...]) -> None:
    """Remove (MEC, mode) pairs that can be assumed empty without changing feasibility.

    * If every action of MEC ``C`` already meets ``sat[i]``, mass in a mode
      lacking ``i`` can move to the mode that adds ``i`` (when the family has
      it), so the smaller mode is dropped.
    * If a mode's normalised flow restricted to ``C`` is infeasible on its own
      (flow conservation, unit mass, commitment rows), every solution gives it
      zero mass in ``C``.
    * Switching only needs to happen at one state per MEC: transient flow
      that enters ``C`` elsewhere can walk inside ``C`` to that state first,
      which takes finitely many expected steps in an end component.

    The reduced program is feasible iff the full one is, and any of its
    solutions extended by zeros solves the full one.
    """
    from .simplex import solve  # local import: simplex depends on this module

    m = family.m
    family.switch_at = {mec.states[0] for mec in family.mecs.mecs}
    present = set(family.modes)
    # Commitment rows only grow with the mask and with the yes flag, so a mode
    # is infeasible whenever a sub-mode already proved infeasible.
    order = sorted(family.modes, key=lambda md: (bin(md.mask).count("1"), md.flag == "yes"))
    for ci, mec in enumerate(family.mecs.mecs):
        vacuous = 0
        for i in range(m.dimension):
            if all(m.action(a).reward[i] >= sat[i] for a in mec.actions):
                vacuous |= 1 << i
        dead: set[Mode] = set()
        for mode in order:
            target = Mode(mode.mask | vacuous, mode.flag)
            if target != mode and target in present:
                family.keep.discard((ci, mode))
                continue
            smaller = [Mode(mode.mask & ~(1 << i), mode.flag) for i in mode.dims(m.dimension)]
            if mode.flag == "yes":
                smaller.append(Mode(mode.mask, "no"))
            if any(sub in dead for sub in smaller) or not _mode_feasible(
                m, mec, mode, family.commitment_rows(ci, mode), solve
            ):
                dead.add(mode)
                family.keep.discard((ci, mode))


def _implied(c: Constraint) -> bool:
    """True for rows every non-negative point satisfies."""
    if c.rel == GE:
        return c.rhs <= 0 and all(v >= 0 for v in c.coeffs.values())
    return c.rhs == 0 and not c.coeffs


def _mode_feasible(m: Mdp, mec, mode: Mode, rows: list[Constraint], solve) -> bool:
    rows = [c for c in rows if not _implied(c)]
    if not rows:
        return True  # a MEC always carries some unit flow
    actions = mec.actions
    pos = {f"x[{a}]{mode.suffix()}": j for j, a in enumerate(actions)}
    shape = tuple(
        (mec.states.index(m.action(a).source), tuple(sorted((mec.states.index(t), p) for t, p in m.action(a).delta.items() if p)))
        for a in actions
    )
    commitments = frozenset(tuple(sorted((pos[v], k) for v, k in c.coeffs.items())) for c in rows)
    return _unit_flow_feasible(len(mec.states), shape, commitments, solve)


@lru_cache(maxsize=4096)
def _unit_flow_feasible(n_states: int, shape, commitments, solve) -> bool:
    """Is there a unit-mass stationary flow on the MEC meeting every commitment row?

    Keyed on a structural description only, so identical mode programs of
    different models are solved once.
    """
    names = [f"z{j}" for j in range(len(shape))]
    variables = [Var(v, "recurrent", v) for v in names]
    cons = [Constraint({v: ONE for v in names}, EQ, ONE, "mass")]
    for s in range(n_states):
        row = _Row()
        for j, (src, succ) in enumerate(shape):
            for t, p in succ:
                if t == s:
                    row.add(names[j], p)
            if src == s:
                row.add(names[j], -ONE)
        cons.append(row.done(EQ, ZERO, f"flow[{s}]"))
    for k, row in enumerate(commitments):
        cons.append(Constraint({names[j]: c for j, c in row}, GE, ZERO, f"commit[{k}]"))
    return solve(LpInstance(variables, cons)).feasible


# --- checking and dumping ---------------------------------------------------


def check_assignment(lp: LpInstance, assignment: Mapping[str, Fraction]) -> tuple[bool, list[str]]:
    """Evaluate every constraint exactly; return (all satisfied, violated labels)."""
    missing = [v.name for v in lp.variables if v.name not in assignment]
    if missing:
        raise LpError(f"assignment lacks {len(missing)} variable(s), e.g. {missing[0]}")
    values = {k: Fraction(v) for k, v in assignment.items()}
    bad = [f"nonneg[{v.name}]" for v in lp.variables if values[v.name] < 0]
    for c in lp.constraints:
        if not c.holds(values):
            bad.append(c.label)
    return not bad, bad


def _term(coef: Fraction, var: str, first: bool) -> str:
    mag = abs(coef)
    body = var if mag == 1 else f"{fmt(mag)} {var}"
    if first:
        return f"-{body}" if coef < 0 else body
    return f"{'-' if coef < 0 else '+'} {body}"


def dump_lp(lp: LpInstance) -> str:
    """Plain-text listing, one constraint per line, exact rationals."""
    out = []
    if lp.objective is not None:
        terms = [_term(c, v, i == 0) for i, (v, c) in enumerate(lp.objective.items())]
        out.append("maximize: " + (" ".join(terms) if terms else "0"))
    for c in lp.constraints:
        terms = [_term(k, v, i == 0) for i, (v, k) in enumerate(c.coeffs.items())]
        lhs = " ".join(terms) if terms else "0"
        out.append(f"{c.label}: {lhs} {c.rel} {fmt(c.rhs)}")
    out.append("bounds: " + " ".join(v.name for v in lp.variables) + " >= 0")
    return "\n".join(out) + "\n"


def variable_counts(lp: LpInstance) -> dict[str, int]:
    return {role: lp.count(role) for role in ("transient", "switch", "recurrent")}

