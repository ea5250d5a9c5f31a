"""MDPs with vector-valued rewards, queries, and the JSON model/query formats.

All numbers are :class:`fractions.Fraction`; floats are rejected on input so
that nothing in the decision path is ever rounded.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence


class ModelError(ValueError):
    """Raised for malformed or inconsistent models and queries."""


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


def to_rational(value: Any, what: str = "value") -> Fraction:
    """Parse an integer or a ``"p/q"`` / ``"-3"`` string into a Fraction.

    Floats are refused on purpose.
    """
    if isinstance(value, bool):
        raise ModelError(f"{what}: booleans are not numbers")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ModelError(f"{what}: {value!r} is not an exact rational (use p/q)")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelError(f"{what}: cannot parse {value!r} as a rational") from exc
    raise ModelError(f"{what}: expected a rational string, got {type(value).__name__}")


def fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Action:
    name: str
    source: str
    delta: Mapping[str, Fraction]
    reward: tuple[Fraction, ...]

    def successors(self) -> list[str]:
        return [t for t, p in self.delta.items() if p > 0]


@dataclass(frozen=True)
class Mdp:
    """Finite MDP whose actions each belong to exactly one state.

    Rewards live on actions. States and actions keep declaration order, which
    fixes every downstream index (MEC order, LP variable order, JSON output).
    """

    states: tuple[str, ...]
    actions: tuple[Action, ...]
    initial: str
    dimension: int
    _action_index: dict[str, int] = field(init=False, repr=False, compare=False)
    _state_index: dict[str, int] = field(init=False, repr=False, compare=False)
    _enabled: dict[str, tuple[Action, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_state_index", {s: i for i, s in enumerate(self.states)})
        object.__setattr__(self, "_action_index", {a.name: i for i, a in enumerate(self.actions)})
        enabled: dict[str, list[Action]] = {s: [] for s in self.states}
        for a in self.actions:
            if a.source in enabled:
                enabled[a.source].append(a)
        object.__setattr__(self, "_enabled", {s: tuple(v) for s, v in enabled.items()})
        self._validate()

    def _validate(self) -> None:
        if self.dimension < 1:
            raise ModelError("dimension must be at least 1")
        if len(set(self.states)) != len(self.states):
            raise ModelError("duplicate state identifiers")
        if len(self._action_index) != len(self.actions):
            raise ModelError("duplicate action identifiers")
        if not self.states:
            raise ModelError("model has no states")
        if self.initial not in self._state_index:
            raise ModelError(f"initial state {self.initial!r} is not declared")
        for a in self.actions:
            if a.source not in self._state_index:
                raise ModelError(f"action {a.name} has undeclared source state {a.source!r}")
            for t, p in a.delta.items():
                if t not in self._state_index:
                    raise ModelError(f"action {a.name} moves to undeclared state {t!r}")
                if p < 0:
                    raise ModelError(f"action {a.name} has negative probability {fmt(p)} to {t}")
            total = sum(a.delta.values(), Fraction(0))
            if total != 1:
                raise ModelError(f"distribution of action {a.name} sums to {fmt(total)}")
            if len(a.reward) != self.dimension:
                raise ModelError(
                    f"reward of action {a.name} has length {len(a.reward)}, expected {self.dimension}"
                )
        for s, acts in self._enabled.items():
            if not acts:
                raise ModelError(f"state {s} has no enabled action")

    def act(self, state: str) -> tuple[Action, ...]:
        return self._enabled[state]

    def action(self, name: str) -> Action:
        return self.actions[self._action_index[name]]

    def has_state(self, state: str) -> bool:
        return state in self._state_index

    def has_action(self, name: str) -> bool:
        return name in self._action_index

    def state_index(self, state: str) -> int:
        return self._state_index[state]

    def action_index(self, name: str) -> int:
        return self._action_index[name]

    @property
    def action_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions)

    def min_reward(self) -> tuple[Fraction, ...]:
        return tuple(min(a.reward[i] for a in self.actions) for i in range(self.dimension))

    def max_abs_reward(self) -> Fraction:
        return max((abs(x) for a in self.actions for x in a.reward), default=Fraction(0))


def make_mdp(
    states: Sequence[str],
    actions: Iterable[tuple[str, str, Mapping[str, Any], Sequence[Any]]],
    initial: str,
    dimension: int | None = None,
) -> Mdp:
    """Convenience constructor: ``actions`` are ``(name, source, delta, reward)`` tuples."""
    acts = []
    for name, source, delta, reward in actions:
        acts.append(
            Action(
                name=name,
                source=source,
                delta={t: to_rational(p, f"delta[{name}][{t}]") for t, p in delta.items()},
                reward=tuple(to_rational(r, f"reward[{name}]") for r in reward),
            )
        )
    if dimension is None:
        dimension = len(acts[0].reward) if acts else 1
    return Mdp(states=tuple(states), actions=tuple(acts), initial=initial, dimension=dimension)


class Variant(str, Enum):
    CONJUNCTIVE = "multi-quant-conjunctive"
    JOINT = "multi-quant-joint"
    CONJUNCTIVE_JOINT = "multi-quant-conjunctive-joint"
    MULTI_QUAL = "multi-qual"
    MONO_QUANT = "mono-quant"
    MONO_QUAL = "mono-qual"

    @property
    def is_mono(self) -> bool:
        return self in (Variant.MONO_QUANT, Variant.MONO_QUAL)

    @property
    def is_qual(self) -> bool:
        return self in (Variant.MULTI_QUAL, Variant.MONO_QUAL)


@dataclass(frozen=True)
class Query:
    """Thresholds for one realizability question.

    ``pr`` is a per-dimension tuple for conjunctive-style variants and a
    one-element tuple for the joint variant.
    """

    variant: Variant
    exp: tuple[Fraction, ...]
    sat: tuple[Fraction, ...]
    pr: tuple[Fraction, ...]
    joint_sat: tuple[Fraction, ...] | None = None
    joint_pr: Fraction | None = None

    @property
    def dimension(self) -> int:
        return len(self.exp)

    def replace(self, **changes: Any) -> "Query":
        data = {
            "variant": self.variant,
            "exp": self.exp,
            "sat": self.sat,
            "pr": self.pr,
            "joint_sat": self.joint_sat,
            "joint_pr": self.joint_pr,
        }
        data.update(changes)
        return make_query(**data)


def make_query(
    variant: Variant | str,
    exp: Sequence[Any],
    sat: Sequence[Any],
    pr: Sequence[Any] | Any,
    joint_sat: Sequence[Any] | None = None,
    joint_pr: Any | None = None,
) -> Query:
    variant = Variant(variant)
    if isinstance(pr, (str, int, Fraction)):
        pr = [pr]
    return Query(
        variant=variant,
        exp=tuple(to_rational(x, "exp") for x in exp),
        sat=tuple(to_rational(x, "sat") for x in sat),
        pr=tuple(to_rational(x, "pr") for x in pr),
        joint_sat=None if joint_sat is None else tuple(to_rational(x, "joint_sat") for x in joint_sat),
        joint_pr=None if joint_pr is None else to_rational(joint_pr, "joint_pr"),
    )


def validate_query(m: Mdp, q: Query) -> None:
    """Raise :class:`ModelError` unless ``q`` is well-formed for ``m``."""
    n = m.dimension
    if len(q.exp) != n or len(q.sat) != n:
        raise ModelError(f"dimension mismatch: model has n={n}, query exp/sat have {len(q.exp)}/{len(q.sat)}")
    if q.variant.is_mono and n != 1:
        raise ModelError(f"variant {q.variant.value} requires n=1, model has n={n}")
    if q.variant is Variant.JOINT:
        if len(q.pr) != 1:
            raise ModelError("multi-quant-joint takes a single probability threshold pr")
    elif len(q.pr) != n:
        raise ModelError(f"dimension mismatch: pr has length {len(q.pr)}, expected {n}")
    for p in q.pr:
        if not 0 <= p <= 1:
            raise ModelError(f"probability threshold {fmt(p)} outside [0,1]")
    if q.variant.is_qual and any(p != 1 for p in q.pr):
        raise ModelError(f"variant {q.variant.value} requires pr = 1 in every dimension")
    has_joint = q.joint_sat is not None or q.joint_pr is not None
    if q.variant is Variant.CONJUNCTIVE_JOINT:
        if q.joint_sat is None or q.joint_pr is None:
            raise ModelError("multi-quant-conjunctive-joint requires joint_sat and joint_pr")
        if len(q.joint_sat) != n:
            raise ModelError(f"dimension mismatch: joint_sat has length {len(q.joint_sat)}, expected {n}")
        if not 0 <= q.joint_pr <= 1:
            raise ModelError(f"probability threshold {fmt(q.joint_pr)} outside [0,1]")
    elif has_joint:
        raise ModelError(f"variant {q.variant.value} does not take joint_sat/joint_pr")


# --- JSON formats -----------------------------------------------------------


def _load_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, exc.lineno, exc.colno) from exc


def _require(doc: Mapping[str, Any], key: str, kind: type | tuple[type, ...]) -> Any:
    if key not in doc:
        raise ModelError(f"missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise ModelError(f"field {key!r} has the wrong type")
    return value


def mdp_from_dict(doc: Mapping[str, Any]) -> Mdp:
    if not isinstance(doc, Mapping):
        raise ModelError("model document must be a JSON object")
    dimension = _require(doc, "dimension", int)
    initial = _require(doc, "initial", str)
    states = _require(doc, "states", list)
    raw_actions = _require(doc, "actions", list)
    actions = []
    for i, raw in enumerate(raw_actions):
        if not isinstance(raw, Mapping):
            raise ModelError(f"action #{i} must be an object")
        name = _require(raw, "name", str)
        delta = _require(raw, "delta", dict)
        reward = _require(raw, "reward", list)
        actions.append((name, _require(raw, "source", str), delta, reward))
    if any(not isinstance(s, str) for s in states):
        raise ModelError("state identifiers must be strings")
    return make_mdp(states, actions, initial, dimension)


def mdp_to_dict(m: Mdp) -> dict[str, Any]:
    return {
        "dimension": m.dimension,
        "initial": m.initial,
        "states": list(m.states),
        "actions": [
            {
                "name": a.name,
                "source": a.source,
                "delta": {t: fmt(p) for t, p in a.delta.items()},
                "reward": [fmt(r) for r in a.reward],
            }
            for a in m.actions
        ],
    }


def parse_mdp(text: str) -> Mdp:
    """Parse and validate a JSON model document."""
    return mdp_from_dict(_load_json(text))


def serialize_mdp(m: Mdp) -> str:
    return json.dumps(mdp_to_dict(m), indent=2)


def query_from_dict(doc: Mapping[str, Any]) -> Query:
    if not isinstance(doc, Mapping):
        raise ModelError("query document must be a JSON object")
    variant = _require(doc, "variant", str)
    try:
        Variant(variant)
    except ValueError as exc:
        raise ModelError(f"unknown variant {variant!r}") from exc
    return make_query(
        variant,
        _require(doc, "exp", list),
        _require(doc, "sat", list),
        _require(doc, "pr", (list, str, int)),
        doc.get("joint_sat"),
        doc.get("joint_pr"),
    )


def query_to_dict(q: Query) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "variant": q.variant.value,
        "exp": [fmt(x) for x in q.exp],
        "sat": [fmt(x) for x in q.sat],
        "pr": fmt(q.pr[0]) if q.variant is Variant.JOINT else [fmt(x) for x in q.pr],
    }
    if q.joint_sat is not None:
        doc["joint_sat"] = [fmt(x) for x in q.joint_sat]
    if q.joint_pr is not None:
        doc["joint_pr"] = fmt(q.joint_pr)
    return doc


def parse_query(text: str) -> Query:
    return query_from_dict(_load_json(text))


def serialize_query(q: Query) -> str:
    return json.dumps(query_to_dict(q), indent=2)
