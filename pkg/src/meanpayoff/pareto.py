"""Approximate Pareto curves of achievable threshold vectors.

With the satisfaction constraints fixed, the achievable expectation vectors
form a convex polytope, and each of its coordinates is a linear function of
the recurrent flow. Maximizing positive weightings of those functions over a
grid of weight vectors lands on the vertices that matter. All objective
vectors are first shifted so every reward is at least 1, because the
multiplicative ``(1 + eps)`` guarantee only makes sense for positive values.

Probability thresholds are also linear in the flow, so ``free="pr"`` uses the
same sweep. Value thresholds are not: ``sat`` multiplies the flow inside the
commitment rows. For ``free="sat"`` (and ``free="all"``) every grid direction
is searched by bisection along a ray from the origin of the shifted
coordinates instead. Feasibility is monotone along such a ray because
lowering any threshold only relaxes the program.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

from .lp import LpInstance, build, check_assignment
from .model import Mdp, Query, Variant, fmt
from .simplex import maximize, solve

FREE_CHOICES = ("exp", "sat", "pr", "all")


class ParetoError(ValueError):
    pass


@dataclass
class ParetoPoint:
    value: tuple[Fraction, ...]
    assignment: dict[str, Fraction]


@dataclass
class ParetoApproximation:
    points: list[ParetoPoint]
    epsilon: Fraction
    offset: tuple[Fraction, ...]
    free: str
    coordinates: tuple[str, ...]
    directions: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "free": self.free,
            "coordinates": list(self.coordinates),
            "epsilon": fmt(self.epsilon),
            "offset": [fmt(x) for x in self.offset],
            "directions": self.directions,
            "points": [
                {
                    "value": [fmt(x) for x in p.value],
                    "assignment": {k: fmt(v) for k, v in sorted(p.assignment.items()) if v},
                }
                for p in self.points
            ],
        }


def granularity(k: int, eps: Fraction, top: Fraction) -> int:
    """Grid points per axis, ``ceil(2k / eps * ln(top * k))`` with the logarithm floored at 1."""
    log = max(1.0, math.log(float(top) * k))
    return max(1, math.ceil(2 * k / float(eps) * log))


def weight_grid(k: int, g: int) -> list[tuple[Fraction, ...]]:
    """All vectors ``c / g`` with non-negative integer ``c`` summing to ``g``."""
    if k == 1:
        return [(Fraction(1),)]
    out = []
    for cut in itertools.combinations(range(g + k - 1), k - 1):
        parts = [b - a - 1 for a, b in zip((-1,) + cut, cut + (g + k - 1,))]
        out.append(tuple(Fraction(c, g) for c in parts))
    return out


def dominates(p: Sequence[Fraction], q: Sequence[Fraction]) -> bool:
    return all(a >= b for a, b in zip(p, q)) and any(a > b for a, b in zip(p, q))


def non_dominated(points: list[ParetoPoint]) -> list[ParetoPoint]:
    seen: dict[tuple[Fraction, ...], ParetoPoint] = {}
    for p in points:
        seen.setdefault(p.value, p)
    keep = [p for p in seen.values() if not any(dominates(q.value, p.value) for q in seen.values())]
    return sorted(keep, key=lambda p: p.value)


def covers(point: Sequence[Fraction], target: Sequence[Fraction], offset: Sequence[Fraction], eps: Fraction) -> bool:
    """``(1 + eps) * (point + offset) >= target + offset`` in every coordinate."""
    return all((1 + eps) * (p + o) >= t + o for p, t, o in zip(point, target, offset))


def _reward_offset(m: Mdp) -> tuple[Fraction, ...]:
    return tuple(max(Fraction(0), -r) + 1 for r in m.min_reward())


def _max_reward(m: Mdp) -> tuple[Fraction, ...]:
    return tuple(max(a.reward[i] for a in m.actions) for i in range(m.dimension))


def _probability_selectors(q: Query) -> tuple[list[Callable], list[str]]:
    n = q.dimension
    full = (1 << n) - 1
    if q.variant is Variant.JOINT:
        return [lambda mode: mode.mask == full], ["pr"]
    sel = [(lambda mode, i=i: bool(mode.mask >> i & 1)) for i in range(n)]
    names = [f"pr[{i + 1}]" for i in range(n)]
    if q.variant is Variant.CONJUNCTIVE_JOINT:
        sel.append(lambda mode: mode.flag == "yes")
        names.append("joint_pr")
    return sel, names


def _with_probabilities(q: Query, value: Sequence[Fraction]) -> Query:
    if q.variant is Variant.CONJUNCTIVE_JOINT:
        return q.replace(pr=tuple(value[:-1]), joint_pr=value[-1])
    return q.replace(pr=tuple(value))


@dataclass
class _Linear:
    lp: LpInstance
    objectives: list[dict[str, Fraction]]
    coordinates: tuple[str, ...]
    offset: tuple[Fraction, ...]
    top: Fraction
    point_query: Callable[[Sequence[Fraction]], Query]


def _linear_problem(m: Mdp, q: Query, free: str, prune: bool, relax: set[int] | None = None) -> _Linear:
    """The program with the ``free`` thresholds in ``relax`` made vacuous, plus one linear objective per coordinate."""
    n = m.dimension
    if free == "exp":
        relax = set(range(n)) if relax is None else relax
        low = m.min_reward()
        lp = build(m, q.replace(exp=tuple(low[i] if i in relax else q.exp[i] for i in range(n))), prune=prune)
        recurrent = [v for v in lp.variables if v.role == "recurrent"]
        objectives = [
            {v.name: m.action(v.item).reward[i] for v in recurrent if m.action(v.item).reward[i]} for i in range(n)
        ]
        offset = _reward_offset(m)
        top = max(hi + o for hi, o in zip(_max_reward(m), offset))
        return _Linear(
            lp, objectives, tuple(f"exp[{i + 1}]" for i in range(n)), offset, top, lambda v: q.replace(exp=tuple(v))
        )
    if q.variant.is_qual:
        raise ParetoError(f"pr is fixed to 1 in variant {q.variant.value}")
    selectors, coords = _probability_selectors(q)
    relax = set(range(len(selectors))) if relax is None else relax
    current = list(q.pr) + ([q.joint_pr] if q.variant is Variant.CONJUNCTIVE_JOINT else [])
    base_q = _with_probabilities(q, [Fraction(0) if i in relax else current[i] for i in range(len(selectors))])
    lp = build(m, base_q, prune=prune)
    recurrent = [v for v in lp.variables if v.role == "recurrent"]
    objectives = [{v.name: Fraction(1) for v in recurrent if sel(v.mode)} for sel in selectors]
    offset = tuple(Fraction(1) for _ in selectors)
    return _Linear(lp, objectives, tuple(coords), offset, Fraction(2), lambda v: _with_probabilities(q, v))


def _value(objective: dict[str, Fraction], assignment: dict[str, Fraction]) -> Fraction:
    return sum((c * assignment[name] for name, c in objective.items()), Fraction(0))


def maximize_threshold(m: Mdp, q: Query, coordinate: str, prune: bool = True) -> tuple[Fraction, dict[str, Fraction]]:
    """Largest value of one threshold (``"exp[i]"``, ``"pr[i]"``, ``"pr"`` or ``"joint_pr"``) keeping the others.

    Returns the exact optimum and an optimal assignment of the program for
    ``q`` with that threshold replaced by the optimum.
    """
    free = "exp" if coordinate.startswith("exp") else "pr"
    coords = _linear_problem(m, q, free, prune, relax=set()).coordinates
    if coordinate not in coords:
        raise ParetoError(f"unknown coordinate {coordinate!r}; expected one of {', '.join(coords)}")
    k = coords.index(coordinate)
    problem = _linear_problem(m, q, free, prune, relax={k})
    out = maximize(problem.lp, problem.objectives[k])
    if not out.feasible:
        raise ParetoError("the remaining thresholds are already infeasible")
    return _value(problem.objectives[k], out.assignment), out.assignment


def _linear_sweep(
    m: Mdp, q: Query, eps: Fraction, free: str, grid: int | None, prune: bool
) -> ParetoApproximation:
    problem = _linear_problem(m, q, free, prune)
    lp, objectives = problem.lp, problem.objectives
    if not solve(lp).feasible:
        raise ParetoError("no achievable point: the fixed constraints are already infeasible")
    k = len(objectives)
    g = grid or granularity(k, eps, problem.top)
    weights = weight_grid(k, g)
    found: list[ParetoPoint] = []
    for w in weights:
        combined: dict[str, Fraction] = {}
        for wi, obj in zip(w, objectives):
            if wi:
                for name, c in obj.items():
                    combined[name] = combined.get(name, Fraction(0)) + wi * c
        asg = maximize(lp, combined).assignment
        found.append(ParetoPoint(tuple(_value(obj, asg) for obj in objectives), asg))
    points = non_dominated(found)
    for p in points:
        _certify(m, problem.point_query(p.value), p)
    return ParetoApproximation(points, eps, problem.offset, free, problem.coordinates, len(weights))


def _certify(m: Mdp, q: Query, p: ParetoPoint) -> None:
    full = build(m, q)
    ok, bad = check_assignment(full, full.complete(p.assignment))
    if not ok:  # pragma: no cover - would indicate a bug in the builder
        raise AssertionError(f"pareto point {p.value} fails {bad[:3]}")


def _ray_sweep(
    m: Mdp, q: Query, eps: Fraction, free: str, grid: int | None, prune: bool, method: str
) -> ParetoApproximation:
    n = m.dimension
    roff = _reward_offset(m)
    lo_r = m.min_reward()
    hi_r = _max_reward(m)
    blocks = ["sat"] if free == "sat" else ["exp", "sat", "pr"]
    if "pr" in blocks and q.variant.is_qual:
        raise ParetoError(f"pr is fixed to 1 in variant {q.variant.value}")
    offset: list[Fraction] = []
    floor: list[Fraction] = []  # shifted value below which a coordinate is vacuous
    ceil: list[Fraction] = []  # shifted value above which nothing more can be achieved
    coords: list[str] = []
    for b in blocks:
        if b == "pr":
            size = 1 if q.variant is Variant.JOINT else n
            offset += [Fraction(1)] * size
            floor += [Fraction(1)] * size
            ceil += [Fraction(2)] * size
            coords += ["pr"] if size == 1 else [f"pr[{i + 1}]" for i in range(n)]
        else:
            offset += list(roff)
            floor += [lo + o for lo, o in zip(lo_r, roff)]
            ceil += [hi + o for hi, o in zip(hi_r, roff)]
            coords += [f"{b}[{i + 1}]" for i in range(n)]
    k = len(offset)

    def unshift(shifted: Sequence[Fraction]) -> tuple[Fraction, ...]:
        return tuple(s - o for s, o in zip(shifted, offset))

    def query_at(value: Sequence[Fraction]) -> Query:
        changes: dict[str, Any] = {}
        pos = 0
        for b in blocks:
            size = 1 if (b == "pr" and q.variant is Variant.JOINT) else n
            part = value[pos : pos + size]
            pos += size
            if b == "pr":
                changes["pr"] = tuple(max(Fraction(0), x) for x in part)
            else:
                changes[b] = tuple(part)
        return q.replace(**changes)

    def probe(shifted: Sequence[Fraction]):
        qq = query_at(unshift(shifted))
        out = solve(build(m, qq, prune=prune), method)
        return out.assignment if out.feasible else None

    g = grid or granularity(k, eps, max(ceil))
    weights = weight_grid(k, g)
    if probe(floor) is None:
        raise ParetoError("no achievable point: the fixed constraints are already infeasible")
    found: list[ParetoPoint] = []
    for w in weights:
        active = [i for i in range(k) if w[i]]
        lo = min(floor[i] / w[i] for i in active)
        hi = min(ceil[i] / w[i] for i in active)
        lo_asg = probe([lo * wi for wi in w])
        assert lo_asg is not None
        hi_asg = probe([hi * wi for wi in w])
        if hi_asg is not None:
            lo, lo_asg = hi, hi_asg
        else:
            while hi > lo * (1 + eps / 2):
                mid = (lo + hi) / 2
                asg = probe([mid * wi for wi in w])
                if asg is None:
                    hi = mid
                else:
                    lo, lo_asg = mid, asg
        shifted = [max(lo * wi, floor[i]) for i, wi in enumerate(w)]
        found.append(ParetoPoint(unshift(shifted), lo_asg))
    points = non_dominated(found)
    for p in points:
        _certify(m, query_at(p.value), p)
    return ParetoApproximation(points, eps, tuple(offset), free, tuple(coords), len(weights))


def pareto_approx(
    m: Mdp,
    q: Query,
    eps: Fraction,
    free: str = "exp",
    grid: int | None = None,
    prune: bool = True,
    method: str = "simplex",
) -> ParetoApproximation:
    """An ``eps``-approximate Pareto set for the thresholds named by ``free``.

    The thresholds of ``q`` that are not free stay fixed (for ``free="exp"``
    the ``exp`` of ``q`` is ignored). ``grid`` overrides the number of
    points per axis of the weight grid. Every returned point comes with an
    assignment that satisfies the program for ``q`` with the free thresholds
    set to that point.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ParetoError("epsilon must be positive")
    if free not in FREE_CHOICES:
        raise ParetoError(f"free must be one of {', '.join(FREE_CHOICES)}")
    if free in ("exp", "pr"):
        return _linear_sweep(m, q, eps, free, grid, prune)
    return _ray_sweep(m, q, eps, free, grid, prune, method)
