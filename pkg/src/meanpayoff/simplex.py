"""Exact linear-programming back end.

``solve`` runs a two-phase primal simplex over exact rationals (GMP ``mpq``
when gmpy2 is importable, :class:`fractions.Fraction` otherwise) with Bland's
pivoting rule. There is no tolerance anywhere: a ``feasible``
answer comes with an assignment that satisfies every constraint exactly,
and ``infeasible`` means the phase-one optimum is strictly negative.

``method="certified"`` is a faster route for larger instances. A floating
point solver (HiGHS through scipy) proposes an answer and the proposal is
only accepted after an exact check: a rounded primal point must satisfy
every constraint, or a rounded Farkas vector must prove infeasibility. When
neither check passes the exact simplex decides.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .lp import EQ, GE, Constraint, LpInstance, check_assignment

try:  # GMP rationals are an order of magnitude faster than fractions.Fraction
    from gmpy2 import mpq as Q
except ImportError:  # pragma: no cover - exercised only without gmpy2
    Q = Fraction

ZERO = Q(0)
ONE = Q(1)

FEASIBLE = "feasible"
OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class SolveStats:
    pivots: int = 0
    max_bits: int = 0
    rows: int = 0
    columns: int = 0
    route: str = "simplex"

    def as_dict(self) -> dict[str, object]:
        return {
            "pivots": self.pivots,
            "max_coefficient_bits": self.max_bits,
            "rows": self.rows,
            "columns": self.columns,
            "route": self.route,
        }


@dataclass
class SolveOutcome:
    status: str
    assignment: dict[str, Fraction] | None = None
    objective_value: Fraction | None = None
    stats: SolveStats = field(default_factory=SolveStats)

    @property
    def feasible(self) -> bool:
        return self.status in (FEASIBLE, OPTIMAL)


class _Tableau:
    """Sparse simplex tableau in canonical form (basis columns are unit vectors)."""

    def __init__(self, n_cols: int):
        self.n_cols = n_cols
        self.rows: list[dict[int, Fraction]] = []
        self.rhs: list[Fraction] = []
        self.basis: list[int] = []
        self.where: dict[int, set[int]] = {}  # column -> rows with a nonzero entry
        self.pivots = 0
        self.max_bits = 0

    def add_row(self, row: dict[int, Fraction], b: Fraction, basic: int) -> None:
        i = len(self.rows)
        self.rows.append(row)
        self.rhs.append(b)
        self.basis.append(basic)
        for j in row:
            self.where.setdefault(j, set()).add(i)

    def drop_row(self, i: int) -> None:
        last = len(self.rows) - 1
        for j in self.rows[i]:
            self.where[j].discard(i)
        if i != last:
            for j in self.rows[last]:
                s = self.where[j]
                s.discard(last)
                s.add(i)
            self.rows[i] = self.rows[last]
            self.rhs[i] = self.rhs[last]
            self.basis[i] = self.basis[last]
        self.rows.pop()
        self.rhs.pop()
        self.basis.pop()

    def _bits(self, q: Fraction) -> None:
        b = max(q.numerator.bit_length(), q.denominator.bit_length())
        if b > self.max_bits:
            self.max_bits = b

    def pivot(self, r: int, c: int, obj: dict[int, Fraction], objval: list[Fraction]) -> None:
        self.pivots += 1
        prow = self.rows[r]
        piv = prow[c]
        if piv != 1:
            inv = 1 / piv
            for j in prow:
                prow[j] *= inv
            self.rhs[r] *= inv
        pb = self.rhs[r]
        for j, v in prow.items():
            self._bits(v)
        self._bits(pb)
        for i in list(self.where.get(c, ())):
            if i == r:
                continue
            row = self.rows[i]
            f = row[c]
            for j, v in prow.items():
                nv = row.get(j, ZERO) - f * v
                if nv:
                    if j not in row:
                        self.where.setdefault(j, set()).add(i)
                    row[j] = nv
                elif j in row:
                    del row[j]
                    self.where[j].discard(i)
            if pb:
                self.rhs[i] -= f * pb
        f = obj.get(c)
        if f:
            for j, v in prow.items():
                nv = obj.get(j, ZERO) - f * v
                if nv:
                    obj[j] = nv
                else:
                    obj.pop(j, None)
            objval[0] += f * pb
        self.basis[r] = c

    def run(self, obj: dict[int, Fraction], objval: list[Fraction], allowed: int) -> bool:
        """Maximize; ``obj`` holds reduced costs. Returns False when unbounded."""
        while True:
            entering = min((j for j, v in obj.items() if v > 0 and j < allowed), default=None)
            if entering is None:
                return True
            best = None
            for i in self.where.get(entering, ()):
                a = self.rows[i][entering]
                if a > 0:
                    ratio = self.rhs[i] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], entering, obj, objval)


def _normalise(coeffs: Mapping[int, Fraction], b: Fraction) -> tuple[dict[int, Q], Q]:
    """Scale a row to integer coefficients with no common factor."""
    lcm = math.lcm(*(q.denominator for q in coeffs.values()), b.denominator)
    ints = {j: q.numerator * (lcm // q.denominator) for j, q in coeffs.items()}
    nb = b.numerator * (lcm // b.denominator)
    g = math.gcd(nb, *ints.values())
    return {j: Q(v // g) for j, v in ints.items()}, Q(nb // g)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _simplex(lp: LpInstance) -> SolveOutcome:
    names = lp.names
    index = {v: j for j, v in enumerate(names)}
    nv = len(names)
    stats = SolveStats(columns=nv)

    prepared: list[tuple[dict[int, Fraction], str, Fraction]] = []
    for c in lp.constraints:
        coeffs = {index[v]: Fraction(k) for v, k in c.coeffs.items() if k}
        b = Fraction(c.rhs)
        if not coeffs:
            if (c.rel == EQ and b != 0) or (c.rel == GE and b > 0):
                return SolveOutcome(INFEASIBLE, stats=stats)
            continue
        coeffs, b = _normalise(coeffs, b)
        rel = c.rel
        if b < 0 or (rel == GE and b == 0):
            coeffs = {j: -q for j, q in coeffs.items()}
            b = -b
            rel = {EQ: EQ, GE: "<="}[rel]
        prepared.append((coeffs, rel, b))
    stats.rows = len(prepared)

    # column layout: originals | slacks and surpluses | artificials
    n_aux = sum(1 for _, rel, _ in prepared if rel != EQ)
    first_art = nv + n_aux
    tab = _Tableau(first_art)
    aux = nv
    art = first_art
    artificial_rows = []
    for coeffs, rel, b in prepared:
        row = dict(coeffs)
        if rel == "<=":
            row[aux] = ONE
            tab.add_row(row, b, aux)
            aux += 1
            continue
        if rel == GE:
            row[aux] = -ONE
            aux += 1
        row[art] = ONE
        artificial_rows.append(len(tab.rows))
        tab.add_row(row, b, art)
        art += 1

    if artificial_rows:
        obj: dict[int, Fraction] = {}
        objval = [ZERO]
        for i in artificial_rows:
            for j, v in tab.rows[i].items():
                if j < first_art:
                    obj[j] = obj.get(j, ZERO) + v
            objval[0] -= tab.rhs[i]
        obj = {j: v for j, v in obj.items() if v}
        tab.run(obj, objval, first_art)
        if objval[0] < 0:
            stats.pivots, stats.max_bits = tab.pivots, tab.max_bits
            return SolveOutcome(INFEASIBLE, stats=stats)
        # drive remaining (degenerate) artificials out of the basis
        i = 0
        while i < len(tab.rows):
            if tab.basis[i] >= first_art:
                col = min((j for j in tab.rows[i] if j < first_art), default=None)
                if col is None:
                    tab.drop_row(i)
                    continue
                tab.pivot(i, col, {}, [ZERO])
            i += 1
        for j in range(first_art, art):
            for i in tab.where.pop(j, ()):
                del tab.rows[i][j]

    value = None
    if lp.objective is not None:
        obj = {index[v]: Q(Fraction(k)) for v, k in lp.objective.items() if k}
        objval = [ZERO]
        for i, bcol in enumerate(tab.basis):
            cb = obj.get(bcol)
            if cb:
                for j, v in tab.rows[i].items():
                    nvv = obj.get(j, ZERO) - cb * v
                    if nvv:
                        obj[j] = nvv
                    else:
                        obj.pop(j, None)
                objval[0] += cb * tab.rhs[i]
        if not tab.run(obj, objval, first_art):
            stats.pivots, stats.max_bits = tab.pivots, tab.max_bits
            return SolveOutcome(UNBOUNDED, stats=stats)
        value = objval[0]

    values = [ZERO] * nv
    for i, bcol in enumerate(tab.basis):
        if bcol < nv:
            values[bcol] = tab.rhs[i]
    stats.pivots, stats.max_bits = tab.pivots, tab.max_bits
    assignment = {v: _frac(x) for v, x in zip(names, values)}
    if lp.objective is not None:
        return SolveOutcome(OPTIMAL, assignment, _frac(value), stats)
    return SolveOutcome(FEASIBLE, assignment, None, stats)


def solve(lp: LpInstance, method: str = "simplex") -> SolveOutcome:
    """Decide feasibility of ``lp`` (or maximize its objective) exactly.

    ``method`` is ``"simplex"`` (exact two-phase simplex) or ``"certified"``
    (float proposal plus exact certificate, exact simplex as fallback). Both
    return the same statuses; only the returned vertex may differ.
    """
    if method == "simplex":
        out = _simplex(lp)
    elif method == "certified":
        from .certify import propose

        found = propose(lp)
        if found is None:
            out = _simplex(lp)
            out.stats.route = "certified-fallback"
        else:
            status, point = found
            stats = SolveStats(rows=len(lp.constraints), columns=len(lp.variables), route=f"certified-{status}")
            out = SolveOutcome(status, point, None, stats)
    else:
        raise ValueError(f"unknown method {method!r}")
    if out.feasible:
        ok, bad = check_assignment(lp, out.assignment)
        assert ok, f"solver produced an assignment violating {bad[:3]}"
    return out


def maximize(lp: LpInstance, objective: Mapping[str, Fraction], method: str = "simplex") -> SolveOutcome:
    return solve(lp.with_objective(objective), method)


def is_feasible(lp: LpInstance, method: str = "simplex") -> bool:
    return solve(lp.with_objective(None) if lp.objective is not None else lp, method).feasible


__all__ = [
    "Constraint",
    "FEASIBLE",
    "INFEASIBLE",
    "OPTIMAL",
    "UNBOUNDED",
    "SolveOutcome",
    "SolveStats",
    "is_feasible",
    "maximize",
    "solve",
]
