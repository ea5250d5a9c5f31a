"""CNF formulas to conjunctive-joint instances (the NP-hardness construction).

Dimensions are ordered clauses first, then the positive literals
``x1..xp``, then the negative literals ``~x1..~xp``; ``n = k + 2p``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import Mdp, ModelError, ModelSyntaxError, Query, Variant, make_mdp, make_query


@dataclass(frozen=True)
class Cnf:
    variables: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.variables < 1:
            raise ModelError("a formula needs at least one variable")
        if not self.clauses:
            raise ModelError("empty formula: no clauses")
        for j, clause in enumerate(self.clauses):
            if not clause:
                raise ModelError(f"clause {j + 1} is empty")
            for lit in clause:
                if lit == 0 or abs(lit) > self.variables:
                    raise ModelError(f"clause {j + 1}: literal {lit} outside 1..{self.variables}")

    @classmethod
    def of(cls, variables: int, clauses) -> "Cnf":
        return cls(variables, tuple(tuple(c) for c in clauses))

    def satisfied_by(self, valuation: dict[int, bool]) -> bool:
        return all(any(valuation[abs(l)] == (l > 0) for l in c) for c in self.clauses)


def parse_dimacs(text: str) -> Cnf:
    """Read DIMACS CNF: comment lines ``c``, one ``p cnf V C`` header, 0-terminated clauses."""
    header = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c") or stripped.startswith("%"):
            continue
        if stripped.startswith("p"):
            parts = stripped.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise ModelSyntaxError("malformed problem line", lineno, 1)
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise ModelSyntaxError("problem line counts must be integers", lineno, 1) from None
            continue
        if header is None:
            raise ModelSyntaxError("clause before the 'p cnf' header", lineno, 1)
        for tok in stripped.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ModelSyntaxError(f"bad literal {tok!r}", lineno, line.find(tok) + 1) from None
            if lit == 0:
                if not current:
                    raise ModelSyntaxError("empty clause", lineno, line.find(tok) + 1)
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if header is None:
        raise ModelSyntaxError("missing 'p cnf' header")
    if current:
        clauses.append(tuple(current))
    if len(clauses) != header[1]:
        raise ModelError(f"header announces {header[1]} clauses, found {len(clauses)}")
    return Cnf(header[0], tuple(clauses))


def to_dimacs(f: Cnf) -> str:
    lines = [f"p cnf {f.variables} {len(f.clauses)}"]
    lines += [" ".join(str(l) for l in c) + " 0" for c in f.clauses]
    return "\n".join(lines) + "\n"


def literal_dimension(f: Cnf, lit: int) -> int:
    """0-based reward dimension counting uses of literal ``lit``."""
    k, p = len(f.clauses), f.variables
    return k + (lit - 1 if lit > 0 else p + (-lit) - 1)


def sat_to_instance(f: Cnf) -> tuple[Mdp, Query]:
    """Cycle MDP over ``s1..sp`` choosing a literal per variable, with the conjunctive-joint query."""
    k, p = len(f.clauses), f.variables
    n = k + 2 * p
    states = [f"s{i}" for i in range(1, p + 1)]
    actions = []
    for i in range(1, p + 1):
        nxt = f"s{i % p + 1}"
        for lit, name in ((i, f"x{i}"), (-i, f"~x{i}")):
            reward = [0] * n
            for j, clause in enumerate(f.clauses):
                if lit in clause:
                    reward[j] = 1
            reward[literal_dimension(f, lit)] = 1
            actions.append((name, f"s{i}", {nxt: 1}, reward))
    m = make_mdp(states, actions, "s1", n)
    lo = m.min_reward()
    inv_p = Fraction(1, p)
    sat = [Fraction(0)] * k + [inv_p] * (2 * p)
    pr = [Fraction(0)] * k + [Fraction(1, 2)] * (2 * p)
    joint_sat = [inv_p] * k + list(lo[k:])
    q = make_query(Variant.CONJUNCTIVE_JOINT, list(lo), sat, pr, joint_sat=joint_sat, joint_pr=Fraction(1, 2))
    return m, q
