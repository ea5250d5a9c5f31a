import random
from fractions import Fraction

import pytest
from oracles import all_formulas, satisfiable

from meanpayoff.analysis import evaluate, product_chain
from meanpayoff.lp import build
from meanpayoff.model import ModelError, ModelSyntaxError, Variant
from meanpayoff.reduction import Cnf, literal_dimension, parse_dimacs, sat_to_instance, to_dimacs
from meanpayoff.simplex import solve
from meanpayoff.strategy import synthesize

F = Fraction


def realizable(f: Cnf) -> bool:
    m, q = sat_to_instance(f)
    return solve(build(m, q, prune=True)).feasible


def test_single_literal():
    f = Cnf.of(1, [(1,)])
    m, q = sat_to_instance(f)
    assert (len(m.states), len(m.actions), m.dimension) == (1, 2, 3)
    assert realizable(f)
    assert not realizable(Cnf.of(1, [(1,), (-1,)]))


@pytest.mark.parametrize("p, clauses", [(3, [(1, 2, 3)]), (2, [(1, -2), (-1, 2), (1, 2)]), (3, [(1,), (-1, 2), (-2, 3)])])
def test_structure(p, clauses):
    f = Cnf.of(p, clauses)
    m, q = sat_to_instance(f)
    k = len(clauses)
    assert len(m.states) == p and len(m.actions) == 2 * p and m.dimension == k + 2 * p
    assert q.variant is Variant.CONJUNCTIVE_JOINT
    for a in m.actions:
        assert list(a.delta.values()) == [1]
        lit = int(a.name.lstrip("~x")) * (-1 if a.name.startswith("~") else 1)
        expected = [1 if lit in c else 0 for c in clauses] + [0] * (2 * p)
        expected[literal_dimension(f, lit)] = 1
        assert list(a.reward) == expected
    assert q.joint_pr == F(1, 2)
    assert q.sat[k:] == (F(1, p),) * (2 * p) and q.pr[k:] == (F(1, 2),) * (2 * p)


def test_witness_plays_a_satisfying_valuation():
    f = Cnf.of(2, [(1, 2), (-1, 2)])
    m, q = sat_to_instance(f)
    sigma = synthesize(m, q, solve(build(m, q, prune=True)).assignment, F(1, 100))
    ev = evaluate(m, sigma, q)
    assert ev.joint_sat_probability >= F(1, 2)
    chain = product_chain(m, sigma)
    joint_mass = F(0)
    for b in ev.bsccs:
        if not chain.locations[b.locations[0]][1].endswith("/yes"):
            continue
        freq: dict[str, Fraction] = {}
        for i, p in b.stationary.items():
            a = chain.locations[i][2]
            freq[a] = freq.get(a, F(0)) + p
        valuation = {i: freq.get(f"x{i}", F(0)) > freq.get(f"~x{i}", F(0)) for i in (1, 2)}
        assert f.satisfied_by(valuation)
        joint_mass += b.reach_probability
    assert joint_mass == F(1, 2)


def test_verdicts_match_brute_force_sample():
    formulas = list(all_formulas(3, 3))
    for p, clauses in random.Random(17).sample(formulas, 60):
        assert realizable(Cnf.of(p, clauses)) == satisfiable(p, clauses)


def test_renaming_does_not_change_verdict():
    rng = random.Random(2)
    formulas = list(all_formulas(3, 3))
    for p, clauses in rng.sample(formulas, 25):
        perm = list(range(1, p + 1))
        rng.shuffle(perm)
        flips = [rng.choice((1, -1)) for _ in range(p)]
        image = [tuple(flips[abs(l) - 1] * perm[abs(l) - 1] * (1 if l > 0 else -1) for l in c) for c in clauses]
        assert realizable(Cnf.of(p, clauses)) == realizable(Cnf.of(p, image))


def test_dimacs_round_trip():
    text = "c a comment\np cnf 3 2\n1 -2 0\n2 3\n-1 0\n"
    f = parse_dimacs(text)
    assert f == Cnf.of(3, [(1, -2), (2, 3, -1)])
    assert parse_dimacs(to_dimacs(f)) == f
    assert parse_dimacs("p cnf 2 1\n1 2") == Cnf.of(2, [(1, 2)])


@pytest.mark.parametrize(
    "text, error",
    [
        ("1 2 0\n", ModelSyntaxError),
        ("p cnf 2\n1 0\n", ModelSyntaxError),
        ("p cnf x 1\n1 0\n", ModelSyntaxError),
        ("p cnf 2 1\n1 a 0\n", ModelSyntaxError),
        ("p cnf 2 1\n0\n", ModelSyntaxError),
        ("c nothing\n", ModelSyntaxError),
        ("p cnf 2 2\n1 0\n", ModelError),
        ("p cnf 2 1\n3 0\n", ModelError),
        ("p cnf 0 1\n1 0\n", ModelError),
        ("p cnf 1 1\np cnf 1 1\n1 0\n", ModelSyntaxError),
    ],
)
def test_dimacs_errors(text, error):
    with pytest.raises(error):
        parse_dimacs(text)


def test_syntax_errors_carry_positions():
    with pytest.raises(ModelSyntaxError) as info:
        parse_dimacs("p cnf 2 1\n1 oops 0\n")
    assert info.value.line == 2 and info.value.column == 3
