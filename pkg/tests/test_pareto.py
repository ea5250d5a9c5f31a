import random
from fractions import Fraction
from math import comb

import pytest

from meanpayoff import fixtures
from meanpayoff.lp import build, check_assignment
from meanpayoff.model import make_query
from meanpayoff.pareto import (
    ParetoError,
    covers,
    dominates,
    granularity,
    maximize_threshold,
    pareto_approx,
    weight_grid,
)
from meanpayoff.simplex import solve

F = Fraction


@pytest.fixture(scope="module")
def running_front():
    return pareto_approx(fixtures.running_example(), fixtures.running_query(), F(1, 10))


def test_running_front(running_front):
    values = [p.value for p in running_front.points]
    assert values == [(F(2, 5), F(3, 5)), (F(11, 10), F(1, 2)), (F(6, 5), F(2, 5))]
    assert running_front.offset == (F(1), F(1))
    assert running_front.coordinates == ("exp[1]", "exp[2]")


def test_points_are_mutually_non_dominated(running_front):
    pts = [p.value for p in running_front.points]
    assert not any(dominates(a, b) for a in pts for b in pts)


def test_points_carry_witnesses(running_front):
    m, q = fixtures.running_example(), fixtures.running_query()
    for p in running_front.points:
        lp = build(m, q.replace(exp=p.value))
        ok, bad = check_assignment(lp, lp.complete(p.assignment))
        assert ok, bad


def test_every_achievable_target_is_covered(running_front):
    m, q = fixtures.running_example(), fixtures.running_query()
    rng = random.Random(8)
    hits = 0
    for _ in range(40):
        target = (F(rng.randint(-10, 14), 10), F(rng.randint(-10, 8), 10))
        if solve(build(m, q.replace(exp=target))).feasible:
            hits += 1
            assert any(covers(p.value, target, running_front.offset, F(1, 10)) for p in running_front.points)
    assert hits > 5


def test_coarse_epsilon_still_returns_a_point():
    out = pareto_approx(fixtures.running_example(), fixtures.running_query(), F(10))
    assert len(out.points) >= 1


def test_one_dimension_is_a_single_maximum():
    # staying with probability 1/10 is the least the satisfaction bound allows: 5 - 3/10
    out = pareto_approx(fixtures.randomization_example(), fixtures.randomization_query(), F(1, 10))
    assert [p.value for p in out.points] == [(F(47, 10),)]


def test_grid_sizes():
    for k, g in ((1, 5), (2, 4), (3, 6), (4, 3)):
        grid = weight_grid(k, g)
        assert len(grid) == comb(g + k - 1, k - 1)
        assert all(sum(w) == 1 and min(w) >= 0 for w in grid)
        assert len(set(grid)) == len(grid)
    assert granularity(2, F(1, 10), F(3)) == 72
    assert granularity(1, F(1), F(1)) == 2
    assert granularity(2, F(100), F(1)) == 1


def test_free_probability_thresholds():
    m, q = fixtures.randomization_example(), fixtures.randomization_query()
    out = pareto_approx(m, q, F(1, 10), free="pr")
    best, _ = maximize_threshold(m, q, "pr[1]")
    assert best == F(5, 6)
    assert [p.value for p in out.points] == [(best,)]


def test_free_satisfaction_thresholds():
    m, q = fixtures.running_example(), fixtures.running_query()
    out = pareto_approx(m, q, F(1, 5), free="sat")
    assert out.coordinates == ("sat[1]", "sat[2]") and out.points
    for p in out.points:
        assert solve(build(m, q.replace(sat=p.value))).feasible
    # the query's own satisfaction thresholds are achievable and must be covered
    assert any(covers(p.value, q.sat, out.offset, F(1, 5)) for p in out.points)


def test_free_all():
    m, q = fixtures.randomization_example(), fixtures.randomization_query()
    out = pareto_approx(m, q, F(1, 2), free="all")
    assert len(out.coordinates) == 3 and out.points


def test_joint_probability_maximum():
    m, q = fixtures.conjunctive_joint_example()
    best, witness = maximize_threshold(m, q, "joint_pr")
    assert best == F(3, 5)
    lp = build(m, q.replace(joint_pr=best))
    assert check_assignment(lp, lp.complete(witness))[0]


def test_errors():
    m = fixtures.running_example()
    qual = make_query("multi-qual", ["0", "0"], ["0", "0"], ["1", "1"])
    with pytest.raises(ParetoError, match="fixed to 1"):
        pareto_approx(m, qual, F(1, 10), free="pr")
    with pytest.raises(ParetoError, match="infeasible"):
        pareto_approx(m, fixtures.running_query().replace(sat=("5", "5")), F(1, 10))
    with pytest.raises(ParetoError):
        pareto_approx(m, fixtures.running_query(), F(0))
    with pytest.raises(ParetoError):
        pareto_approx(m, fixtures.running_query(), F(1, 10), free="everything")
    with pytest.raises(ParetoError, match="unknown coordinate"):
        maximize_threshold(m, fixtures.running_query(), "exp[9]")
