from fractions import Fraction

import numpy as np
import pytest

from meanpayoff import fixtures
from meanpayoff.analysis import evaluate
from meanpayoff.lp import build
from meanpayoff.model import ModelError, make_mdp, make_query
from meanpayoff.simplex import solve
from meanpayoff.simulate import BLOCK, _Streams, simulate
from meanpayoff.strategy import TRANSIENT, FiniteStrategy, synthesize

F = Fraction


def coin(p_q):
    """One state with two self-loops: p pays 0 and q pays 1, q is played with probability ``p_q``."""
    m = make_mdp(["t"], [("p", "t", {"t": 1}, [0]), ("q", "t", {"t": 1}, [1])], "t")
    sigma = FiniteStrategy(
        memory=(TRANSIENT,),
        transient_next={"t": {"p": 1 - p_q, "q": p_q}},
        switch={},
        recurrent_next={},
        initial_memory={TRANSIENT: F(1)},
        epsilon=F(1, 100),
    )
    return m, sigma


def test_constant_reward():
    m = make_mdp(["t"], [("z", "t", {"t": 1}, [7])], "t")
    q = make_query("multi-qual", ["0"], ["7"], ["1"])
    sigma = synthesize(m, q, solve(build(m, q)).assignment, F(1, 100))
    rep = simulate(m, sigma, runs=5, horizon=11, seed=3, query=q)
    assert rep.empirical_expectation == (7.0,)
    assert rep.empirical_action_frequency == {"z": 1.0}
    assert rep.window == 6 and rep.empirical_sat_rate == (1.0,)


def test_reports_are_reproducible():
    m, q = fixtures.running_example(), fixtures.running_query()
    sigma = synthesize(m, q, fixtures.running_fixture_assignment(), F(1, 10))
    a = simulate(m, sigma, 40, 300, 11, q)
    b = simulate(m, sigma, 40, 300, 11, q)
    assert a.to_dict() == b.to_dict()
    assert simulate(m, sigma, 40, 300, 12, q).to_dict() != a.to_dict()


def test_runs_do_not_depend_on_batch_size():
    """Run k draws from its own stream, so the first runs are the same in any batch."""
    few, many = _Streams(99, 3), _Streams(99, 9)
    for t in range(3 * BLOCK // 2):
        a = few.draw(np.arange(3))
        b = many.draw(np.arange(9))
        assert (a == b[:3]).all()
        if t % 5 == 0:
            # a rejected draw for run 1 alone advances only that stream
            assert few.draw(np.array([1]))[0] == many.draw(np.array([1]))[0]
    assert simulate(*coin(F(1, 3)), 1, 60, 4).to_dict()["runs"] == 1


def test_sampler_frequencies():
    for p in (F(1, 3), F(5, 7), F(1, 2)):
        m, sigma = coin(p)
        rep = simulate(m, sigma, 200, 200, 5)
        assert abs(rep.empirical_action_frequency["q"] - float(p)) < 0.02
        assert abs(rep.empirical_expectation[0] - float(p)) < 0.02


def test_matches_exact_analysis():
    m, q = fixtures.randomization_example(), fixtures.randomization_query()
    out = solve(build(m, q))
    sigma = synthesize(m, q, out.assignment, F(1, 100))
    exact = evaluate(m, sigma, q)
    rep = simulate(m, sigma, 2000, 40, 1, q)
    assert abs(rep.empirical_expectation[0] - float(exact.expectation[0])) < 0.15
    assert abs(rep.empirical_sat_rate[0] - float(exact.sat_probability[0])) < 0.05


def test_joint_rate_reported():
    m, q = fixtures.conjunctive_joint_example()
    sigma = synthesize(m, q, solve(build(m, q)).assignment, F(1, 10))
    rep = simulate(m, sigma, 100, 100, 2, q)
    assert rep.empirical_joint_sat_rate is not None and 0 <= rep.empirical_joint_sat_rate <= 1
    assert simulate(m, sigma, 10, 10, 2).empirical_joint_sat_rate is None


def test_rejects_bad_arguments():
    m, sigma = coin(F(1, 2))
    for runs, horizon in ((0, 10), (10, 0), (-1, 5)):
        with pytest.raises(ValueError):
            simulate(m, sigma, runs, horizon, 0)
    huge = F(1, 2**64 + 1)
    m, sigma = coin(huge)
    with pytest.raises(ModelError, match="64 bits"):
        simulate(m, sigma, 1, 1, 0)
