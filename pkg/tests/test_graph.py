import random

from hypothesis import given, settings, strategies as st
from oracles import brute_force_mecs, random_mdp

from meanpayoff import fixtures
from meanpayoff.graph import is_strongly_connected, mec_decomposition, restrict
from meanpayoff.model import make_mdp


def as_sets(dec):
    return {(frozenset(c.states), frozenset(c.actions)) for c in dec.mecs}


def test_running_example_mecs():
    dec = mec_decomposition(fixtures.running_example())
    assert [(c.states, c.actions) for c in dec.mecs] == [(("u",), ("a",)), (("v", "w"), ("b", "c", "d", "e"))]
    assert set(dec.non_mec_actions) == {"l", "r"}
    assert dec.state_to_mec == {"s": None, "u": 0, "v": 1, "w": 1}


def test_single_state_is_one_mec():
    m = fixtures.one_state()
    dec = mec_decomposition(m)
    assert as_sets(dec) == {(frozenset({"t"}), frozenset({"z"}))}
    assert dec.non_mec_actions == ()


def test_restrictions():
    m = fixtures.running_example()
    left, right = mec_decomposition(m).mecs
    r = restrict(m, right)
    assert (len(r.states), len(r.actions)) == (2, 4) and is_strongly_connected(r)
    l = restrict(m, left)
    assert (len(l.states), len(l.actions)) == (1, 1)
    one = fixtures.one_state()
    whole = restrict(one, mec_decomposition(one).mecs[0])
    assert whole.states == one.states and whole.actions == one.actions


def test_probabilistic_escape_is_not_an_end_component():
    # b stays in t with 1/2 and leaves for the sink otherwise, so {t} is not closed under b
    m = make_mdp(
        ["t", "sink"],
        [("b", "t", {"t": "1/2", "sink": "1/2"}, [0]), ("z", "sink", {"sink": 1}, [0])],
        "t",
    )
    assert as_sets(mec_decomposition(m)) == {(frozenset({"sink"}), frozenset({"z"}))}


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10**9))
def test_against_brute_force(seed):
    m = random_mdp(random.Random(seed), max_states=5, max_actions=8)
    dec = mec_decomposition(m)
    assert as_sets(dec) == brute_force_mecs(m)
    # partition properties
    covered = [a for c in dec.mecs for a in c.actions] + list(dec.non_mec_actions)
    assert sorted(covered) == sorted(a.name for a in m.actions)
    states = [s for c in dec.mecs for s in c.states]
    assert len(states) == len(set(states))


def test_deterministic_order():
    rng = random.Random(3)
    for _ in range(50):
        m = random_mdp(rng, 5, 8)
        assert mec_decomposition(m) == mec_decomposition(m)
        firsts = [min(m.states.index(s) for s in c.states) for c in mec_decomposition(m).mecs]
        assert firsts == sorted(firsts)
