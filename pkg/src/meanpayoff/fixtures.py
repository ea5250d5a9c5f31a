"""Small reference models used by the tests, the demos and the CLI smoke checks."""
from __future__ import annotations

from fractions import Fraction

from .model import Mdp, Query, Variant, make_mdp, make_query

F = Fraction


def running_example() -> Mdp:
    """Two-dimensional example: a left MEC {u} and a right MEC {v, w} reached from s."""
    return make_mdp(
        ["s", "u", "v", "w"],
        [
            ("l", "s", {"s": "1/2", "u": "1/2"}, [0, 0]),
            ("r", "s", {"v": 1}, [0, 0]),
            ("a", "u", {"u": 1}, [4, 0]),
            ("b", "v", {"v": 1}, [1, 0]),
            ("c", "v", {"w": 1}, [0, 0]),
            ("d", "w", {"w": 1}, [0, 1]),
            ("e", "w", {"v": 1}, [0, 0]),
        ],
        "s",
    )


def running_query(exp: tuple = ("11/10", "1/2")) -> Query:
    return make_query(Variant.CONJUNCTIVE, exp, ["1/2", "1/2"], ["4/5", "4/5"])


def running_fixture_assignment() -> dict[str, Fraction]:
    """Hand-computed solution of the running example's program (nonzero entries only).

    ``y[r]`` is 4/5: flow conservation at ``s`` with ``y[l] = 2/5`` gives ``1 + y[l]/2 = y[l] + y[r]``.
    """
    return {
        "x[a][1]": F(1, 5),
        "x[b][3]": F(3, 10),
        "x[d][3]": F(3, 10),
        "x[d][2]": F(1, 5),
        "y[u][1]": F(1, 5),
        "y[v][3]": F(3, 5),
        "y[v][2]": F(1, 5),
        "y[l]": F(2, 5),
        "y[r]": F(4, 5),
    }


def randomization_example() -> Mdp:
    """One dimension; staying in {s,a} with probability p in [1/10, 2/3] is required."""
    return make_mdp(
        ["s", "t", "u"],
        [
            ("a", "s", {"s": 1}, [2]),
            ("b", "s", {"t": "1/2", "u": "1/2"}, [0]),
            ("c", "t", {"t": 1}, [0]),
            ("d", "u", {"u": 1}, [10]),
        ],
        "s",
    )


def randomization_query(exp="3", pr="11/20") -> Query:
    return make_query(Variant.MONO_QUANT, [exp], ["1"], [pr])


def three_memory_example() -> Mdp:
    return make_mdp(
        ["s", "t"],
        [
            ("a1", "s", {"s": 1}, [1, 0, 0]),
            ("a2", "s", {"s": 1}, [0, 4, 0]),
            ("b", "s", {"t": 1}, [0, 0, 0]),
            ("a3", "t", {"t": 1}, [0, 0, 4]),
        ],
        "s",
    )


def three_memory_query() -> Query:
    return make_query(Variant.JOINT, [0, 1, 1], [1, 0, 0], "1/2")


def n_memory_example(n: int = 3) -> Mdp:
    """Single state with one self-loop per dimension, loop ``a{i}`` pays 1 in dimension ``i``."""
    acts = [(f"a{i + 1}", "s", {"s": 1}, [1 if j == i else 0 for j in range(n)]) for i in range(n)]
    return make_mdp(["s"], acts, "s", n)


def n_memory_query(n: int = 3) -> Query:
    return make_query(Variant.CONJUNCTIVE, [0] * n, [1] * n, [F(1, n)] * n)


def one_state(reward: int | str = 0) -> Mdp:
    return make_mdp(["t"], [("z", "t", {"t": 1}, [reward])], "t")


def one_state_query(sat="0", exp="0") -> Query:
    return make_query(Variant.MONO_QUAL, [exp], [sat], ["1"])


def conjunctive_joint_example() -> tuple[Mdp, Query]:
    """Running example with a joint requirement: half of the runs beat (1/2, 1/2) together."""
    return running_example(), make_query(
        Variant.CONJUNCTIVE_JOINT,
        ["11/10", "1/2"],
        ["1/2", "1/2"],
        ["4/5", "4/5"],
        joint_sat=["1/2", "1/2"],
        joint_pr="1/2",
    )


def realizable_fixtures() -> dict[str, tuple[Mdp, Query]]:
    """Every named (model, query) pair that is known to be realizable."""
    return {
        "running": (running_example(), running_query()),
        "randomization": (randomization_example(), randomization_query()),
        "three-memory": (three_memory_example(), three_memory_query()),
        "n-memory": (n_memory_example(3), n_memory_query(3)),
        "one-state": (one_state(), one_state_query()),
        "conjunctive-joint": conjunctive_joint_example(),
    }
