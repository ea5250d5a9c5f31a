"""Exact multi-objective mean-payoff queries on Markov decision processes."""
from .analysis import evaluate, verify
from .graph import Mec, MecDecomposition, mec_decomposition
from .lp import LpInstance, build, check_assignment, dump_lp
from .model import Mdp, ModelError, Query, Variant, make_mdp, make_query, parse_mdp, parse_query
from .pareto import pareto_approx
from .reduction import Cnf, parse_dimacs, sat_to_instance
from .simplex import maximize, solve
from .simulate import simulate
from .strategy import FiniteStrategy, synthesize

__all__ = [
    "Cnf",
    "FiniteStrategy",
    "LpInstance",
    "Mdp",
    "Mec",
    "MecDecomposition",
    "ModelError",
    "Query",
    "Variant",
    "build",
    "check_assignment",
    "dump_lp",
    "evaluate",
    "make_mdp",
    "make_query",
    "maximize",
    "mec_decomposition",
    "pareto_approx",
    "parse_dimacs",
    "parse_mdp",
    "parse_query",
    "sat_to_instance",
    "simulate",
    "solve",
    "synthesize",
    "verify",
]
