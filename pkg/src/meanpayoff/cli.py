"""Command-line front end.

Every subcommand prints one JSON document on stdout. Exit codes: 0 means
realizable (or PASS), 1 means not realizable (or FAIL), and 2 means the
input could not be read or was invalid.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .analysis import verify
from .graph import mec_decomposition
from .lp import LpError, build, dump_lp, variable_counts
from .model import Mdp, ModelError, Query, fmt, parse_mdp, parse_query, serialize_mdp, serialize_query, to_rational
from .pareto import FREE_CHOICES, ParetoError, pareto_approx
from .reduction import parse_dimacs, sat_to_instance
from .simplex import solve
from .simulate import simulate
from .strategy import StrategyError, parse_strategy, serialize_strategy, synthesize

EXIT_OK, EXIT_NO, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _read(path: str, what: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {what} {path}: {exc.strerror}") from exc


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from exc


def _load(args: argparse.Namespace) -> tuple[Mdp, Query]:
    return parse_mdp(_read(args.model, "model")), parse_query(_read(args.query, "query"))


def _emit(doc: Any) -> None:
    json.dump(doc, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _decide(args: argparse.Namespace) -> tuple[dict[str, Any], Mdp, Query, Any]:
    m, q = _load(args)
    if args.dump_lp:
        _write(args.dump_lp, dump_lp(build(m, q)))
    started = time.perf_counter()
    lp = build(m, q, prune=not args.no_prune)
    built = time.perf_counter()
    out = solve(lp, args.method)
    done = time.perf_counter()
    verdict: dict[str, Any] = {"realizable": out.feasible, "variant": q.variant.value}
    if args.stats:
        verdict["timing_seconds"] = {"build": round(built - started, 6), "solve": round(done - built, 6)}
        verdict["lp"] = {
            "variables": variable_counts(lp),
            "constraints": len(lp.constraints),
            "pruned_modes": lp.notes.get("pruned_modes", 0),
        }
        verdict["solver"] = out.stats.as_dict()
    return verdict, m, q, out


def cmd_check(args: argparse.Namespace) -> int:
    verdict, *_ = _decide(args)
    _emit(verdict)
    return EXIT_OK if verdict["realizable"] else EXIT_NO


def cmd_synth(args: argparse.Namespace) -> int:
    verdict, m, q, out = _decide(args)
    if out.feasible:
        sigma = synthesize(m, q, out.assignment, args.epsilon)
        _write(args.out, serialize_strategy(sigma))
        verdict["witness"] = args.out
        verdict["epsilon"] = fmt(sigma.epsilon)
        verdict["memory_elements"] = len(sigma.memory)
    _emit(verdict)
    return EXIT_OK if out.feasible else EXIT_NO


def cmd_verify(args: argparse.Namespace) -> int:
    m, q = _load(args)
    sigma = parse_strategy(_read(args.strategy, "strategy"))
    result = verify(m, sigma, q, args.epsilon)
    _emit(result.to_dict())
    return EXIT_OK if result.passed else EXIT_NO


def cmd_simulate(args: argparse.Namespace) -> int:
    m = parse_mdp(_read(args.model, "model"))
    q = parse_query(_read(args.query, "query")) if args.query else None
    sigma = parse_strategy(_read(args.strategy, "strategy"))
    report = simulate(m, sigma, args.runs, args.horizon, args.seed, q)
    _emit(report.to_dict())
    return EXIT_OK


def cmd_pareto(args: argparse.Namespace) -> int:
    m, q = _load(args)
    approx = pareto_approx(m, q, args.epsilon, args.free, args.grid, not args.no_prune, args.method)
    _emit(approx.to_dict())
    return EXIT_OK


def cmd_mec(args: argparse.Namespace) -> int:
    m = parse_mdp(_read(args.model, "model"))
    dec = mec_decomposition(m)
    _emit(
        {
            "mecs": [{"states": list(c.states), "actions": list(c.actions)} for c in dec.mecs],
            "non_mec_actions": list(dec.non_mec_actions),
        }
    )
    return EXIT_OK


def cmd_sat2mdp(args: argparse.Namespace) -> int:
    m, q = sat_to_instance(parse_dimacs(_read(args.dimacs, "formula")))
    _write(args.out_model, serialize_mdp(m) + "\n")
    _write(args.out_query, serialize_query(q) + "\n")
    _emit({"states": len(m.states), "actions": len(m.actions), "dimension": m.dimension})
    return EXIT_OK


def _rational(text: str) -> Fraction:
    try:
        return to_rational(text, "argument")
    except ModelError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="meanpayoff", description="Multi-objective mean-payoff MDP queries.")
    sub = top.add_subparsers(dest="command", required=True)

    def with_inputs(p: argparse.ArgumentParser, query: bool = True) -> None:
        p.add_argument("--model", required=True, help="model JSON file")
        if query:
            p.add_argument("--query", required=True, help="query JSON file")

    def with_solver(p: argparse.ArgumentParser) -> None:
        p.add_argument("--method", choices=("simplex", "certified"), default="simplex")
        p.add_argument("--no-prune", action="store_true", help="solve the program without mode pruning")

    def with_decision(p: argparse.ArgumentParser) -> None:
        with_inputs(p)
        with_solver(p)
        p.add_argument("--dump-lp", metavar="PATH", help="write the full (unpruned) program as text")
        p.add_argument("--stats", action="store_true", help="add timing and program size to the verdict")

    p = sub.add_parser("check", help="decide realizability")
    with_decision(p)
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("synth", help="decide and write an epsilon-witness strategy")
    with_decision(p)
    p.add_argument("--epsilon", type=_rational, default=Fraction(1, 100))
    p.add_argument("--out", default="strategy.json", help="strategy file to write")
    p.set_defaults(run=cmd_synth)

    p = sub.add_parser("verify-strategy", help="evaluate a strategy file exactly")
    with_inputs(p)
    p.add_argument("--strategy", required=True)
    p.add_argument("--epsilon", type=_rational, default=None, help="slack (defaults to the strategy's own)")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("simulate", help="Monte-Carlo runs of a strategy")
    with_inputs(p, query=False)
    p.add_argument("--query", help="query JSON file (enables satisfaction rates)")
    p.add_argument("--strategy", required=True)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=cmd_simulate)

    p = sub.add_parser("pareto", help="approximate Pareto set of thresholds")
    with_inputs(p)
    with_solver(p)
    p.add_argument("--epsilon", type=_rational, default=Fraction(1, 10))
    p.add_argument("--free", choices=FREE_CHOICES, default="exp")
    p.add_argument("--grid", type=int, default=None, help="override the points per axis of the weight grid")
    p.set_defaults(run=cmd_pareto)

    p = sub.add_parser("mec", help="maximal end components")
    with_inputs(p, query=False)
    p.set_defaults(run=cmd_mec)

    p = sub.add_parser("sat2mdp", help="instance of the SAT reduction")
    p.add_argument("--dimacs", required=True)
    p.add_argument("--out-model", required=True)
    p.add_argument("--out-query", required=True)
    p.set_defaults(run=cmd_sat2mdp)
    return top


def main(argv: Sequence[str] | None = None) -> int:
    args = parser().parse_args(argv)
    try:
        return args.run(args)
    except (CliError, ModelError, LpError, StrategyError, ParetoError, ValueError) as exc:
        print(f"meanpayoff {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
