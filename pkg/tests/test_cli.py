import json
import subprocess
import sys

import pytest

from meanpayoff import cli, fixtures
from meanpayoff.model import serialize_mdp, serialize_query
from meanpayoff.reduction import Cnf, to_dimacs


@pytest.fixture
def running(tmp_path):
    model, query = tmp_path / "running.json", tmp_path / "running-query.json"
    model.write_text(serialize_mdp(fixtures.running_example()))
    query.write_text(serialize_query(fixtures.running_query()))
    return str(model), str(query)


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


def test_check(capsys, running):
    model, query = running
    code, doc, _ = run(capsys, "check", "--model", model, "--query", query)
    assert code == 0 and doc == {"realizable": True, "variant": "multi-quant-conjunctive"}
    code, doc, _ = run(capsys, "check", "--model", model, "--query", query, "--stats", "--method", "certified", "--no-prune")
    assert code == 0 and doc["lp"]["constraints"] == 41 and "solve" in doc["timing_seconds"]


def test_check_unrealizable(capsys, tmp_path, running):
    model, _ = running
    query = tmp_path / "hard.json"
    query.write_text(serialize_query(fixtures.running_query(("6/5", "1/2"))))
    code, doc, _ = run(capsys, "check", "--model", model, "--query", query)
    assert code == 1 and doc["realizable"] is False


def test_synth_then_verify_then_simulate(capsys, tmp_path, running):
    model, query = running
    strategy = tmp_path / "sigma.json"
    code, doc, _ = run(capsys, "synth", "--model", model, "--query", query, "--epsilon", "1/20", "--out", strategy)
    assert code == 0 and doc["epsilon"] == "1/20" and doc["memory_elements"] == 4
    assert json.loads(strategy.read_text())["epsilon"] == "1/20"
    code, doc, _ = run(capsys, "verify-strategy", "--model", model, "--query", query, "--strategy", strategy)
    assert code == 0 and doc["verdict"] == "PASS"
    code, doc, _ = run(capsys, "verify-strategy", "--model", model, "--query", query, "--strategy", strategy, "--epsilon", "0")
    assert code == 1 and doc["verdict"] == "FAIL" and doc["failures"]
    code, doc, _ = run(
        capsys, "simulate", "--model", model, "--query", query, "--strategy", strategy, "--runs", 20, "--horizon", 50, "--seed", 3
    )
    assert code == 0 and doc["runs"] == 20 and len(doc["empirical_sat_rate"]) == 2
    _, again, _ = run(
        capsys, "simulate", "--model", model, "--query", query, "--strategy", strategy, "--runs", 20, "--horizon", 50, "--seed", 3
    )
    assert again == doc


def test_synth_default_output(capsys, monkeypatch, tmp_path, running):
    model, query = running
    monkeypatch.chdir(tmp_path)
    code, doc, _ = run(capsys, "synth", "--model", model, "--query", query)
    assert code == 0 and doc["witness"] == "strategy.json" and (tmp_path / "strategy.json").exists()


def test_dump_lp_is_stable(capsys, tmp_path, running):
    model, query = running
    first, second = tmp_path / "a.txt", tmp_path / "b.txt"
    run(capsys, "check", "--model", model, "--query", query, "--dump-lp", first)
    run(capsys, "check", "--model", model, "--query", query, "--dump-lp", second)
    text = first.read_text()
    assert text == second.read_text()
    assert "flow[s]: 1/2 y[l] + y[r] = 1" in text.splitlines()


def test_mec(capsys, running):
    code, doc, _ = run(capsys, "mec", "--model", running[0])
    assert code == 0
    assert doc == {
        "mecs": [{"states": ["u"], "actions": ["a"]}, {"states": ["v", "w"], "actions": ["b", "c", "d", "e"]}],
        "non_mec_actions": ["l", "r"],
    }


def test_pareto(capsys, running):
    model, query = running
    code, doc, _ = run(capsys, "pareto", "--model", model, "--query", query, "--epsilon", "1/10")
    assert code == 0 and doc["free"] == "exp"
    assert [p["value"] for p in doc["points"]] == [["2/5", "3/5"], ["11/10", "1/2"], ["6/5", "2/5"]]


def test_sat2mdp(capsys, tmp_path):
    cnf = tmp_path / "f.cnf"
    cnf.write_text(to_dimacs(Cnf.of(2, [(1, 2), (-1, 2)])))
    model, query = tmp_path / "m.json", tmp_path / "q.json"
    code, doc, _ = run(capsys, "sat2mdp", "--dimacs", cnf, "--out-model", model, "--out-query", query)
    assert code == 0 and doc == {"states": 2, "actions": 4, "dimension": 6}
    code, doc, _ = run(capsys, "check", "--model", model, "--query", query)
    assert code == 0 and doc["variant"] == "multi-quant-conjunctive-joint"
    cnf.write_text(to_dimacs(Cnf.of(1, [(1,), (-1,)])))
    run(capsys, "sat2mdp", "--dimacs", cnf, "--out-model", model, "--out-query", query)
    assert run(capsys, "check", "--model", model, "--query", query)[0] == 1


@pytest.mark.parametrize(
    "argv, fragment",
    [
        (["check", "--model", "missing.json", "--query", "missing.json"], "cannot read model"),
        (["mec", "--model", "{bad}"], "cannot read"),
    ],
)
def test_errors_exit_two(capsys, argv, fragment):
    code, doc, err = run(capsys, *argv)
    assert code == 2 and doc is None and fragment in err


def test_malformed_inputs(capsys, tmp_path, running):
    model, query = running
    bad = tmp_path / "bad.json"
    bad.write_text('{"states": ["s"]')
    code, _, err = run(capsys, "check", "--model", bad, "--query", query)
    assert code == 2 and "error" in err
    code, _, err = run(capsys, "verify-strategy", "--model", model, "--query", query, "--strategy", bad)
    assert code == 2
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 1 1\n1 x 0\n")
    code, _, err = run(capsys, "sat2mdp", "--dimacs", cnf, "--out-model", bad, "--out-query", bad)
    assert code == 2 and "line 2" in err


def test_argument_errors(capsys, running):
    model, query = running
    for argv in (
        ["check", "--model", model],
        ["synth", "--model", model, "--query", query, "--epsilon", "0.01"],
        ["pareto", "--model", model, "--query", query, "--free", "nothing"],
        ["frobnicate"],
    ):
        with pytest.raises(SystemExit) as info:
            cli.main(argv)
        assert info.value.code == 2
    capsys.readouterr()


def test_bad_epsilon_values(capsys, running):
    model, query = running
    for eps in ("0", "1", "-1/2"):  # passed as --epsilon=VALUE so argparse accepts the sign
        code, _, err = run(capsys, "synth", "--model", model, "--query", query, f"--epsilon={eps}", "--out", "/dev/null")
        assert code == 2 and "epsilon" in err


def test_console_entry_point(running):
    model, query = running
    out = subprocess.run(
        [sys.executable, "-m", "meanpayoff.cli", "check", "--model", model, "--query", query],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0 and json.loads(out.stdout)["realizable"] is True
