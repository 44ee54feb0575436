import json

import pytest

from causal_imitation.cli import main
from causal_imitation.fixtures import fixture_names, load_query
from causal_imitation.diagram import serialize_query
from causal_imitation.oracle import best_imitator
from causal_imitation.imitation import strategy_contexts
from causal_imitation.scm import expectation, scm_from_json


@pytest.fixture
def graphs(tmp_path):
    def write(name):
        p = tmp_path / f"{name}.cg"
        p.write_text(serialize_query(load_query(name)))
        return str(p)

    return write


def test_check_imitable(graphs, capsys):
    assert main(["check", graphs("fig2c")]) == 0
    out = capsys.readouterr().out
    assert "imitable: yes" in out
    assert "X2 | {Z}" in out


def test_check_not_imitable_json(graphs, capsys):
    assert main(["check", "--json", "-g", graphs("fig1d")]) == 2
    out = json.loads(capsys.readouterr().out)
    assert list(out) == ["imitable", "ox", "missing_actions", "boundary_actions", "plan"]
    assert out["imitable"] is False
    assert "X1" in out["missing_actions"]


def test_plan_alias_and_fixture_name(capsys):
    assert main(["plan", "fig2c"]) == 0
    assert main(["plan", "fig2c.cg"]) == 0


def test_missing_file(capsys):
    assert main(["check", "missing.cg"]) == 1
    assert "missing.cg" in capsys.readouterr().err


def test_parse_error_has_line(tmp_path, capsys):
    p = tmp_path / "bad.cg"
    p.write_text("obs X Y\nedge X -> Q\norder X Y\nactions X\ntarget Y\n")
    assert main(["check", str(p)]) == 1
    assert f"{p}:2" in capsys.readouterr().err


def test_dsep(graphs, capsys):
    path = graphs("fig1c")
    assert main(["dsep", path, "X1", "Y", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["separated"] is False
    assert main(["dsep", "-g", path, "X1", "X2", "Z"]) == 0
    assert "{X1}" in capsys.readouterr().out


def test_ccomp(capsys):
    assert main(["ccomp", "fig1d", "--json"]) == 0
    comps = json.loads(capsys.readouterr().out)["components"]
    assert ["X1", "Z"] in comps and ["X2"] in comps


def test_simulate_csv_is_byte_stable(graphs, tmp_path, capsys):
    path = graphs("table1_row3")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", path, "--models", "1", "--seed", "5", "--csv", str(a)]) == 0
    assert main(["simulate", path, "--models", "1", "--seed", "5", "--csv", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0]
    assert header == "graph,method,n_models,n_samples,mean_abs_error,std,not_imitable"
    assert "not imitable" in capsys.readouterr().out


def test_simulate_json_and_methods(capsys):
    assert main(["simulate", "table1_row1", "--models", "5", "--methods", "seq,all", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["method"] for r in rows] == ["seq", "all"]
    assert rows[0]["mean_abs_error"] < 1e-9


def test_simulate_bad_method(capsys):
    assert main(["simulate", "fig2c", "--methods", "nope"]) == 1


def test_fixtures_commands(capsys):
    assert main(["fixtures", "list"]) == 0
    names = capsys.readouterr().out.split()
    assert names == fixture_names() and len(names) >= 16
    assert main(["fixtures", "run", "xor_confounded"]) == 0
    out = capsys.readouterr().out
    assert "xor_confounded: PASS" in out
    assert main(["fixtures", "run", "fig5", "--models", "20"]) == 0
    assert main(["fixtures", "show", "fig2c"]) == 0
    assert "target Y" in capsys.readouterr().out
    assert main(["fixtures", "run", "nope"]) == 1


def test_witness_dump_and_round_trip(graphs, capsys):
    path = graphs("fig4")
    assert main(["witness", path, "--action", "X1"]) == 0
    out = capsys.readouterr().out
    assert "expert E[Y] = 1" in out
    assert main(["witness", path, "--action", "X1", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["expert"] == pytest.approx(1.0)
    assert data["best_imitator"] < 1.0
    q, m = scm_from_json(data)
    assert expectation(m, q.target) == pytest.approx(1.0)
    assert best_imitator(m, strategy_contexts(q, "all"), q.target).best_value == pytest.approx(data["best_imitator"])


def test_witness_hypothesis_violated(capsys):
    assert main(["witness", "fig1c", "--action", "X1"]) == 1
    assert "hypothesis" in capsys.readouterr().err
    assert main(["witness", "fig1c"]) == 1


def test_oracle_check(capsys):
    assert main(["oracle", "check", "--graph", "fig2c", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["agree"] and out["imitable"]
    assert main(["oracle", "check", "fig1d"]) == 0
    assert "agree: yes" in capsys.readouterr().out
