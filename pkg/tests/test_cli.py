import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from blockreg import cli
from blockreg.cli import (EXIT_PARSE, EXIT_UNSUPPORTED, ParseError, field_to_doc, fixture_path, main,
                          parse_field, parse_ladder)

F = Fraction


def run(argv, tmp_path):
    out = io.StringIO()
    old = sys.stdout
    sys.stdout = out
    try:
        code = main(argv)
    finally:
        sys.stdout = old
    return code, out.getvalue()


def write(tmp_path, doc, name="f.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_round_trip_exact():
    doc = cli.load(fixture_path("perturbed_toy"))
    X = parse_field(doc)
    assert parse_field(field_to_doc(X)) == X
    assert X.P.terms[(3, 0)] == F(1, 2)


def test_param_override_and_expression():
    doc = {"version": 1, "P": [[2, 0, "-2*k"], [0, 2, "-1"]], "Q": [[1, 1, "k"], [1, 1, "1"]],
           "params": {"k": "1/3"}}
    X = parse_field(doc, {"k": "1/4"})
    assert X.P.terms[(2, 0)] == F(-1, 2) and X.Q.terms[(1, 1)] == F(5, 4)


@pytest.mark.parametrize("doc", [
    {"version": 1, "P": [[0, 2, "1"]], "Q": [[2, 0, "1"]], "comment": "x"},
    {"version": 2, "P": [[0, 2, "1"]], "Q": [[2, 0, "1"]]},
    {"version": 1, "P": [[0, 2, "1.5e"]], "Q": [[2, 0, "1"]]},
    {"version": 1, "P": [[0, -2, "1"]], "Q": [[2, 0, "1"]]},
    {"version": 1, "P": [[0, 2, "mu"]], "Q": [[2, 0, "1"]]},
    {"version": 1, "P": [], "Q": []},
])
def test_parse_errors(doc, tmp_path):
    with pytest.raises(ParseError):
        parse_field(doc)
    code, _ = run(["analyze", write(tmp_path, doc)], tmp_path)
    assert code == EXIT_PARSE


def test_missing_file_is_parse_error(tmp_path):
    code, _ = run(["analyze", str(tmp_path / "none.json")], tmp_path)
    assert code == EXIT_PARSE


def test_analyze_toy(tmp_path):
    code, out = run(["analyze", str(fixture_path("toy"))], tmp_path)
    rep = json.loads(out)
    assert code == 0
    assert rep["c0"]["r_star"] == "-1/3" and rep["c0"]["regularisable"]
    assert rep["c1"]["passes"]
    assert rep["class"] == "CInfUpToOrder(5)"


def test_analyze_perturbed_text(tmp_path):
    code, out = run(["analyze", str(fixture_path("perturbed_toy")), "--format", "text"], tmp_path)
    assert code == 0
    assert "class: CAlpha(4/3)" in out and "leading correction" in out
    assert "C1 by residue test" in out


def test_analyze_odd_cubic(tmp_path):
    code, out = run(["analyze", str(fixture_path("odd_cubic"))], tmp_path)
    rep = json.loads(out)
    assert code == 0 and rep["c0"]["reason"] == "parity" and rep["stopped_at"] == "c0"


def test_unsupported_multiplicity(tmp_path):
    doc = {"version": 1, "P": [[2, 0, "1/2"], [0, 2, "1"]], "Q": [[1, 1, "1/2"]]}
    code, _ = run(["analyze", write(tmp_path, doc)], tmp_path)
    assert code == EXIT_UNSUPPORTED


def test_canon(tmp_path):
    code, out = run(["canon", str(fixture_path("canonical_quadratic")), "--param", "kappa2=0"], tmp_path)
    rep = json.loads(out)
    assert code == 0 and rep["class"] == "CInf"
    assert abs(rep["kappa1"] + 1 / 3) < 1e-12
    code, _ = run(["canon", str(fixture_path("perturbed_toy"))], tmp_path)
    assert code == EXIT_UNSUPPORTED


def test_verify_regular_point(tmp_path):
    csv = tmp_path / "s.csv"
    code, out = run(["verify", str(fixture_path("regular_point")), "--csv", str(csv)], tmp_path)
    rep = json.loads(out)
    assert code == 0
    assert rep["verification"]["note"] == "no correction detectable"
    assert rep["verification"]["fit_upper"]["status"] == "IllConditioned"
    assert csv.read_text().startswith("y_in,y_out,error_estimate\n")


def test_verify_perturbed_deterministic(tmp_path):
    args = ["verify", str(fixture_path("perturbed_toy")), "--csv", str(tmp_path / "a.csv")]
    code1, out1 = run(args, tmp_path)
    code2, out2 = run(args + ["--workers", "3"], tmp_path)
    assert code1 == code2 == 0 and out1 == out2
    rep = json.loads(out1)
    assert rep["verification"]["verdict"] == "CONSISTENT"
    assert abs(rep["verification"]["fit_upper"]["alpha"] - 4 / 3) < 0.05


def test_verify_ladder_option(tmp_path):
    assert len(parse_ladder("1e-3:1e-6:0.5")) == 10
    with pytest.raises(ParseError):
        parse_ladder("1e-3:1e-6")
    code, out = run(["verify", str(fixture_path("canonical_quadratic")), "--ladder", "1e-3:1e-6:0.5",
                     "--csv", str(tmp_path / "q.csv")], tmp_path)
    assert code == 0 and json.loads(out)["verification"]["verdict"] == "CONSISTENT"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "blockreg", "analyze", str(fixture_path("toy")),
                           "--format", "text"], capture_output=True, text=True)
    assert proc.returncode == 0 and "CInfUpToOrder(5)" in proc.stdout
