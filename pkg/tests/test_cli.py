import csv
import json

import numpy as np
import pytest

from capracalc.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    EXIT_SOLVER,
    EXIT_VERIFY_FAIL,
    ConfigError,
    main,
    parse_norm,
    parse_set_function,
)
from capracalc.norms import LpNorm, TableNorm
from capracalc.subsets import INF


def test_parse_norm_shorthands():
    assert parse_norm("l2").p == 2.0
    assert parse_norm("l1.5").p == 1.5
    assert parse_norm("linf").p == INF
    n = parse_norm('{"type": "weighted-lp", "p": 2, "weights": [1.0, 3.0]}')
    assert isinstance(n, LpNorm) and list(n.weights) == [1.0, 3.0]
    t = parse_norm('{"type": "custom-table", "points": [[1, 0], [1, 1]]}')
    assert isinstance(t, TableNorm)
    with pytest.raises(ConfigError):
        parse_norm('{"type": "bogus"}')
    with pytest.raises(ConfigError):
        parse_norm("no-such-file.json")


def test_parse_set_function():
    F = parse_set_function("cardinality", 3)
    assert F.value(0b111) == 3
    G = parse_set_function('{"d": 2, "values": [0, 1, 1, "inf"]}', None)
    assert G.value(0b11) == INF
    with pytest.raises(ConfigError):
        parse_set_function("cardinality", None)
    with pytest.raises(ConfigError):
        parse_set_function('{"d": 2}', None)


def _write_points(tmp_path, points, name="points.json"):
    path = tmp_path / name
    path.write_text(json.dumps(points))
    return str(path)


def test_eval_biconjugate_to_files(tmp_path):
    pts = _write_points(tmp_path, [[0.0, 2.0]])
    out = str(tmp_path / "result")
    code = main(["eval", "biconjugate", "--norm", "l2",
                 "--set-function", "cardinality", "--points", pts, "--out", out])
    assert code == EXIT_OK
    records = json.loads((tmp_path / "result.json").read_text())
    assert abs(records[0]["value"] - 1.0) <= 1e-4
    assert records[0]["fsm"] == 1.0
    with open(tmp_path / "result.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert abs(float(rows[0]["value"]) - 1.0) <= 1e-4


def test_eval_bounds_and_aggregate(tmp_path, capsys):
    pts = _write_points(tmp_path, [[1.0, 1.0]])
    assert main(["eval", "bounds", "--norm", "l2",
                 "--set-function", "cardinality", "--points", pts]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)[0]
    assert abs(rec["lower"] - np.sqrt(2.0)) <= 1e-6
    assert abs(rec["upper"] - 2.0) <= 1e-6
    assert main(["eval", "aggregate-norm", "--norm", "l2",
                 "--set-function", "cardinality", "--points", pts]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)[0]
    assert abs(rec["support_dual"] - 2.0) <= 1e-4


def test_eval_subdiff_membership(tmp_path, capsys):
    pts = _write_points(tmp_path, [{"x": [0.0, 2.0], "y": [0.0, 1.0]},
                                   {"x": [0.0, 0.0], "y": [0.3, 0.3]}])
    assert main(["eval", "subdiff-membership", "--norm", "l2",
                 "--set-function", "cardinality", "--points", pts]) == EXIT_OK
    recs = json.loads(capsys.readouterr().out)
    assert recs[0]["member"] is True
    assert recs[1]["member"] is True  # at-zero route


def test_eval_config_errors(tmp_path):
    pts = _write_points(tmp_path, [[1.0, 0.0]])
    # dimension mismatch between points and set function
    assert main(["eval", "conjugate", "--norm", "l2",
                 "--set-function", '{"d": 3, "name": "cardinality"}',
                 "--points", pts]) == EXIT_CONFIG
    # missing y for the membership query
    assert main(["eval", "subdiff-membership", "--norm", "l2",
                 "--set-function", "cardinality", "--points", pts]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("[]")
    assert main(["eval", "conjugate", "--norm", "l2",
                 "--set-function", "cardinality", "--points", str(bad)]) == EXIT_CONFIG


def test_eval_solver_error_exit_code(tmp_path):
    pts = _write_points(tmp_path, [[1.0, 1.0]])
    # bounds require a positive weight off the empty set: ValueError -> 3
    assert main(["eval", "bounds", "--norm", "l2",
                 "--set-function", '{"d": 2, "values": [0, 0, 1, 1]}',
                 "--points", pts]) == EXIT_SOLVER


def test_verify_exit_codes(tmp_path):
    out = str(tmp_path / "report.json")
    assert main(["verify", "theorem1", "--norm", "l2", "--d", "2",
                 "--trials", "3", "--seed", "0", "--out", out]) == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["passed"] and rep["suite"] == "theorem1"
    # the sup norm violates the hypotheses: the suite fails with witnesses
    assert main(["verify", "theorem1", "--norm", "linf", "--d", "2",
                 "--trials", "3", "--seed", "0", "--out", out]) == EXIT_VERIFY_FAIL
    rep = json.loads((tmp_path / "report.json").read_text())
    assert not rep["passed"] and rep["witnesses"]


def test_verify_deterministic_given_seed(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    for out in (a, b):
        assert main(["verify", "theorem2", "--norm", "l1.5", "--d", "3",
                     "--trials", "5", "--seed", "7", "--out", out]) == EXIT_OK
    ra, rb = json.loads(open(a).read()), json.loads(open(b).read())
    ra.pop("timestamp"), rb.pop("timestamp")
    assert ra == rb


def test_report_aggregates_outputs(tmp_path, capsys):
    rep = str(tmp_path / "rep.json")
    main(["verify", "appendixB", "--norm", "l2", "--d", "2",
          "--trials", "5", "--seed", "1", "--out", rep])
    pts = _write_points(tmp_path, [[0.0, 2.0]])
    ev = str(tmp_path / "ev")
    main(["eval", "biconjugate", "--norm", "l2",
          "--set-function", "cardinality", "--points", pts, "--out", ev])
    assert main(["report", rep, ev + ".json"]) == EXIT_OK
    text = capsys.readouterr().out
    assert "appendixB" in text and "PASS" in text
    assert "capra_biconjugate_fsm" in text


def test_report_ray_table(tmp_path):
    out = str(tmp_path / "summary.txt")
    code = main(["report", "--norm", "l2", "--set-function", "cardinality",
                 "--ray", '{"x0": [0.0, 1.0], "scales": [0.25, 1.0, 4]}',
                 "--out", out])
    assert code == EXIT_OK
    with open(out + ".ray.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    # along the ray through a unit vector, the value grows to F(supp)=1
    assert abs(float(rows[0]["L0F"]) - 0.25) <= 1e-4
    assert abs(float(rows[-1]["L0F"]) - 1.0) <= 1e-4


def test_report_without_inputs_is_config_error():
    assert main(["report"]) == EXIT_CONFIG
