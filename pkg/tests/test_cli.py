import json

import pytest

from app.cli import build_parser, main, summary_table
from app.config import settings
from app.models import VerificationCheck, VerificationReport


@pytest.fixture(autouse=True)
def keep_precision(monkeypatch):
    monkeypatch.setattr(settings, "PRECISION", settings.PRECISION)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_eval(capsys):
    code, out = run(capsys, "eval", "--tau", "0.5+2i")
    assert code == 0
    report = json.loads(out)
    assert report["flags"] == []
    assert report["eval"]["tau"] == [0.5, 2.0]


def test_eval_flags(capsys):
    _, out = run(capsys, "eval", "--tau", "0.5+0.8660254i")
    assert "g2_vanishes" in json.loads(out)["flags"]
    _, out = run(capsys, "eval", "--tau", "1e-3+1e-3i")
    report = json.loads(out)
    assert "reduced" in report["flags"]
    assert len(report["reduction"]) == 4


def test_critical_points(capsys):
    code, out = run(capsys, "critical", "--group", "sl2z", "--matrix", "1,0,0,1")
    assert code == 0
    assert json.loads(out)["points"] == []
    _, out = run(capsys, "critical", "--group", "gamma02", "--matrix", "1,0,2,1")
    report = json.loads(out)
    assert len(report["points"]) == 2
    assert report["cusp"] == "-1/2"


def test_count(capsys):
    code, out = run(capsys, "count", "--family", "fc", "--C", "3")
    assert code == 0
    assert json.loads(out)["count"] == 2
    _, out = run(capsys, "count", "--family", "t", "--t", "1")
    assert json.loads(out)["count"] == 1


def test_solve_at_a_boundary_parameter(capsys):
    code, out = run(capsys, "solve", "--C", "0")
    assert code == 0
    response = json.loads(out)
    assert response["lower"] is None
    assert response["upper"]["half"] == "right"


def test_trace_csv(capsys, tmp_path):
    target = tmp_path / "c2.csv"
    code, out = run(capsys, "trace", "--curve", "c2", "--Clo", "1.5", "--Chi", "2", "--format", "csv", "--out", str(target))
    assert code == 0
    assert out == ""
    text = target.read_bytes().decode("utf-8")
    assert text.startswith("curve,C,re_tau,im_tau,half,residual\r\n")
    assert text.count("\r\n") > 3


def test_numerical_failure_exits_1(capsys):
    code = main(["count", "--family", "fc", "--C", "0"])
    assert code == 1
    assert "InvalidUseError" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--tau", "0.5-1i"],
        ["eval", "--tau", "abc"],
        ["critical", "--group", "sl2z", "--matrix", "1,1,1,1"],
        ["eval", "--tau", "0.5+2i", "--format", "csv"],
        ["count", "--family", "fc"],
        ["eval", "--tau", "0.5+2i", "--precision", "-1"],
        ["bogus"],
        ["verify", "--only", "no_such_check"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 2


def test_precision_flag_sets_the_solver_tolerance(capsys):
    run(capsys, "eval", "--tau", "0.5+2i", "--precision", "1e-9")
    assert settings.PRECISION == 1e-9


def test_verify_summary(capsys):
    code, out = run(capsys, "verify", "--only", "asymptotics")
    assert code == 0
    assert "asymptotics" in out
    assert "1/1 checks passed" in out


def test_summary_table_marks_failures():
    report = VerificationReport(
        checks=[
            VerificationCheck(name="b", passed=False, detail="broken", seconds=0.5),
            VerificationCheck(name="a", passed=True, seconds=0.1),
        ]
    )
    lines = summary_table(report).splitlines()
    assert lines[1].startswith("a ")
    assert "FAILED" in lines[2] and "broken" in lines[2]
    assert lines[-1] == "1/2 checks passed"


def test_parser_lists_every_command():
    parser = build_parser()
    commands = parser._subparsers._group_actions[0].choices
    assert set(commands) == {"eval", "critical", "count", "solve", "trace", "dense", "monodromy", "verify", "serve"}
