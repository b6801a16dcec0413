import json
import subprocess
import sys

import pytest

from fdi.cli import main

FAST = ["--set", "forest.n_trees=15", "--set", "forest.n_repeats=3"]


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["simulate", "--out", str(d / "healthy.csv"), "--computed"]) == 0
    assert main(["simulate", "--out", str(d / "r0.csv"), "--set", "fault.r0_factor=0.5"]) == 0
    assert main(["simulate", "--out", str(d / "cap.csv"), "--set", "fault.c_factor=2"]) == 0
    assert main(["simulate", "--out", str(d / "train.csv"), "--dataset", "train"]) == 0
    assert main(["simulate", "--out", str(d / "val.csv"), "--dataset", "validation"]) == 0
    assert main(["train", str(d / "train.csv"), "--model", str(d / "model.txt"), *FAST]) == 0
    return d


def test_simulate_outputs(files):
    assert (files / "healthy.computed.csv").exists()
    head = (files / "healthy.csv").read_text().splitlines()
    assert "t,v0,v1,v2,s1,label" in head
    assert len((files / "train.csv").read_text().splitlines()) == 1 + 9 * 401


@pytest.mark.parametrize("name, verdict", [
    ("healthy", "no fault detected"),
    ("r0", "isolated: Drift in R0; R0 ~= "),
    ("cap", "isolated: Drift in C; tau ~= "),
])
def test_residuals_verdicts(capsys, files, name, verdict):
    code, out, _ = run(capsys, "residuals", files / f"{name}.csv", "--out", files / f"{name}.res.csv")
    assert code == 0
    assert verdict in out
    assert (files / f"{name}.res.csv").read_text().startswith("t,r1,r2,")


def test_residuals_rejects_multi_trace(capsys, files):
    code, _, err = run(capsys, "residuals", files / "val.csv")
    assert code == 1 and "residuals takes one" in err


def test_classify(capsys, files):
    code, out, _ = run(capsys, "classify", files / "val.csv", "--model", files / "model.txt",
                       "--out", files / "pred.csv")
    assert code == 0
    assert "sample accuracy:" in out and "trace accuracy: 1.000000" in out
    assert (files / "pred.csv").read_text().startswith("trace,T,label,predicted,p_Healthy")


def test_importance(capsys, files):
    code, out, _ = run(capsys, "importance", files / "train.csv", "--threshold", "0.05", *FAST)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "\tV0\tV1\tV2\tT\tS1"
    assert lines[1].startswith("R0Down\t") and lines[2].startswith("CapUp\t")


def test_fsm_commands(capsys, files, tmp_path):
    code, out, _ = run(capsys, "fsm", "mb")
    assert code == 0 and out == "\tARR_1\tARR_2\nDrift in R0\t1\t1\nDrift in C\t0\t1\n"
    table = tmp_path / "t.tsv"
    table.write_text(out)
    code, out, _ = run(capsys, "fsm", "analyze", table)
    assert "Drift in R0\tdetectable, isolable" in out
    code, _, err = run(capsys, "fsm", "analyze")
    assert code == 1


def test_dsep(capsys):
    code, out, _ = run(capsys, "dsep", "builtin:rrc_indicators", "--x", "S1", "--y", "R0", "C")
    assert code == 0 and out.strip() == "S1 _||_ R0,C: d-separated"
    code, out, _ = run(capsys, "dsep", "builtin:rrc_indicators", "--x", "S1", "--y", "R0", "--given", "V1")
    assert "d-connected" in out
    code, out, _ = run(capsys, "dsep", "builtin:two_variable", "--factorize")
    assert out.strip() == "factorization: Pr(S)Pr(Y|S)"
    code, out, _ = run(capsys, "dsep", "builtin:two_variable", "--factorize", "--json")
    assert json.loads(out) == {"factorization": [["S", []], ["Y", ["S"]]]}
    code, out, _ = run(capsys, "dsep", "builtin:rrc_indicators", "--implied", "0")
    assert "implied: R0 _||_ C" in out


def test_assess(capsys):
    code, out, _ = run(capsys, "assess", "--pipeline", "mb")
    assert code == 0 and out.startswith("level: Understanding")
    code, out, _ = run(capsys, "assess", "--pipeline", "eb", "--json")
    assert json.loads(out)["level"] == "Monitoring"
    code, out, _ = run(capsys, "assess", "--decisions", "Detect")
    assert out.startswith("level: Monitoring")


@pytest.mark.parametrize("argv, code", [
    (["simulate"], 1),
    (["bogus"], 1),
    (["simulate", "--out", "x.csv", "--set", "nope.key=1"], 1),
    (["assess", "--decisions", "Guess"], 1),
    (["dsep", "builtin:two_variable"], 1),
    (["residuals", "/nonexistent/trace.csv"], 2),
    (["simulate", "--out", "/nonexistent/dir/x.csv"], 2),
])
def test_exit_codes(capsys, argv, code):
    try:
        got = main(argv)
    except SystemExit as exc:  # argparse usage errors
        got = exc.code
    capsys.readouterr()
    assert got == code


def test_domain_error_exit_three(capsys, tmp_path):
    bad = tmp_path / "flat.csv"
    bad.write_text("t,v0,v1,v2,s1,label\n0,5,5,5,1,Healthy\n0.1,5,5,5,1,Healthy\n")
    code, _, err = run(capsys, "train", bad, "--model", tmp_path / "m.txt")
    assert code == 3 and "NoTransition" in err


def test_parse_error_exit_one(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    code, _, err = run(capsys, "residuals", bad)
    assert code == 1 and "ParseError" in err


def test_reruns_are_byte_identical(capsys, files, tmp_path):
    outputs = []
    for _ in range(2):
        run(capsys, "simulate", "--out", tmp_path / "a.csv", "--set", "fault.c_factor=2")
        _, res_out, _ = run(capsys, "residuals", tmp_path / "a.csv")
        run(capsys, "train", files / "train.csv", "--model", tmp_path / "m.txt", *FAST)
        _, imp_out, _ = run(capsys, "importance", files / "train.csv", *FAST)
        outputs.append(((tmp_path / "a.csv").read_bytes(), res_out,
                        (tmp_path / "m.txt").read_bytes(), imp_out))
    assert outputs[0] == outputs[1]


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fdi.cli", "assess", "--pipeline", "mb"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "Understanding" in proc.stdout
