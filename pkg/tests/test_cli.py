"""The ``atlc`` command line: outputs, exit codes, JSON and goldens."""
import json
import subprocess
import sys

import pytest

from atlc.cli.main import main
from atlc.cli.golden import golden_diff
from atlc.cli.corpus import corpus_dir

from helpers import corpus

CORPUS = corpus_dir()


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_eval_scaled_identity_trace(capsys):
    code, out, _ = run(capsys, "eval", "--size", "n=2", "--inputs", "x=3",
                       CORPUS / "trace_eye.atl")
    assert code == 0 and out.strip() == "6"


def test_eval_json_output(capsys):
    code, out, _ = run(capsys, "eval", "--format=json", "--size", "n=3", "--size", "m=2",
                       "--inputs", "x=[1,2,3,4]", "--inputs", "c=[10,20]", CORPUS / "conv.atl")
    doc = json.loads(out)
    assert code == 0 and doc["schema"] == 1
    assert doc["value"] == [40, 70, 100]


def test_eval_reads_rationals(capsys):
    code, out, _ = run(capsys, "eval", "--size", "n=2", "--inputs", "x=1/2",
                       CORPUS / "trace_eye.atl")
    assert code == 0 and out.strip() == "1"


def test_adjoint_of_convolution_is_a_correlation(capsys):
    code, out, _ = run(capsys, "deriv", "--mode=adj", "--wrt=x", CORPUS / "conv.atl")
    program, report = out.strip().split("\n\n")
    assert code == 0
    assert "input dy : [n]real" in program
    assert "gen g0:m+n-1. sum s0:m. sum s1:n. [g0=m-s0+s1-1]" in program
    assert json.loads(report)["bound_holds"]


def test_deriv_output_parses_back(capsys, tmp_path):
    for mode in ("fwd", "adj"):
        _, out, _ = run(capsys, "deriv", f"--mode={mode}", CORPUS / "deconv_loss.atl")
        path = tmp_path / f"{mode}.atl"
        path.write_text(out.split("\n\n")[0])
        assert run(capsys, "check", path)[0] == 0


def test_deriv_with_a_seed_file(capsys, tmp_path):
    seed = tmp_path / "seed.json"
    seed.write_text("[1, 1]")
    code, out, _ = run(capsys, "deriv", "--mode=adj", "--format=json", "--seed", seed,
                       "--inputs", "x=1", "--inputs", "y=1", CORPUS / "linear_dag.atl")
    assert code == 0 and json.loads(out)["value"] == [54, 33]


def test_malformed_program_is_a_positioned_check_failure(capsys, tmp_path):
    bad = tmp_path / "malformed.atl"
    bad.write_text("size n\ninput x : [n]real\ngen i:n. x[i] +* 2\n")
    code, out, err = run(capsys, "check", bad)
    assert code == 1
    assert f"{bad}:3:16:" in err
    assert "Traceback" not in err


def test_type_errors_are_check_failures(capsys, tmp_path):
    bad = tmp_path / "typo.atl"
    bad.write_text("size n\ninput x : [n]real\nx + 1\n")
    code, _, err = run(capsys, "check", bad)
    assert code == 1 and ":3:1:" in err


@pytest.mark.parametrize("argv", [
    ["eval", "--size", "n=2", str(CORPUS / "trace_eye.atl")],         # missing input
    ["eval", "--size", "n=x", str(CORPUS / "trace_eye.atl")],         # bad size
    ["frobnicate"],
    ["deriv", "--mode=sideways", str(CORPUS / "conv.atl")],
    ["verify", "--checks=psychic", str(CORPUS / "conv.atl")],
    ["check", "/no/such/file.atl"],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "Traceback" not in err


def test_unbound_size_without_fixture_line(capsys, tmp_path):
    f = tmp_path / "t.atl"
    f.write_text("size n\ninput x : [n]real\nsum i:n. x[i]\n")
    code, _, err = run(capsys, "eval", "--inputs", "x=[1,2]", str(f))
    assert code == 2 and "size 'n' is not bound" in err


def test_sizes_fall_back_to_fixture_line(capsys):
    code, out, _ = run(capsys, "eval", "--inputs", "x=[1,2,3,4]", "--inputs", "c=[10,20]",
                       str(CORPUS / "conv.atl"))
    assert code == 0 and out.strip() == "[40, 70, 100]"
    code, out, _ = run(capsys, "cost", str(CORPUS / "conv.atl"))
    assert code == 0 and out.strip() == "9"


def test_cost_with_breakdown(capsys):
    code, out, _ = run(capsys, "cost", "--format=json", "--size", "n=4,m=2",
                       CORPUS / "conv.atl")
    doc = json.loads(out)
    assert code == 0
    assert doc["cost"] == 12 and doc["breakdown"] == {"add": 4, "mul": 8, "call": 0}
    assert doc["io_cost"] == 12 + 5 + 2 + 4


def test_normalize_and_validate(capsys, tmp_path):
    nested = tmp_path / "nested.atl"
    nested.write_text("size n\ninput x : [n]real\ngen i:n. let y = x[i]*x[i] in y + 1\n")
    assert run(capsys, "normalize", "--pass=none", "--validate=let-lifted", nested)[0] == 1
    assert run(capsys, "normalize", "--pass=let-lift", "--validate=let-lifted", nested)[0] == 0
    code, out, _ = run(capsys, "normalize", "--validate=ssa", CORPUS / "pairs.atl")
    assert code == 0 and "fst p" in out


def test_verify_reports_every_check(capsys):
    code, out, _ = run(capsys, "verify", "--format=json", "--program",
                       CORPUS / "deconv_loss.atl", "--seed", "3")
    doc = json.loads(out)
    assert code == 0 and doc["passed"]
    assert set(doc["checks"]) == {"universal", "finite-diff", "jacobian", "cost"}


def test_seed_from_environment_is_deterministic(capsys, monkeypatch):
    monkeypatch.setenv("ATLC_SEED", "17")
    argv = ["verify", "--format=json", "--checks=universal,jacobian", str(CORPUS / "matmul.atl")]
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second and json.loads(first)["seed"] == 17


@pytest.mark.parametrize("fx", corpus(), ids=lambda fx: fx.name)
def test_golden_files_match(fx):
    assert golden_diff(fx) == []


def test_console_entry_point_runs():
    out = subprocess.run([sys.executable, "-m", "atlc.cli.main", "check",
                          str(CORPUS / "trace.atl")], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "ok: real"
