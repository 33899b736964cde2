import json
import shutil
import subprocess
import sys

import jsonschema
import pytest

from conequiv import cli, presets
from conequiv.lie_core import format_algebra, load_algebra
from conequiv.reports import load_schema

SMALL_VERIFY = ["--scales", "4,14", "--pairs", "300", "--constants", "false"]


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(cli.SEED_ENV, raising=False)
    (tmp_path / "gJ.lie").write_text(format_algebra(presets.gJ()), encoding="utf-8")
    (tmp_path / "heis3.lie").write_text(format_algebra(presets.heis3()), encoding="utf-8")
    return tmp_path


def run_report(workdir, *argv):
    out = workdir / "report.json"
    code = cli.run(list(argv) + ["--report", str(out)])
    report = json.loads(out.read_text(encoding="utf-8"))
    jsonschema.validate(report, load_schema())
    assert report["exit_code"] == code
    return code, report


class TestValidate:
    def test_triangulable(self, workdir):
        code, rep = run_report(workdir, "validate", "--algebra", "gJ.lie")
        assert code == 0 and rep["status"] == "pass"
        assert rep["result"]["lower_central_series_dims"] == [3, 2, 2]

    def test_rotation_is_refuted(self, workdir):
        code, rep = run_report(workdir, "validate", "--algebra", "preset:e2")
        assert code == 1 and rep["result"]["triangulable"] is False

    def test_non_solvable_is_refuted(self, workdir):
        code, rep = run_report(workdir, "validate", "--algebra", "preset:sl2")
        assert code == 1 and rep["result"]["obstruction"] == "not solvable"
        assert rep["result"]["exponential_radical_dim"] is None

    def test_parse_error_names_position(self, workdir, capsys):
        (workdir / "bad.lie").write_text("dim 2\nA B\n0 1 9 1\n", encoding="utf-8")
        code, rep = run_report(workdir, "validate", "--algebra", "bad.lie")
        assert code == 3 and rep["result"] is None
        assert rep["error"].startswith("bad.lie:3:5:")

    def test_missing_file(self, workdir):
        code, rep = run_report(workdir, "validate", "--algebra", "nope.lie")
        assert code == 3

    def test_missing_algebra_flag(self, workdir):
        code, _ = run_report(workdir, "validate")
        assert code == 3


class TestReduceAndGradify:
    def test_reduce_writes_companion(self, workdir):
        code, rep = run_report(workdir, "reduce", "--algebra", "gJ.lie")
        assert code == 0
        g1 = load_algebra(workdir / "gJ-reduced.lie")
        assert g1.c == presets.from_brackets("TXY", {("T", "X"): {"X": 1}, ("T", "Y"): {"Y": 1}}).c
        assert rep["result"]["class_C"]["passed"]
        assert rep["result"]["provenance"]["discarded_nilpotent_nonzero"] == [True]

    def test_reduce_output_flag(self, workdir):
        code, _ = run_report(workdir, "reduce", "--algebra", "preset:g4", "--output", "out.lie")
        assert code == 0 and (workdir / "out.lie").is_file()

    def test_gradify(self, workdir):
        code, rep = run_report(workdir, "gradify", "--algebra", "heis3.lie")
        assert code == 0 and rep["result"]["weights"] == [1, 1, 2]
        assert load_algebra(workdir / "heis3-graded.lie").c == presets.heis3().c

    def test_gradify_rejects_non_nilpotent(self, workdir):
        code, _ = run_report(workdir, "gradify", "--algebra", "gJ.lie")
        assert code == 3


class TestVerify:
    def test_deterministic_bytes(self, workdir):
        a, b = workdir / "a.json", workdir / "b.json"
        for path in (a, b):
            cli.run(["verify-cone-equiv", "--algebra", "gJ.lie", "--seed", "7", *SMALL_VERIFY,
                     "--report", str(path)])
        assert a.read_bytes() == b.read_bytes()
        assert json.loads(a.read_text())["seed"] == 7

    def test_csv(self, workdir):
        out = workdir / "s.csv"
        code = cli.run(["verify-cone-equiv", "--algebra", "preset:g4", *SMALL_VERIFY,
                        "--format", "csv", "--seed", "3", "--report", str(out)])
        lines = out.read_text().splitlines()
        assert lines[0] == "# seed=3"
        assert lines[1] == "scale_bin,|p|,|q|,d1,d2,residual"
        assert len(lines) == 2 + 300
        assert code in (0, 1)

    def test_csv_rejected_elsewhere(self, workdir):
        code, _ = run_report(workdir, "validate", "--algebra", "gJ.lie", "--format", "csv")
        assert code == 3

    def test_env_seed(self, workdir, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV, "41")
        _, rep = run_report(workdir, "validate", "--algebra", "gJ.lie")
        assert rep["seed"] == 41
        _, rep = run_report(workdir, "validate", "--algebra", "gJ.lie", "--seed", "2")
        assert rep["seed"] == 2

    def test_bad_env_seed(self, workdir, monkeypatch):
        monkeypatch.setenv(cli.SEED_ENV, "seven")
        code, _ = run_report(workdir, "validate", "--algebra", "gJ.lie")
        assert code == 3

    def test_insufficient_bins_is_inconclusive(self, workdir):
        code, rep = run_report(workdir, "verify-cone-equiv", "--algebra", "gJ.lie",
                               "--scales", "4,8", "--pairs", "200", "--constants", "true")
        assert code == 2 and rep["status"] == "inconclusive"


class TestConfig:
    def test_values_and_precedence(self, workdir):
        (workdir / "run.cfg").write_text("# run\nalgebra = preset:g4\nseed = 5\nk-max = 14\n"
                                         "pairs = 300\nconstants = false\n", encoding="utf-8")
        _, rep = run_report(workdir, "verify-cone-equiv", "--config", "run.cfg", "--seed", "9")
        assert rep["seed"] == 9
        assert rep["config"]["k_max"] == 14 and rep["config"]["algebra"] == "preset:g4"
        assert "config" not in rep["config"]

    def test_unknown_key(self, workdir):
        (workdir / "run.cfg").write_text("algebra = gJ.lie\n  colour = red\n", encoding="utf-8")
        code, rep = run_report(workdir, "validate", "--config", "run.cfg")
        assert code == 3 and rep["error"].startswith("run.cfg:2:3: unknown key")

    def test_bad_value(self, workdir):
        (workdir / "run.cfg").write_text("seed = x\n", encoding="utf-8")
        code, rep = run_report(workdir, "validate", "--config", "run.cfg")
        assert code == 3 and rep["error"].startswith("run.cfg:1:8:")


class TestAnalyzeAndUltralimit:
    def test_analyze_map(self, workdir):
        code, rep = run_report(workdir, "analyze-map", "--map", "dilation")
        assert code == 0 and 1.9 <= rep["result"]["constants"]["C_best"] <= 2.1

    def test_unknown_map(self, workdir):
        code, _ = run_report(workdir, "analyze-map", "--map", "tan")
        assert code == 3

    def test_documented_invocation(self, workdir):
        code, rep = run_report(workdir, "ultralimit", "--scenario", "sec24", "--filter", "case3_l5")
        assert code == 0
        assert rep["result"]["case"] == 3
        assert rep["result"]["best_lipschitz"]["exact"] == "5"

    def test_undecided_filter(self, workdir):
        code, rep = run_report(workdir, "ultralimit", "--filter", "towers")
        assert code == 2 and rep["result"]["decided"] is False

    def test_short_horizon(self, workdir):
        code, _ = run_report(workdir, "ultralimit", "--filter", "case1", "--horizon", "3")
        assert code == 2

    def test_unknown_filter(self, workdir):
        code, _ = run_report(workdir, "ultralimit", "--filter", "nope")
        assert code == 3


def test_usage_error_exits_3(workdir):
    with pytest.raises(SystemExit) as exc:
        cli.main(["validate", "--bogus"])
    assert exc.value.code == 3


def test_console_script(workdir):
    exe = shutil.which("conequiv")
    cmd = [exe] if exe else [sys.executable, "-m", "conequiv"]
    proc = subprocess.run(cmd + ["validate", "--algebra", "preset:heis3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["nilpotent"] is True
