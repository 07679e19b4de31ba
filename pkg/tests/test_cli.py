import json
import subprocess
import sys

import pytest

from conftest import step_function_cohort
from hemadiag.cli import main
from hemadiag.cohort import write_cohort


@pytest.fixture(scope="module")
def work(tmp_path_factory, catalog):
    """Small end-to-end CLI workspace: cohort, model, reports."""
    root = tmp_path_factory.mktemp("cli")
    cohort_path = root / "cohort.jsonl"
    write_cohort(step_function_cohort(catalog, n=90), cohort_path)
    return root, cohort_path


def run(argv):
    return main([str(a) for a in argv])


class TestSynth:
    def test_default_spec_smoke(self, tmp_path, capsys):
        out = tmp_path / "c.jsonl"
        assert run(["synth", "--spec", "default", "--seed", "42", "--n", "100", "--out", out]) == 0
        assert out.exists()
        assert "100 cases" in capsys.readouterr().out

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run(["synth", "--seed", "9", "--n", "80", "--out", a, "--spec", "default"])
        run(["synth", "--seed", "9", "--n", "80", "--out", b, "--spec", "default"])
        assert a.read_bytes() == b.read_bytes()

    def test_spec_file_round_trip(self, tmp_path, catalog):
        from hemadiag.synth import default_spec, write_spec

        spec_path = tmp_path / "spec.json"
        write_spec(default_spec(n_cases=60, seed=3), spec_path)
        out = tmp_path / "c.jsonl"
        assert run(["synth", "--spec", spec_path, "--out", out]) == 0


class TestTrainPredict:
    def test_train_twice_byte_identical(self, work, tmp_path):
        _, cohort_path = work
        a, b = tmp_path / "a.sbaf", tmp_path / "b.sbaf"
        for out in (a, b):
            code = run(
                ["train", "--cohort", cohort_path, "--subset", "basic",
                 "--trees", "10", "--seed", "3", "--out", out]
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_predict_outputs_response(self, work, tmp_path, capsys):
        _, cohort_path = work
        model_path = tmp_path / "m.sbaf"
        run(["train", "--cohort", cohort_path, "--subset", "basic",
             "--trees", "10", "--seed", "3", "--out", model_path])
        case_path = tmp_path / "case.json"
        case_path.write_text(json.dumps({"measurements": {"P001": 40.2}}))
        svg_path = tmp_path / "chart.svg"
        capsys.readouterr()  # drain the train output
        code = run(["predict", "--model", model_path, "--case", case_path, "--svg", svg_path])
        assert code == 0
        body = json.loads(capsys.readouterr().out)
        assert body["ranked"][0]["code"] == "D50"  # 40.x is the D50 band
        assert svg_path.read_text().startswith("<svg")

    def test_predict_empty_case_is_data_error(self, work, tmp_path):
        _, cohort_path = work
        model_path = tmp_path / "m.sbaf"
        run(["train", "--cohort", cohort_path, "--subset", "basic",
             "--trees", "5", "--seed", "3", "--out", model_path])
        case_path = tmp_path / "case.json"
        case_path.write_text(json.dumps({"measurements": {}}))
        assert run(["predict", "--model", model_path, "--case", case_path]) == 2


class TestEvaluateCompare:
    def test_evaluate_report_and_compare(self, tmp_path, catalog, small_cohort, capsys):
        # the noisy synthetic cohort leaves rank differences between the
        # full and basic models, which is what compare needs to test
        cohort_path = tmp_path / "cohort.jsonl"
        write_cohort(small_cohort, cohort_path)
        r1 = tmp_path / "r_basic.json"
        r2 = tmp_path / "r_full.json"
        for subset, out in (("basic", r1), ("full", r2)):
            code = run(
                ["evaluate", "--cohort", cohort_path, "--subset", subset,
                 "--folds", "3", "--cv-seed", "7", "--trees", "10", "--out", out]
            )
            assert code == 0
        stdout = capsys.readouterr().out
        assert "top-1 accuracy" in stdout

        doc = json.loads(r1.read_text())
        assert doc["accuracy"]["top5"] >= doc["accuracy"]["top1"]

        assert run(["compare", r2, r1]) == 0
        result = json.loads(capsys.readouterr().out)
        assert set(result) == {"n_effective", "W", "p_two_sided", "method"}
        assert 0.0 < result["p_two_sided"] <= 1.0

    def test_compare_disjoint_reports_is_data_error(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        a.write_text(json.dumps({"cases": [{"id": "x", "rank_of_truth": 1}]}))
        b.write_text(json.dumps({"cases": [{"id": "y", "rank_of_truth": 2}]}))
        assert run(["compare", a, b]) == 2


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self):
        proc = subprocess.run(
            [sys.executable, "-m", "hemadiag.cli", "synth", "--bogus"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 1
        assert "usage" in proc.stderr.lower()

    def test_unknown_subcommand_is_usage_error(self):
        proc = subprocess.run(
            [sys.executable, "-m", "hemadiag.cli", "frobnicate"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 1

    def test_missing_cohort_is_data_error(self, tmp_path):
        code = run(
            ["train", "--cohort", tmp_path / "none.jsonl", "--out", tmp_path / "m.sbaf"]
        )
        assert code == 2

    def test_corrupt_model_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.sbaf"
        bad.write_text("{not json")
        case = tmp_path / "case.json"
        case.write_text(json.dumps({"measurements": {"P001": 40.0}}))
        assert run(["predict", "--model", bad, "--case", case]) == 2
