"""
Тесты подкоманд pgk
"""

import json
from pathlib import Path

import pytest

from cli.commands import main
from cli.experiment import run_experiment
from gridworld.dataset import LABELED_FILE, MANIFEST_FILE
from gridworld.environment import DOMAIN_PATH, PROBLEM_PATH
from models.records import GroundActionRecord, LoopStep, ManifestRecord, RunConfig
from utils.errors import StageError
from utils.io import read_csv, read_jsonl, read_meta

FIXTURES = Path(__file__).parent / "fixtures"

GRID = ["--domain", str(DOMAIN_PATH), "--problem", str(PROBLEM_PATH)]


class TestPddlValidate:
    def test_domain_and_problem(self, capsys):
        code = main(["pddl", "validate", str(DOMAIN_PATH), str(PROBLEM_PATH)])

        out = capsys.readouterr().out
        assert code == 0
        assert "6 predicates, 8 actions" in out
        assert "problem trophy: 8 objects, N=63" in out

    def test_print_normalized(self, capsys):
        assert main(["pddl", "validate", str(FIXTURES / "toggle_domain.pddl"), "--print"]) == 0

        assert "(define (domain toggle-toy)" in capsys.readouterr().out

    def test_syntax_error_exit_code(self, tmp_path, capsys):
        broken = tmp_path / "broken.pddl"
        broken.write_text("(define (domain d)\n  (:predicates (p)", encoding="utf-8")

        assert main(["pddl", "validate", str(broken)]) == 1
        assert "PddlSyntaxError" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["pddl", "validate", str(tmp_path / "none.pddl")]) == 2
        assert "does not exist" in capsys.readouterr().err

    def test_directory_instead_of_file(self, tmp_path, capsys):
        assert main(["pddl", "validate", str(tmp_path)]) == 1

        err = capsys.readouterr().err
        assert err.startswith("pgk: IsADirectoryError")
        assert "Traceback" not in err

    def test_undecodable_file(self, tmp_path, capsys):
        binary = tmp_path / "domain.pddl"
        binary.write_bytes(b"(define \xff\xfe\xfa)")

        assert main(["pddl", "validate", str(binary)]) == 1
        assert capsys.readouterr().err.startswith("pgk: UnicodeDecodeError")

    def test_bad_arguments(self):
        with pytest.raises(SystemExit) as e:
            main(["pddl", "validate"])
        assert e.value.code == 2


class TestGround:
    def test_gridworld(self, tmp_path, gridworld_legend):
        out = tmp_path / "ground.jsonl"

        assert main(["ground", str(DOMAIN_PATH), str(PROBLEM_PATH), "--out", str(out)]) == 0

        records = read_jsonl(out, GroundActionRecord)
        assert len(records) == 54
        meta = read_meta(out)
        assert meta["legend"] == gridworld_legend
        assert meta["seed"] == 7

    def test_toy_domain(self, tmp_path):
        out = tmp_path / "ground.jsonl"
        args = [str(FIXTURES / "pick_domain.pddl"), str(FIXTURES / "pick_problem.pddl")]

        assert main(["ground", *args, "--out", str(out), "--seed", "3"]) == 0

        (record,) = read_jsonl(out, GroundActionRecord)
        assert (record.action, record.args) == ("pick", ["cup"])
        assert record.post_pos == ["in(cup,hand)"]
        assert read_meta(out)["seed"] == 3


class TestPipeline:
    def test_gen_label_eval(self, tmp_path, capsys):
        data = tmp_path / "test"

        assert main(["gridworld", "gen", "--count", "5", "--split", "test", "--seed", "4", "--out", str(data)]) == 0
        assert len(read_jsonl(data / MANIFEST_FILE, ManifestRecord)) == 5

        capsys.readouterr()
        assert main(["label", "--manifest", str(data / MANIFEST_FILE), "--out", str(data / LABELED_FILE)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert (summary["records"], summary["skipped"]) == (5, 0)

        metrics = tmp_path / "metrics.csv"
        assert main(["eval", "--oracle", "--data", str(data), "--out", str(metrics)]) == 0
        _, rows = read_csv(metrics)
        overall = next(r for r in rows if r["predicate"] == "OVERALL")
        assert overall["f1"] == "1.0000"

    def test_label_missing_manifest(self, tmp_path):
        assert main(["label", "--manifest", str(tmp_path / "none.jsonl")]) == 2

    def test_train_then_eval(self, tiny_split, tmp_path):
        model = tmp_path / "model"
        args = ["train", "--data", str(tiny_split / "train"), "--test", str(tiny_split / "test")]
        args += ["--epochs", "1", "--hidden", "4", "--batch-size", "12", "--out", str(model)]

        assert main(args) == 0
        assert (model / "model.json").exists()
        _, curve = read_csv(model / "learning_curve.csv")
        assert len(curve) == 1 and curve[0]["test_f1"] != ""

        assert main(["eval", "--model", str(model), "--data", str(tiny_split / "test"), "--out", str(tmp_path / "m.csv")]) == 0

    def test_train_missing_test_dir(self, tiny_split, tmp_path):
        args = ["train", "--data", str(tiny_split / "train"), "--test", str(tmp_path / "none"), "--epochs", "1"]

        assert main(args) == 1

    def test_eval_needs_perception(self, tiny_split):
        with pytest.raises(SystemExit):
            main(["eval", "--data", str(tiny_split / "test")])


class TestPlanAndLoop:
    def test_plan_prints_actions(self, capsys):
        assert main(["plan", *GRID]) == 0

        lines = capsys.readouterr().out.split()
        assert len(lines) == 12
        assert lines[-1] == "pick(trophy,chest)"

    def test_plan_budget_exceeded(self, capsys):
        assert main(["plan", *GRID, "--budget", "3"]) == 1
        assert "SearchBudgetExceeded" in capsys.readouterr().err

    def test_loop_oracle(self, tmp_path, capsys):
        out = tmp_path / "loop"

        assert main(["loop", "--oracle", "--episodes", "2", "--horizon", "60", "--disturbed", "1", "--out", str(out)]) == 0

        summary = json.loads(capsys.readouterr().out)
        assert summary["episodes"] == 2
        assert summary["success_rate"] == 1.0
        steps = read_jsonl(out / "loop.jsonl", LoopStep)
        assert {s.episode for s in steps} == {0, 1}
        assert read_meta(out / "loop.jsonl")["success_rate"] == 1.0


class TestExperiment:
    def test_stage_failure_names_stage(self, tmp_path, mocker, gridworld):
        mocker.patch("cli.experiment.gen_dataset", side_effect=OSError("disk full"))

        with pytest.raises(StageError, match="gen/train") as e:
            run_experiment(RunConfig(command="experiment", out=tmp_path), world=gridworld)
        assert isinstance(e.value.cause, OSError)

    @pytest.mark.slow
    @pytest.mark.integration
    def test_small_experiment(self, tmp_path, capsys):
        out = tmp_path / "exp"
        args = ["experiment", "--count", "6", "--epochs", "1", "--episodes", "2", "--horizon", "40", "--out", str(out)]

        assert main(args) == 0

        scores = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert set(scores) == {"oracle", "dnf", "half_dnf"}
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert report["regimes"]["half_dnf"]["train_examples"] == 12
        assert report["regimes"]["dnf"]["train_examples"] == 6
        assert report["loop"]["oracle_perception"]["success_rate"] == 1.0
        for name in ("comparison.csv", "f1_per_predicate.csv", "learning_curves.csv", "metrics_dnf.csv"):
            assert (out / name).exists()

    @pytest.mark.slow
    @pytest.mark.integration
    def test_same_seed_gives_identical_report(self, tmp_path, monkeypatch):
        args = ["experiment", "--seed", "5", "--count", "6", "--epochs", "1", "--episodes", "2", "--horizon", "30"]

        monkeypatch.setenv("PGK_THREADS", "1")
        assert main([*args, "--out", str(tmp_path / "first")]) == 0
        monkeypatch.setenv("PGK_THREADS", "4")
        assert main([*args, "--out", str(tmp_path / "second")]) == 0

        first = (tmp_path / "first" / "report.json").read_bytes()
        assert first == (tmp_path / "second" / "report.json").read_bytes()
        assert (tmp_path / "first" / "comparison.csv").read_bytes() == (tmp_path / "second" / "comparison.csv").read_bytes()

    @pytest.mark.slow
    @pytest.mark.integration
    def test_dnf_loop_not_worse_than_random(self, tmp_path):
        out = tmp_path / "exp"
        args = ["experiment", "--count", "60", "--epochs", "8", "--episodes", "20", "--horizon", "100", "--out", str(out)]

        assert main(args) == 0

        loop = json.loads((out / "report.json").read_text(encoding="utf-8"))["loop"]
        assert loop["dnf_model"]["success_rate"] >= loop["dnf_model"]["baseline_success_rate"]
        assert loop["oracle_perception"]["success_rate"] == 1.0
