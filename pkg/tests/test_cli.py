"""CLI: exit codes, flags, scene resolution, output modes."""

import json
import math

import pytest
from click.testing import CliRunner

from ptkit.catalog import get_scene
from ptkit.cli import main
from ptkit.scenefile import dumps_scene, save_scene


@pytest.fixture()
def runner():
    return CliRunner()


NON_POISSON_SCENE = {
    "name": "broken",
    "chart": {"coords": ["x", "y", "z"]},
    "poisson": {
        "terms": [
            {"indices": [0, 1], "coeff": "z"},
            {"indices": [0, 2], "coeff": "x"},
        ]
    },
}


class TestExitCodes:
    def test_verify_builtin_ok(self, runner):
        result = runner.invoke(main, ["verify", "so3"])
        assert result.exit_code == 0
        assert "[pi, pi] = 0" in result.output

    def test_verify_non_poisson_file(self, runner, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text(json.dumps(NON_POISSON_SCENE), encoding="utf-8")
        result = runner.invoke(main, ["verify", str(path)])
        assert result.exit_code == 1
        assert "witness term" in result.output

    def test_unknown_scene_is_input_error(self, runner):
        result = runner.invoke(main, ["verify", "does-not-exist"])
        assert result.exit_code == 2
        assert "error:" in result.stderr

    def test_malformed_file_is_input_error(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json", encoding="utf-8")
        result = runner.invoke(main, ["verify", str(path)])
        assert result.exit_code == 2
        assert "not valid JSON" in result.stderr

    def test_schema_violation_is_input_error(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"name": "x", "bogus": 1}), encoding="utf-8")
        result = runner.invoke(main, ["verify", str(path)])
        assert result.exit_code == 2
        assert "does not match the schema" in result.stderr

    def test_unimodular_inconclusive_exit(self, runner, tmp_path):
        # book-Id's bivector without the declared book matrix: empty basis
        # only bounds the stratum, so the exit code must say "inconclusive".
        scene = {
            "name": "book-like",
            "chart": {"coords": ["x", "y", "z"]},
            "poisson": {
                "terms": [
                    {"indices": [0, 2], "coeff": "x"},
                    {"indices": [1, 2], "coeff": "y"},
                ]
            },
        }
        path = tmp_path / "book-like.json"
        path.write_text(json.dumps(scene), encoding="utf-8")
        result = runner.invoke(main, ["unimodular", str(path), "--degree", "0"])
        assert result.exit_code == 3
        assert "none up to degree 0" in result.output

    def test_unimodular_book_upgrade_exit(self, runner):
        result = runner.invoke(main, ["unimodular", "book-Id", "--degree", "2"])
        assert result.exit_code == 1
        assert "not unimodular (tr ≠ 0)" in result.output

    def test_transversal_pass_and_fail(self, runner):
        assert runner.invoke(main, ["transversal", "book-Id"]).exit_code == 0
        assert (
            runner.invoke(main, ["transversal", "book-diag-1-minus1"]).exit_code == 1
        )

    def test_report_exit_codes(self, runner):
        assert runner.invoke(main, ["report", "so3"]).exit_code == 0
        assert runner.invoke(main, ["report", "s2-log"]).exit_code == 1


class TestFlags:
    def test_json_flag_emits_only_json(self, runner):
        result = runner.invoke(main, ["verify", "so3", "--json"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["command"] == "verify"
        assert payload["poisson"] is True

    def test_out_flag_writes_file(self, runner, tmp_path):
        out = tmp_path / "report.txt"
        result = runner.invoke(main, ["report", "so3", "--out", str(out)])
        assert result.exit_code == 0
        assert result.output == ""
        assert "HNPT holds (Theorem 1)" in out.read_text(encoding="utf-8")

    def test_out_with_json(self, runner, tmp_path):
        out = tmp_path / "verify.json"
        result = runner.invoke(main, ["verify", "so3", "--json", "--out", str(out)])
        assert result.exit_code == 0
        assert json.loads(out.read_text(encoding="utf-8"))["poisson"] is True

    def test_tol_and_samples_accepted(self, runner):
        result = runner.invoke(
            main,
            ["transversal", "book-Id", "--tol", "1e-7", "--samples", "64"],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output.split("```json\n")[1].split("```")[0])
        assert payload["samples"] == 64

    def test_file_tolerances_used_when_no_flags(self, runner, tmp_path):
        payload = json.loads(dumps_scene(get_scene("book-Id")))
        payload["tolerances"] = {"tol": 1e-9, "samples": 32}
        path = tmp_path / "scene.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        result = runner.invoke(main, ["transversal", str(path), "--json"])
        assert json.loads(result.output)["samples"] == 32


class TestSceneResolution:
    def test_path_resolution(self, runner, tmp_path):
        path = tmp_path / "copy.json"
        save_scene(get_scene("s2-log"), path)
        result = runner.invoke(main, ["report", str(path)])
        assert result.exit_code == 1
        assert "HNPT fails; weak HNPT holds (Theorem 4)" in result.output

    def test_scene_path_env(self, runner, tmp_path):
        save_scene(get_scene("book-Id"), tmp_path / "my-book.json")
        result = runner.invoke(
            main,
            ["verify", "my-book"],
            env={"PTK_SCENE_PATH": str(tmp_path)},
        )
        assert result.exit_code == 0

    def test_builtin_wins_over_scene_path(self, runner, tmp_path):
        # A search-path file must not shadow a builtin name.
        save_scene(get_scene("book-Id"), tmp_path / "so3.json")
        result = runner.invoke(
            main,
            ["verify", "so3", "--json"],
            env={"PTK_SCENE_PATH": str(tmp_path)},
        )
        assert json.loads(result.output)["scene"] == "so3"


class TestOtherCommands:
    def test_pair_auto(self, runner):
        result = runner.invoke(main, ["pair", "so3", "--patch", "x-segment", "--json"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["status"] == "certified"
        assert abs(payload["pairing"] - 1.0) < 1e-10

    def test_pair_named_form(self, runner):
        result = runner.invoke(
            main, ["pair", "book-Id", "--form", "euclidean", "--json"]
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert abs(payload["value"] - 2 * math.pi) < 1e-10
        assert payload["closed"] is False

    def test_dirac_spinor(self, runner):
        result = runner.invoke(main, ["dirac", "spinor", "--tangent", "2"])
        assert result.exit_code == 0
        assert "spinor line: 1" in result.output

    def test_dirac_conditions(self, runner):
        result = runner.invoke(
            main,
            ["dirac", "conditions", "--bivector", "0,1;-1,0", "--subspace", "1,0;0,1"],
        )
        assert result.exit_code == 0
        assert "conditions agree: yes" in result.output

    def test_dirac_missing_argument(self, runner):
        result = runner.invoke(main, ["dirac", "conditions", "--tangent", "2"])
        assert result.exit_code == 2
        assert "needs --subspace" in result.stderr

    def test_dirac_pullback(self, runner):
        result = runner.invoke(
            main,
            ["dirac", "pullback", "--two-form", "0,1;-1,0", "--map", "1,0;0,1", "--json"],
        )
        assert result.exit_code == 0
        assert json.loads(result.output)["transversal"] is True

    def test_classify_matrix(self, runner):
        result = runner.invoke(main, ["classify-lie3", "--matrix", "1,0,0,-1", "--json"])
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["unimodular"] is True
        assert payload["transverse_circle"] is False

    def test_classify_name(self, runner):
        result = runner.invoke(main, ["classify-lie3", "--name", "heisenberg"])
        assert result.exit_code == 0
        assert "unimodular: yes" in result.output

    def test_classify_needs_an_input(self, runner):
        result = runner.invoke(main, ["classify-lie3"])
        assert result.exit_code == 2

    def test_scenes_lists_builtins(self, runner):
        result = runner.invoke(main, ["scenes"])
        assert result.exit_code == 0
        for name in ("so3", "s2-log", "reeb-s3"):
            assert name in result.output

    def test_scenes_schema(self, runner):
        result = runner.invoke(main, ["scenes", "--schema"])
        assert result.exit_code == 0
        schema = json.loads(result.output)
        assert schema["title"] == "SceneFileModel"


class TestByteStability:
    @pytest.mark.parametrize("args", [["report", "s2-log"], ["report", "so3"]])
    def test_repeat_runs_identical(self, runner, args):
        first = runner.invoke(main, args).output
        second = runner.invoke(main, args).output
        assert first == second
