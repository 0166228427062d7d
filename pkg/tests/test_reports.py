"""Command layer: exit codes, machine blocks, headline wording."""

import json
import math
from fractions import Fraction

import pytest

from ptkit import reports
from ptkit.calculus import Multivector
from ptkit.catalog import Scene, Verdict, builtin_scenes, get_scene, point_patch
from ptkit.reports import (
    CommandError,
    EXIT_FAIL,
    EXIT_INCONCLUSIVE,
    EXIT_OK,
    build_dirac,
    headline,
    parse_matrix,
)


def _machine_block(text: str) -> dict:
    assert "```json\n" in text
    block = text.split("```json\n", 1)[1].split("```", 1)[0]
    return json.loads(block)


def _nonpoisson_scene() -> Scene:
    bivector = Multivector.from_strings(("x", "y", "z"), 2, {(0, 1): "z", (0, 2): "x"})
    return Scene(
        name="broken",
        summary="a bivector failing Jacobi",
        chart_names=("x", "y", "z"),
        chart_periods=(None, None, None),
        bivector=bivector,
        densities={},
        patches={},
        annotations={},
    )


def _plain_scene() -> Scene:
    bivector = Multivector.from_strings(("x", "y", "z"), 2, {(0, 1): "x"})
    return Scene(
        name="plain",
        summary="an unannotated Poisson scene",
        chart_names=("x", "y", "z"),
        chart_periods=(None, None, None),
        bivector=bivector,
        densities={},
        patches={},
        annotations={},
    )


class TestMachineBlock:
    def test_block_parses_and_matches_machine(self):
        result = reports.run_verify(get_scene("so3"))
        payload = _machine_block(result.text)
        assert payload == result.machine
        assert payload["exit_code"] == result.exit_code

    def test_text_is_byte_stable(self):
        a = reports.run_report(get_scene("s2-log")).text
        b = reports.run_report(get_scene("s2-log")).text
        assert a == b

    def test_machine_json_property(self):
        result = reports.run_scenes()
        assert json.loads(result.machine_json) == result.machine


class TestHeadline:
    def test_so3_headline(self):
        _, verdicts = __import__("ptkit.catalog", fromlist=["evaluate_scene"]).evaluate_scene(
            get_scene("so3")
        )
        assert headline(verdicts) == "HNPT holds (Theorem 1)"

    def test_s2_log_headline_contains_pinned_string(self):
        from ptkit.catalog import evaluate_scene

        _, verdicts = evaluate_scene(get_scene("s2-log"))
        assert headline(verdicts).startswith("HNPT fails; weak HNPT holds (Theorem 4)")

    def test_example_rules_have_no_parenthetical(self):
        verdicts = [
            Verdict("HNPT", "fails", "Example 7", "cited text"),
        ]
        assert headline(verdicts) == "HNPT fails"

    def test_all_inconclusive(self):
        verdicts = [
            Verdict("HNPT", "inconclusive", "", "", detail="no applicable rule fired"),
            Verdict("weak-HNPT", "inconclusive", "", ""),
        ]
        assert headline(verdicts) == "all checked properties inconclusive"


class TestVerify:
    def test_poisson_scene(self):
        result = reports.run_verify(get_scene("so3"))
        assert result.exit_code == EXIT_OK
        assert "[pi, pi] = 0" in result.text
        assert result.machine["witness"] is None

    def test_non_poisson_scene(self):
        result = reports.run_verify(_nonpoisson_scene())
        assert result.exit_code == EXIT_FAIL
        assert "witness term" in result.text
        witness = result.machine["witness"]
        assert witness is not None
        assert len(witness["indices"]) == 3


class TestUnimodular:
    def test_density_mode_invariant(self):
        result = reports.run_unimodular(get_scene("so3"), density="euclidean")
        assert result.exit_code == EXIT_OK
        assert "the pair is unimodular" in result.text
        assert all(entry["closed"] for entry in result.machine["chain"])

    def test_density_mode_not_invariant(self):
        result = reports.run_unimodular(get_scene("book-Id"), density="euclidean")
        assert result.exit_code == EXIT_FAIL
        assert "not invariant" in result.text
        assert result.machine["chain"][1]["closed"] is False

    def test_degree_mode_basis(self):
        result = reports.run_unimodular(get_scene("so3"), degree=0)
        assert result.exit_code == EXIT_OK
        assert result.machine["basis"] == ["1"]

    def test_degree_mode_book_upgrade(self):
        result = reports.run_unimodular(get_scene("book-Id"), degree=2)
        assert result.exit_code == EXIT_FAIL
        assert "not unimodular (tr ≠ 0)" in result.text
        assert result.machine["verdict"] == "not-unimodular"

    def test_degree_mode_inconclusive_without_book_matrix(self):
        # Same bivector as book-Id, but no declared book matrix: the empty
        # basis can only bound the polynomial stratum searched.
        bivector = get_scene("book-Id").bivector
        scene = Scene(
            name="book-like",
            summary="",
            chart_names=("x", "y", "z"),
            chart_periods=(None, None, None),
            bivector=bivector,
            densities={},
            patches={},
            annotations={},
        )
        result = reports.run_unimodular(scene, degree=1)
        assert result.exit_code == EXIT_INCONCLUSIVE
        assert "none up to degree 1" in result.text

    def test_argument_validation(self):
        with pytest.raises(CommandError, match="exactly one"):
            reports.run_unimodular(get_scene("so3"))
        with pytest.raises(CommandError, match="exactly one"):
            reports.run_unimodular(get_scene("so3"), degree=1, density="euclidean")
        with pytest.raises(CommandError, match="nonnegative"):
            reports.run_unimodular(get_scene("so3"), degree=-1)
        with pytest.raises(CommandError, match="no density"):
            reports.run_unimodular(get_scene("so3"), density="missing")


class TestTransversal:
    def test_transversal_circle(self):
        result = reports.run_transversal(get_scene("book-Id"), "unit-circle")
        assert result.exit_code == EXIT_OK
        assert result.machine["is_transversal"] is True
        assert result.machine["sign"] == 1

    def test_failing_circle(self):
        result = reports.run_transversal(get_scene("book-diag-1-minus1"), "unit-circle")
        assert result.exit_code == EXIT_FAIL
        assert "vanishes or changes sign" in result.text

    def test_point_patch(self):
        result = reports.run_transversal(get_scene("s2-log"), "N")
        assert result.exit_code == EXIT_OK
        assert result.machine == {
            "command": "transversal",
            "scene": "s2-log",
            "patch": "N",
            "kind": "point",
            "point": [0.0, 0.5],
            "is_transversal": True,
            "sign": -1,
            "exit_code": 0,
        }

    def test_point_on_locus_fails(self):
        scene = get_scene("s2-log")
        equator = point_patch("E", ("theta", "z"), ("0", "0"))
        modified = Scene(
            name=scene.name,
            summary=scene.summary,
            chart_names=scene.chart_names,
            chart_periods=scene.chart_periods,
            bivector=scene.bivector,
            densities=scene.densities,
            patches={"E": equator},
            annotations=scene.annotations,
        )
        result = reports.run_transversal(modified, "E")
        assert result.exit_code == EXIT_FAIL
        assert "not-a-transversal-point" in result.text

    def test_default_patch_when_unique(self):
        result = reports.run_transversal(get_scene("book-Id"))
        assert result.machine["patch"] == "unit-circle"

    def test_unknown_patch(self):
        with pytest.raises(CommandError, match="no patch 'xyz'"):
            reports.run_transversal(get_scene("book-Id"), "xyz")

    def test_no_patches(self):
        with pytest.raises(CommandError, match="has no patches"):
            reports.run_transversal(get_scene("sl2"))

    def test_ambiguous_patch(self):
        with pytest.raises(CommandError, match="several patches"):
            reports.run_transversal(get_scene("s2-log"))


class TestPair:
    def test_auto_certified(self):
        result = reports.run_pair(get_scene("so3"), "x-segment")
        assert result.exit_code == EXIT_OK
        assert result.machine["status"] == "certified"
        assert result.machine["pairing"] == pytest.approx(1.0, abs=1e-10)
        assert "cite:" in result.text

    def test_auto_precondition_failure(self):
        result = reports.run_pair(get_scene("book-Id"), "unit-circle")
        assert result.exit_code == EXIT_FAIL
        assert result.machine["status"] == "precondition-failed"
        assert result.machine["failure_reason"] == "not-unimodular-certified"

    def test_named_form_raw_integral(self):
        result = reports.run_pair(get_scene("book-Id"), "unit-circle", form="euclidean")
        assert result.exit_code == EXIT_OK
        assert result.machine["value"] == pytest.approx(2 * math.pi, abs=1e-10)
        assert result.machine["closed"] is False
        assert result.machine["warning"] is not None
        assert "warning:" in result.text

    def test_unknown_form(self):
        with pytest.raises(CommandError, match="no density"):
            reports.run_pair(get_scene("book-Id"), "unit-circle", form="volume")

    def test_auto_needs_densities(self):
        with pytest.raises(CommandError, match="no densities"):
            reports.run_pair(get_scene("s2-log"), "N")

    def test_odd_codimension_rejected(self):
        scene = get_scene("book-Id")
        modified = Scene(
            name=scene.name,
            summary=scene.summary,
            chart_names=scene.chart_names,
            chart_periods=scene.chart_periods,
            bivector=scene.bivector,
            densities=scene.densities,
            patches={"P": point_patch("P", ("x", "y", "z"), ("1", "0", "0"))},
            annotations=scene.annotations,
        )
        with pytest.raises(CommandError, match="odd codimension"):
            reports.run_pair(modified, "P", form="euclidean")


class TestReportCommand:
    def test_exit_fail_beats_holds(self):
        result = reports.run_report(get_scene("s2-log"))
        assert result.exit_code == EXIT_FAIL

    def test_exit_ok_when_all_hold(self):
        result = reports.run_report(get_scene("so3"))
        assert result.exit_code == EXIT_OK

    def test_exit_inconclusive_only(self):
        result = reports.run_report(_plain_scene())
        assert result.exit_code == EXIT_INCONCLUSIVE
        assert result.machine["headline"] == "all checked properties inconclusive"

    def test_verdicts_in_machine_block(self):
        payload = _machine_block(reports.run_report(get_scene("p2-log")).text)
        rules = [v["rule"] for v in payload["verdicts"]]
        assert "Example 8" in rules
        assert "Theorem 4" in rules

    def test_every_builtin_scene_reports(self):
        for scene in builtin_scenes():
            result = reports.run_report(scene)
            assert result.exit_code in (EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE)
            assert f"report: {scene.name}" in result.text


class TestParseMatrix:
    def test_basic(self):
        assert parse_matrix("1,2;3,4") == [
            [Fraction(1), Fraction(2)],
            [Fraction(3), Fraction(4)],
        ]

    def test_fractions_and_spaces(self):
        assert parse_matrix(" 1/2 , -3 ; 0 , 2/7 ") == [
            [Fraction(1, 2), Fraction(-3)],
            [Fraction(0), Fraction(2, 7)],
        ]

    def test_bad_entry(self):
        with pytest.raises(CommandError, match="bad rational entry"):
            parse_matrix("1,x;2,3")

    def test_ragged_rows(self):
        with pytest.raises(CommandError, match="same length"):
            parse_matrix("1,2;3")

    def test_empty_entry(self):
        with pytest.raises(CommandError, match="empty entry"):
            parse_matrix("1,,2")


class TestDiracCommands:
    def test_build_requires_exactly_one(self):
        with pytest.raises(CommandError, match="exactly one"):
            build_dirac()
        with pytest.raises(CommandError, match="exactly one"):
            build_dirac(tangent=2, cotangent=2)

    def test_rows_must_be_even_width(self):
        with pytest.raises(CommandError, match="length 2n"):
            build_dirac(rows="1,0,0;0,1,0")

    def test_non_isotropic_rows_rejected(self):
        with pytest.raises(CommandError, match="isotropic"):
            build_dirac(rows="1,0,1,0;0,1,0,1")

    def test_spinor_of_tangent_is_one(self):
        lagrangian, source = build_dirac(tangent=3)
        result = reports.run_dirac_spinor(lagrangian, source)
        assert result.exit_code == EXIT_OK
        assert result.machine["line"] == "1"

    def test_cospinor_of_graph(self):
        lagrangian, source = build_dirac(bivector="0,1;-1,0")
        result = reports.run_dirac_spinor(lagrangian, source, cospinor=True)
        assert result.machine["line"] == "1 - e(0,1)"

    def test_pullback_of_two_form_graph(self):
        lagrangian, source = build_dirac(two_form="0,3;-3,0")
        result = reports.run_dirac_pullback(lagrangian, "1,0;0,1", source)
        assert result.exit_code == EXIT_OK
        assert result.machine["transversal"] is True
        assert result.machine["spinor_transported"] is True

    def test_pullback_failure_path(self):
        lagrangian, source = build_dirac(cotangent=2)
        result = reports.run_dirac_pullback(lagrangian, "0,0;0,0", source)
        assert result.exit_code == EXIT_FAIL
        assert "fails" in result.text

    def test_pushforward(self):
        lagrangian, source = build_dirac(tangent=2)
        result = reports.run_dirac_pushforward(lagrangian, "1,0;0,1", source)
        assert result.exit_code == EXIT_OK
        assert result.machine["strong"] is True
        assert result.machine["surjective"] is True

    def test_conditions_symplectic_subspace(self):
        lagrangian, source = build_dirac(bivector="0,1,0,0;-1,0,0,0;0,0,0,2;0,0,-2,0")
        result = reports.run_dirac_conditions(lagrangian, "1,0,0,0;0,1,0,0", source)
        assert result.exit_code == EXIT_OK
        assert result.machine["b"] and result.machine["c"] and result.machine["d"]
        assert result.machine["agree"] is True

    def test_conditions_failing_subspace(self):
        # The x-axis inside the graph of e0^e1 is not transversal: the
        # symplectic orthogonal of span(e0) contains e0 itself... the three
        # conditions still agree and all fail.
        lagrangian, source = build_dirac(bivector="0,1;-1,0")
        result = reports.run_dirac_conditions(lagrangian, "1,0", source)
        assert result.exit_code == EXIT_FAIL
        assert result.machine["agree"] is True
        assert result.machine["all_hold"] is False


class TestClassifyCommand:
    def test_matrix(self):
        result = reports.run_classify_lie3(matrix="1,0,0,1")
        assert result.exit_code == EXIT_OK
        assert result.machine["transverse_circle"] is True
        assert result.machine["unimodular"] is False

    def test_matrix_with_fractions(self):
        result = reports.run_classify_lie3(matrix="1/2,0,0,-1/2")
        assert result.machine["unimodular"] is True
        assert result.machine["transverse_circle"] is False

    def test_name(self):
        result = reports.run_classify_lie3(name="so3")
        assert result.machine["unimodular"] is True
        assert result.machine["eigenvalues"] == "not applicable (semisimple)"

    def test_matrix_validation(self):
        with pytest.raises(CommandError, match="four rational entries"):
            reports.run_classify_lie3(matrix="1,2,3")
        with pytest.raises(CommandError, match="bad rational entry"):
            reports.run_classify_lie3(matrix="1,2,3,x")
        with pytest.raises(CommandError, match="exactly one"):
            reports.run_classify_lie3()


class TestScenesCommand:
    def test_lists_all_builtins(self):
        result = reports.run_scenes()
        assert result.exit_code == EXIT_OK
        names = [entry["name"] for entry in result.machine["scenes"]]
        assert names == [scene.name for scene in builtin_scenes()]
        for name in names:
            assert name in result.text
