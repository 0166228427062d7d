"""Patches, transversality, pairing, and the positivity certificate.

Frozen determinant values and pairings were derived by hand-expanding the
wedge products (worked examples recorded as comments next to each test).
"""

import math

import pytest

from ptkit.calculus import DiffForm, Multivector
from ptkit.expr import Num, parse_expr
from ptkit.poisson import Density, PoissonStructure, lie_poisson, book_algebra
from ptkit.transversal import (
    HnptCertificate,
    NotTransversalPointError,
    pair,
    ParamSpec,
    Patch,
    PatchError,
    hnpt_certificate,
    point_coorientation,
    transversality_check,
)

XYZ = ("x", "y", "z")


def mv(names, degree, terms):
    return Multivector.from_strings(names, degree, terms)


def form(names, degree, terms):
    return DiffForm.from_strings(names, degree, terms)


def circle_patch(names=XYZ, name="unit-circle"):
    t = ParamSpec("t", 0.0, 2.0 * math.pi, periodic=True)
    comps = tuple(
        parse_expr(src, ("t",), allow_trig=True)
        for src in ("cos(t)", "sin(t)", "0")
    )
    return Patch(name, names, (t,), comps)


def theta_circle_patch():
    # vertical circle (0, 0, t) in the product chart; the third chart
    # coordinate is an angle with period 2*pi
    t = ParamSpec("t", 0.0, 2.0 * math.pi, periodic=True)
    comps = tuple(
        parse_expr(src, ("t",), allow_trig=True) for src in ("0", "0", "t")
    )
    return Patch(
        "theta-circle",
        ("x", "y", "theta"),
        (t,),
        comps,
        target_periods=(None, None, 2.0 * math.pi),
    )


def point_patch(names, coords, name="pt"):
    comps = tuple(Num(c) for c in coords)
    return Patch(name, names, (), comps)


def book_structure(a, b, c, d):
    return lie_poisson(book_algebra(a, b, c, d))


def plane_structure():
    return PoissonStructure.from_bivector(mv(("x", "y"), 2, {(0, 1): "1"}))


def product_structure():
    return PoissonStructure.from_bivector(
        mv(("x", "y", "theta"), 2, {(0, 1): "1"})
    )


class TestPatchValidation:
    def test_component_count(self):
        with pytest.raises(PatchError):
            Patch("bad", XYZ, (), (Num(0.0),))

    def test_undeclared_variable(self):
        with pytest.raises(PatchError):
            Patch(
                "bad",
                ("x",),
                (ParamSpec("t", 0.0, 1.0),),
                (parse_expr("s", ("s",)),),
            )

    def test_periodic_closure_enforced(self):
        t = ParamSpec("t", 0.0, 2.0 * math.pi, periodic=True)
        with pytest.raises(PatchError):
            Patch("open-line", ("x",), (t,), (parse_expr("t", ("t",)),))

    def test_closure_accepts_trig(self):
        circle_patch()  # must not raise

    def test_bad_range(self):
        with pytest.raises(PatchError):
            ParamSpec("t", 1.0, 0.0)
        with pytest.raises(PatchError):
            ParamSpec("t", 0.0, math.inf)


class TestTransversalityCheck:
    def test_book_identity_circle_determinant_is_one(self):
        # hand expansion: pi^1 ^ tau at (cos t, sin t, 0) equals minus the
        # coordinate volume, and the codimension sign flips it to +1
        report = transversality_check(book_structure(1, 0, 0, 1), circle_patch(), samples=64)
        assert report.codim == 2
        assert report.patch_valid
        assert report.is_transversal
        assert report.sign_constant
        assert report.sign == 1
        for _, value in report.determinant_samples:
            assert abs(value - 1.0) < 1e-12

    def test_book_diag_minus_circle_changes_sign(self):
        # determinant samples follow cos(2t): vanishing and sign-changing
        report = transversality_check(
            book_structure(1, 0, 0, -1), circle_patch(), samples=64
        )
        assert not report.is_transversal
        assert not report.sign_constant
        values = [v for _, v in report.determinant_samples]
        assert max(values) > 0.5 and min(values) < -0.5
        point, value = report.determinant_samples[0]
        assert abs(value - math.cos(2 * point[0])) < 1e-12

    def test_zero_structure_not_transversal(self):
        structure = PoissonStructure.from_bivector(Multivector.zero(3, 2))
        report = transversality_check(structure, circle_patch(), samples=16)
        assert not report.is_transversal
        assert report.min_abs == 0.0

    def test_so3_equatorial_circle_fails(self):
        # the equator is tangent to the sphere leaf: determinant identically 0
        structure = PoissonStructure.from_bivector(
            mv(XYZ, 2, {(1, 2): "x", (0, 2): "-y", (0, 1): "z"})
        )
        report = transversality_check(structure, circle_patch(), samples=32)
        assert not report.is_transversal
        assert report.min_abs < 1e-12

    def test_odd_codimension_rejected(self):
        structure = PoissonStructure.from_bivector(
            mv(XYZ, 2, {(1, 2): "x", (0, 2): "-y", (0, 1): "z"})
        )
        with pytest.raises(ValueError, match="even codimension"):
            transversality_check(structure, point_patch(XYZ, (1.0, 0.0, 0.0)))

    def test_immersion_failure_reports_invalid_patch(self):
        t = ParamSpec("t", 0.0, 2.0 * math.pi, periodic=True)
        constant = Patch(
            "degenerate", XYZ, (t,), (Num(1.0), Num(0.0), Num(0.0))
        )
        report = transversality_check(book_structure(1, 0, 0, 1), constant, samples=8)
        assert not report.patch_valid
        assert report.immersion_witness is not None
        assert not report.is_transversal

    def test_point_in_symplectic_plane(self):
        report = transversality_check(
            plane_structure(), point_patch(("x", "y"), (0.3, -0.8)), samples=1
        )
        # q = 1: determinant is -<volume, pi> = -1
        assert report.is_transversal
        assert report.sign == -1

    def test_orientation_reversal_keeps_transversality(self):
        t = ParamSpec("t", 0.0, 2.0 * math.pi, periodic=True)
        reversed_circle = Patch(
            "unit-circle-reversed",
            XYZ,
            (t,),
            tuple(
                parse_expr(src, ("t",), allow_trig=True)
                for src in ("cos(t)", "-sin(t)", "0")
            ),
        )
        structure = book_structure(1, 0, 0, 1)
        fwd = transversality_check(structure, circle_patch(), samples=32)
        rev = transversality_check(structure, reversed_circle, samples=32)
        assert fwd.is_transversal and rev.is_transversal
        assert fwd.sign == -rev.sign


class TestPair:
    def test_winding_form_gives_two_pi_with_warning(self):
        alpha = form(XYZ, 1, {(1,): "x", (0,): "-y"})
        result = pair(alpha, circle_patch(), tol=1e-10)
        assert abs(result.value - 2 * math.pi) < 1e-10
        assert not result.closed
        assert result.warning is not None
        assert result.converged

    def test_dz_pairs_to_zero(self):
        alpha = form(XYZ, 1, {(2,): "1"})
        result = pair(alpha, circle_patch())
        assert abs(result.value) < 1e-12
        assert result.closed
        assert result.warning is None

    def test_exact_form_pairs_to_zero(self):
        # -(x dx + y dy + z dz) is exact, so any closed loop pairs to zero
        alpha = form(XYZ, 1, {(0,): "-x", (1,): "-y", (2,): "-z"})
        result = pair(alpha, circle_patch())
        assert abs(result.value) < 1e-12
        assert result.closed

    def test_point_pairing_is_evaluation(self):
        structure = plane_structure()
        # iota_pi (dx^dy) = -1 as a 0-form
        alpha = DiffForm(2, 0, {(): __import__("ptkit.poly", fromlist=["PolyScalar"]).PolyScalar.constant(2, -1)})
        result = pair(alpha, point_patch(("x", "y"), (2.0, 1.0)))
        assert result.value == -1.0
        assert result.closed

    def test_degree_mismatch_rejected(self):
        alpha = form(XYZ, 2, {(0, 1): "1"})
        with pytest.raises(ValueError, match="degree"):
            pair(alpha, circle_patch())

    def test_orientation_reversal_flips_sign(self):
        t = ParamSpec("t", 0.0, 2.0 * math.pi, periodic=True)
        reversed_circle = Patch(
            "rev",
            XYZ,
            (t,),
            tuple(
                parse_expr(src, ("t",), allow_trig=True)
                for src in ("cos(t)", "-sin(t)", "0")
            ),
        )
        alpha = form(XYZ, 1, {(1,): "x", (0,): "-y"})
        fwd = pair(alpha, circle_patch(), tol=1e-10)
        rev = pair(alpha, reversed_circle, tol=1e-10)
        assert abs(fwd.value + rev.value) < 1e-10

    def test_quadrature_stability_under_doubling(self):
        # spectral accuracy of the periodic trapezoid rule: going from 128 to
        # 256 nodes moves the value by less than 1e-10
        alpha = form(XYZ, 1, {(1,): "x^3", (0,): "-y*x^2"})
        a = pair(alpha, circle_patch(), samples=128, tol=1e-15)
        b = pair(alpha, circle_patch(), samples=256, tol=1e-15)
        assert abs(a.value - b.value) < 1e-10


class TestHnptCertificate:
    def volume_density(self, n):
        return Density(DiffForm.coordinate_volume(n))

    def test_symplectic_plane_point(self):
        cert = hnpt_certificate(
            plane_structure(),
            self.volume_density(2),
            point_patch(("x", "y"), (0.25, -1.5)),
        )
        assert cert.status == "certified"
        assert cert.q == 1
        # raw value is the contraction constant -1; the canonical
        # coorientation sign -1 makes the pairing +1
        assert cert.orientation_sign == -1
        assert cert.raw_integral == -1.0
        assert cert.pairing == 1.0
        assert cert.integrand_positive
        assert cert.verdict == "[X] ≠ 0 in H_0(M, 𝔬_M)"
        assert cert.citation == "A unimodular Poisson manifold has the HNPT property."

    def test_product_circle_pairs_to_two_pi(self):
        cert = hnpt_certificate(
            product_structure(),
            self.volume_density(3),
            theta_circle_patch(),
            samples=64,
        )
        assert cert.status == "certified"
        assert cert.orientation_sign == -1
        assert abs(cert.pairing - 2 * math.pi) < 1e-9
        assert cert.verdict == "[X] ≠ 0 in H_1(M, 𝔬_M)"

    def test_symplectic_r4_point(self):
        names = ("x1", "x2", "x3", "x4")
        structure = PoissonStructure.from_bivector(
            mv(names, 2, {(0, 1): "1", (2, 3): "1"})
        )
        cert = hnpt_certificate(
            structure,
            self.volume_density(4),
            point_patch(names, (0.0, 0.0, 0.0, 0.0)),
        )
        assert cert.status == "certified"
        assert cert.q == 2
        assert cert.orientation_sign == 1
        assert cert.pairing == 2.0

    def test_book_identity_fails_unimodularity_gate(self):
        cert = hnpt_certificate(
            book_structure(1, 0, 0, 1), self.volume_density(3), circle_patch()
        )
        assert cert.status == "precondition-failed"
        assert cert.failure_reason == "not-unimodular-certified"

    def test_so3_equator_fails_transversality_gate(self):
        structure = PoissonStructure.from_bivector(
            mv(XYZ, 2, {(1, 2): "x", (0, 2): "-y", (0, 1): "z"})
        )
        cert = hnpt_certificate(
            structure, self.volume_density(3), circle_patch(), samples=32
        )
        assert cert.status == "precondition-failed"
        assert cert.failure_reason == "not-transversal"


class TestPointCoorientation:
    def cylinder(self):
        return PoissonStructure.from_bivector(
            mv(("z", "theta"), 2, {(0, 1): "z"})
        )

    def test_opposite_hemisphere_signs(self):
        structure = self.cylinder()
        assert point_coorientation(structure, (0.5, 1.0)) == 1
        assert point_coorientation(structure, (-0.5, 2.5)) == -1

    def test_on_singular_locus_rejected(self):
        with pytest.raises(NotTransversalPointError):
            point_coorientation(self.cylinder(), (0.0, 0.7))

    def test_symplectic_plane_always_positive(self):
        assert point_coorientation(plane_structure(), (3.0, -4.0)) == 1

    def test_odd_dimension_rejected(self):
        structure = PoissonStructure.from_bivector(
            mv(XYZ, 2, {(0, 1): "z"})
        )
        with pytest.raises(ValueError, match="even"):
            point_coorientation(structure, (0.0, 0.0, 1.0))
