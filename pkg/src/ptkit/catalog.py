"""Worked scenes, the 3-d Lie-algebra classifier, and the verdict engine.

A :class:`Scene` bundles a coordinate chart with a polynomial bivector,
optional densities and patches, and a set of *annotations*: declared facts
("compact", "leaves_closed", ...) that no chart computation could establish.
:func:`run_scene_checks` runs every applicable exact/numeric check on a scene,
and :func:`verdict_engine` forward-chains a fixed rule table over the results,
emitting :class:`Verdict` entries that quote the governing statement verbatim
(Theorems 1-5, Corollaries 1-3, and the worked examples).

Two standing principles:

* computed facts always take precedence -- a rule whose premise is decidable
  by a chart computation never fires from an annotation alone;
* contradictory conclusions (the same property both holding and failing, or
  an exactly-certified invariant density next to a failed positivity
  certificate) abort with :class:`ContradictionError` naming both witnesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import citations, ratlin
from .calculus import Multivector
from .expr import parse_expr
from .poly import PolyScalar
from .poisson import (
    Density,
    DiffForm,
    PoissonStructure,
    book_algebra,
    check_invariant_density,
    heisenberg_algebra,
    jacobi_check,
    lie_poisson,
    log_symplectic_analysis,
    LogSymplecticReport,
    sl2_algebra,
    so3_algebra,
    solve_invariant_density,
)
from .transversal import (
    HnptCertificate,
    NotTransversalPointError,
    ParamSpec,
    Patch,
    TransversalityReport,
    hnpt_certificate,
    point_coorientation,
    transversality_check,
)

CATALOG_VERSION = "1.0"

TWO_PI = 2.0 * math.pi


class CatalogError(ValueError):
    pass


class ContradictionError(CatalogError):
    """Two witnesses force opposite conclusions; the scene data is broken."""


def _fraction(value) -> Fraction:
    if isinstance(value, float):
        raise CatalogError("catalog matrices must be rational (no floats)")
    return Fraction(value)


# ---------------------------------------------------------------------------
# deck maps (affine chart symmetries) and their exact pushforward check


@dataclass(frozen=True)
class DeckMap:
    """Affine chart map x -> A x + b with rational linear part.

    ``shifts`` holds the translation per target coordinate; ``None`` means no
    shift, a float (possibly irrational, e.g. a half period) is allowed
    because the exactness of the pushforward check never evaluates it: the
    check refuses to certify unless the bivector coefficients are independent
    of every shifted coordinate.
    """

    matrix: Tuple[Tuple[Fraction, ...], ...]
    shifts: Tuple[Optional[float], ...]
    note: str = ""

    def __post_init__(self) -> None:
        rows = tuple(tuple(_fraction(x) for x in row) for row in self.matrix)
        m = len(rows)
        if m == 0 or any(len(row) != m for row in rows):
            raise CatalogError("deck matrix must be square and nonempty")
        if len(self.shifts) != m:
            raise CatalogError("deck map needs one shift entry per coordinate")
        object.__setattr__(self, "matrix", rows)
        object.__setattr__(self, "shifts", tuple(self.shifts))

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def image_point(self, point: Sequence[float]) -> Tuple[float, ...]:
        if len(point) != self.dim:
            raise CatalogError("point has the wrong number of coordinates")
        out = []
        for i, row in enumerate(self.matrix):
            value = sum(float(a) * float(x) for a, x in zip(row, point))
            if self.shifts[i] is not None:
                value += self.shifts[i]
            out.append(value)
        return tuple(out)


@dataclass(frozen=True)
class DeckReport:
    ok: bool
    note: str
    defect_keys: Tuple[Tuple[int, int], ...] = ()


def _invert(matrix: Sequence[Sequence[Fraction]]) -> List[List[Fraction]]:
    m = len(matrix)
    rows = [list(row) for row in matrix]
    if ratlin.rank(rows) != m:
        raise CatalogError("deck matrix is singular")
    cols: List[List[Fraction]] = []
    for k in range(m):
        rhs = [Fraction(1) if i == k else Fraction(0) for i in range(m)]
        sol = ratlin.solve(rows, rhs)
        assert sol is not None
        cols.append(list(sol))
    return [[cols[k][j] for k in range(m)] for j in range(m)]


def deck_pushforward_check(structure: PoissonStructure, deck: DeckMap) -> DeckReport:
    """Exact test that the deck map sends the bivector to itself.

    For x -> A x + b the pushforward of ``c(x) d_i ^ d_j`` is
    ``(c o inverse) * (A d_i) ^ (A d_j)``.  The composition with the inverse
    stays polynomial-exact only if no coefficient depends on a coordinate
    that picks up a shift; otherwise the check refuses rather than
    approximating.
    """
    m = structure.chart_dim
    if deck.dim != m:
        raise CatalogError("deck map does not act on the structure's chart")
    inv = _invert(deck.matrix)
    shifted = [k for k in range(m) if deck.shifts[k] is not None]
    used = set()
    for coeff in structure.bivector.terms.values():
        used |= coeff.used_variables()
    for j in sorted(used):
        for k in shifted:
            if inv[j][k] != 0:
                raise CatalogError(
                    f"deck check cannot be exact: coordinate {j} appears in the "
                    f"bivector and picks up the shifted coordinate {k}"
                )
    images = [
        sum(
            (PolyScalar.variable(m, k).scale(inv[j][k]) for k in range(m)),
            PolyScalar(m, {}),
        )
        for j in range(m)
    ]
    acc: Dict[Tuple[int, int], PolyScalar] = {}
    for (i1, i2), coeff in structure.bivector.terms.items():
        comp = coeff.compose(images)
        for j1 in range(m):
            a1 = deck.matrix[j1][i1]
            if a1 == 0:
                continue
            for j2 in range(m):
                if j1 == j2:
                    continue
                a2 = deck.matrix[j2][i2]
                if a2 == 0:
                    continue
                key = (j1, j2) if j1 < j2 else (j2, j1)
                sign = 1 if j1 < j2 else -1
                term = comp.scale(a1 * a2 * sign)
                acc[key] = acc[key] + term if key in acc else term
    defects = []
    keys = set(acc) | set(structure.bivector.terms)
    for key in sorted(keys):
        left = acc.get(key, PolyScalar(m, {}))
        right = structure.bivector.terms.get(key, PolyScalar(m, {}))
        if left != right:
            defects.append(key)
    if defects:
        return DeckReport(False, "deck map does not preserve the bivector", tuple(defects))
    return DeckReport(True, "deck map preserves the bivector exactly")


# ---------------------------------------------------------------------------
# scenes


@dataclass(frozen=True)
class Scene:
    """A chart-level model plus declared facts the chart cannot see.

    ``annotations`` maps each declared fact to a short justification note;
    the verdict engine only ever consumes the keys.  ``bivector`` may be
    ``None`` for annotation-only scenes (no polynomial model exists); such
    scenes exercise only annotation-driven rules.
    """

    name: str
    summary: str
    chart_names: Tuple[str, ...]
    chart_periods: Tuple[Optional[float], ...]
    bivector: Optional[Multivector]
    densities: Mapping[str, Density]
    patches: Mapping[str, Patch]
    annotations: Mapping[str, str]
    book_matrix: Optional[Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]] = None
    deck: Optional[DeckMap] = None
    flat_bundle: Optional[Tuple[int, int]] = None

    def __post_init__(self) -> None:
        if self.bivector is not None and self.bivector.nvars != len(self.chart_names):
            raise CatalogError(f"scene {self.name!r}: bivector does not match the chart")
        if len(self.chart_periods) != len(self.chart_names):
            raise CatalogError(f"scene {self.name!r}: one period entry per coordinate")
        for patch in self.patches.values():
            if patch.chart_names != self.chart_names:
                raise CatalogError(
                    f"scene {self.name!r}: patch {patch.name!r} targets a different chart"
                )

    def structure(self, require: bool = False) -> PoissonStructure:
        if self.bivector is None:
            raise CatalogError(f"scene {self.name!r} is annotation-only (no bivector)")
        return PoissonStructure.from_bivector(self.bivector, require=require)


def _bivector(names: Sequence[str], terms: Mapping[Tuple[int, int], str]) -> Multivector:
    return Multivector.from_strings(tuple(names), 2, dict(terms))


def _euclidean_density(names: Sequence[str], note: str) -> Density:
    return Density(DiffForm.coordinate_volume(len(names)), note)


def _const_components(values: Sequence[str]) -> Tuple:
    return tuple(parse_expr(v, ()) for v in values)


def point_patch(
    name: str,
    chart_names: Sequence[str],
    values: Sequence[str],
    target_periods: Sequence[Optional[float]] = (),
) -> Patch:
    """Zero-parameter patch: a single point given by constant expressions."""
    return Patch(
        name,
        tuple(chart_names),
        (),
        _const_components(values),
        target_periods=tuple(target_periods),
    )


def unit_circle_patch(chart_names: Sequence[str] = ("x", "y", "z")) -> Patch:
    """The round circle (cos t, sin t, 0, ..., 0) in the given chart."""
    t = ParamSpec("t", 0.0, TWO_PI, periodic=True)
    values = ["cos(t)", "sin(t)"] + ["0"] * (len(chart_names) - 2)
    comps = tuple(parse_expr(v, ("t",), allow_trig=True) for v in values)
    return Patch("unit-circle", tuple(chart_names), (t,), comps)


def _x_segment_patch() -> Patch:
    """A compact segment of the x-axis, crossing the sphere leaves once each."""
    t = ParamSpec("t", 0.5, 1.5, periodic=False)
    comps = tuple(parse_expr(v, ("t",), allow_trig=True) for v in ("t", "0", "0"))
    return Patch("x-segment", ("x", "y", "z"), (t,), comps)


def _theta_circle_patch() -> Patch:
    t = ParamSpec("t", 0.0, TWO_PI, periodic=True)
    comps = tuple(parse_expr(v, ("t",), allow_trig=True) for v in ("0", "0", "t"))
    return Patch(
        "theta-circle",
        ("x", "y", "theta"),
        (t,),
        comps,
        target_periods=(None, None, TWO_PI),
    )


def _book_bivector(a, b, c, d) -> Multivector:
    return lie_poisson(book_algebra(a, b, c, d)).bivector


def builtin_scenes() -> List[Scene]:
    """The versioned, deterministic scene list (see CATALOG_VERSION)."""
    xyz = ("x", "y", "z")
    no_period3 = (None, None, None)
    F = Fraction
    scenes: List[Scene] = []

    scenes.append(
        Scene(
            name="so3",
            summary="Lie-Poisson structure on the dual of so(3); the leaves are spheres",
            chart_names=xyz,
            chart_periods=no_period3,
            bivector=lie_poisson(so3_algebra()).bivector,
            densities={"euclidean": _euclidean_density(xyz, "dx^dy^dz")},
            patches={"x-segment": _x_segment_patch()},
            annotations={
                "leaves_closed": "the symplectic leaves are the concentric spheres, which are compact",
                "orientable": "coordinate chart of a dual vector space",
            },
        )
    )
    scenes.append(
        Scene(
            name="sl2",
            summary="Lie-Poisson structure on the dual of sl(2); hyperboloid leaves",
            chart_names=xyz,
            chart_periods=no_period3,
            bivector=lie_poisson(sl2_algebra()).bivector,
            densities={"euclidean": _euclidean_density(xyz, "dx^dy^dz")},
            patches={},
            annotations={
                "orientable": "coordinate chart of a dual vector space",
            },
        )
    )
    scenes.append(
        Scene(
            name="heisenberg",
            summary="Lie-Poisson structure on the dual of the Heisenberg algebra",
            chart_names=xyz,
            chart_periods=no_period3,
            bivector=lie_poisson(heisenberg_algebra()).bivector,
            densities={"euclidean": _euclidean_density(xyz, "dx^dy^dz")},
            patches={},
            annotations={
                "orientable": "coordinate chart of a dual vector space",
            },
            book_matrix=((F(0), F(0)), (F(1), F(0))),
        )
    )
    scenes.append(
        Scene(
            name="book-Id",
            summary="book structure with matrix A = Id; open-book foliation of 3-space",
            chart_names=xyz,
            chart_periods=no_period3,
            bivector=_book_bivector(1, 0, 0, 1),
            densities={"euclidean": _euclidean_density(xyz, "dx^dy^dz (not invariant here)")},
            patches={"unit-circle": unit_circle_patch(xyz)},
            annotations={
                "H1_vanishes": "the chart is all of 3-space, whose first homology vanishes",
                "orientable": "coordinate chart",
            },
            book_matrix=((F(1), F(0)), (F(0), F(1))),
        )
    )
    scenes.append(
        Scene(
            name="book-diag-1-minus1",
            summary="book structure with matrix A = diag(1, -1); trace zero, unimodular",
            chart_names=xyz,
            chart_periods=no_period3,
            bivector=_book_bivector(1, 0, 0, -1),
            densities={"euclidean": _euclidean_density(xyz, "dx^dy^dz")},
            patches={"unit-circle": unit_circle_patch(xyz)},
            annotations={
                "H1_vanishes": "the chart is all of 3-space, whose first homology vanishes",
                "orientable": "coordinate chart",
            },
            book_matrix=((F(1), F(0)), (F(0), F(-1))),
        )
    )
    theta_z = ("theta", "z")
    scenes.append(
        Scene(
            name="s2-log",
            summary="log-symplectic structure z dz^dtheta on the cylinder chart of 𝕊²",
            chart_names=theta_z,
            chart_periods=(TWO_PI, None),
            bivector=_bivector(theta_z, {(0, 1): "-z"}),
            densities={},
            patches={
                "N": point_patch("N", theta_z, ("0", "1/2")),
                "S": point_patch("S", theta_z, ("0", "-1/2")),
            },
            annotations={
                "is_log_symplectic": "the top power has coefficient z, vanishing transversally on the equator",
                "compact": "the scene models 𝕊²; the chart omits only the poles",
                "connected": "𝕊² is connected",
                "orientable": "𝕊² is orientable",
            },
        )
    )
    scenes.append(
        Scene(
            name="p2-log",
            summary="antipodal quotient of the 𝕊² log-symplectic structure; models ℙ² via its double cover",
            chart_names=theta_z,
            chart_periods=(TWO_PI, None),
            bivector=_bivector(theta_z, {(0, 1): "-z"}),
            densities={},
            patches={"P": point_patch("P", theta_z, ("0", "1/2"))},
            annotations={
                "compact": "ℙ² is compact",
                "connected": "ℙ² is connected",
            },
            deck=DeckMap(
                matrix=((F(1), F(0)), (F(0), F(-1))),
                shifts=(math.pi, None),
                note="antipodal deck transformation of the double cover 𝕊² over ℙ²",
            ),
        )
    )
    xy = ("x", "y")
    scenes.append(
        Scene(
            name="symplectic-r2",
            summary="standard symplectic plane",
            chart_names=xy,
            chart_periods=(None, None),
            bivector=_bivector(xy, {(0, 1): "1"}),
            densities={"euclidean": _euclidean_density(xy, "dx^dy")},
            patches={"origin": point_patch("origin", xy, ("0", "0"))},
            annotations={
                "orientable": "coordinate chart",
                "connected": "the plane is connected",
            },
        )
    )
    xypq = ("x", "y", "p", "q")
    scenes.append(
        Scene(
            name="symplectic-r4",
            summary="standard symplectic 4-space",
            chart_names=xypq,
            chart_periods=(None, None, None, None),
            bivector=_bivector(xypq, {(0, 1): "1", (2, 3): "1"}),
            densities={"euclidean": _euclidean_density(xypq, "dx^dy^dp^dq")},
            patches={"origin": point_patch("origin", xypq, ("0", "0", "0", "0"))},
            annotations={
                "orientable": "coordinate chart",
                "connected": "4-space is connected",
            },
        )
    )
    xyt = ("x", "y", "theta")
    scenes.append(
        Scene(
            name="product-r2xs1",
            summary="symplectic plane times a circle; the leaves are the planes",
            chart_names=xyt,
            chart_periods=(None, None, TWO_PI),
            bivector=_bivector(xyt, {(0, 1): "1"}),
            densities={"euclidean": _euclidean_density(xyt, "dx^dy^dtheta")},
            patches={"theta-circle": _theta_circle_patch()},
            annotations={
                "leaves_closed": "the leaves are the planes at fixed angle, which are closed",
                "orientable": "product of oriented factors",
            },
        )
    )
    scenes.append(
        Scene(
            name="reeb-s3",
            summary="Reeb foliation of 𝕊³ with leafwise area forms; annotation-only (no polynomial model)",
            chart_names=(),
            chart_periods=(),
            bivector=None,
            densities={},
            patches={},
            annotations={
                "compact": "𝕊³ is compact",
                "connected": "𝕊³ is connected",
                "orientable": "𝕊³ is orientable",
                "H1_vanishes": "H_1(𝕊³, ℝ) = 0",
                "regular_corank_one": "the Reeb foliation is by surfaces, so the structure is regular of corank one",
                "transversal_circles_exist": "the two central circles of the solid tori are transversal circles",
            },
        )
    )
    return scenes


def scene_names() -> List[str]:
    return [scene.name for scene in builtin_scenes()]


def get_scene(name: str) -> Scene:
    for scene in builtin_scenes():
        if scene.name == name:
            return scene
    known = ", ".join(scene_names())
    raise CatalogError(f"unknown scene {name!r}; built-in scenes: {known}")


# ---------------------------------------------------------------------------
# running every applicable check on a scene


@dataclass(frozen=True)
class SceneChecks:
    """Everything the rule table may consume, computed once per scene."""

    jacobi_ok: Optional[bool] = None
    jacobi_note: str = ""
    density_verdicts: Mapping[str, bool] = field(default_factory=dict)
    unimodular_certified: bool = False
    unimodular_witness: Optional[str] = None
    not_unimodular_certified: bool = False
    not_unimodular_note: str = ""
    log_symplectic: Optional[LogSymplecticReport] = None
    log_symplectic_certified: bool = False
    transversality: Mapping[str, TransversalityReport] = field(default_factory=dict)
    certificates: Mapping[str, HnptCertificate] = field(default_factory=dict)
    point_signs: Mapping[str, int] = field(default_factory=dict)
    deck_ok: Optional[bool] = None
    deck_note: str = ""
    deck_sign_flip: Optional[bool] = None
    flat_bundle: Optional["FlatBundleVerdict"] = None


def run_scene_checks(
    scene: Scene, tol: float = 1e-9, samples: Optional[int] = None
) -> SceneChecks:
    flat = (
        flat_bundle_check(scene.flat_bundle[0], scene.flat_bundle[1])
        if scene.flat_bundle is not None
        else None
    )
    if scene.bivector is None:
        return SceneChecks(flat_bundle=flat)

    verdict = jacobi_check(scene.bivector)
    if not verdict.ok:
        note = (
            f"self-bracket witness term {verdict.witness_key} -> "
            f"{verdict.witness_coeff.fmt(scene.chart_names)}"
        )
        return SceneChecks(jacobi_ok=False, jacobi_note=note, flat_bundle=flat)
    structure = PoissonStructure.from_bivector(scene.bivector, require=True)
    m = structure.chart_dim

    density_verdicts: Dict[str, bool] = {}
    witness: Optional[str] = None
    for name, density in scene.densities.items():
        ok = check_invariant_density(structure, density).ok
        density_verdicts[name] = ok
        if ok and witness is None:
            witness = name

    not_unimodular = False
    not_note = ""
    if scene.book_matrix is not None:
        trace = scene.book_matrix[0][0] + scene.book_matrix[1][1]
        if trace != 0:
            not_unimodular = True
            not_note = f"book matrix trace {trace} ≠ 0: no invariant density exists"

    point_values: Dict[str, Tuple[float, ...]] = {
        name: patch.evaluate(())
        for name, patch in scene.patches.items()
        if patch.dim == 0
    }

    log_report: Optional[LogSymplecticReport] = None
    log_certified = False
    if m % 2 == 0:
        log_report = log_symplectic_analysis(
            structure, witnesses=list(point_values.values()), tol=tol
        )
        log_certified = log_report.exact_certificate and not log_report.identically_zero

    transversality: Dict[str, TransversalityReport] = {}
    point_signs: Dict[str, int] = {}
    for name, patch in scene.patches.items():
        if patch.dim == 0:
            try:
                point_signs[name] = point_coorientation(
                    structure, point_values[name], tol=tol
                )
            except NotTransversalPointError:
                pass
        else:
            transversality[name] = transversality_check(
                structure, patch, samples=samples, tol=tol
            )

    certificates: Dict[str, HnptCertificate] = {}
    for dname, density in scene.densities.items():
        for pname, patch in scene.patches.items():
            if (m - patch.dim) % 2:
                continue
            certificates[f"{dname}:{pname}"] = hnpt_certificate(
                structure, density, patch, tol=tol, samples=samples
            )

    deck_ok: Optional[bool] = None
    deck_note = ""
    deck_flip: Optional[bool] = None
    if scene.deck is not None:
        report = deck_pushforward_check(structure, scene.deck)
        deck_ok = report.ok
        deck_note = report.note
        flips = []
        for name, sign in point_signs.items():
            image = scene.deck.image_point(point_values[name])
            try:
                flips.append(point_coorientation(structure, image, tol=tol) == -sign)
            except NotTransversalPointError:
                continue
        if flips:
            deck_flip = all(flips)

    return SceneChecks(
        jacobi_ok=True,
        density_verdicts=density_verdicts,
        unimodular_certified=witness is not None,
        unimodular_witness=witness,
        not_unimodular_certified=not_unimodular,
        not_unimodular_note=not_note,
        log_symplectic=log_report,
        log_symplectic_certified=log_certified,
        transversality=transversality,
        certificates=certificates,
        point_signs=point_signs,
        deck_ok=deck_ok,
        deck_note=deck_note,
        deck_sign_flip=deck_flip,
        flat_bundle=flat,
    )


# ---------------------------------------------------------------------------
# verdicts and the rule table

PROPERTIES = ("HNPT", "weak-HNPT", "transversal-nontrivial", "symplectic-realization")
STATUSES = ("holds", "fails", "inconclusive")


@dataclass(frozen=True)
class Verdict:
    property: str
    status: str
    rule: str
    citation: str
    detail: str = ""

    def __post_init__(self) -> None:
        if self.property not in PROPERTIES:
            raise CatalogError(f"unknown verdict property {self.property!r}")
        if self.status not in STATUSES:
            raise CatalogError(f"unknown verdict status {self.status!r}")
        if self.status != "inconclusive" and not (self.rule and self.citation):
            raise CatalogError(
                "every non-inconclusive verdict carries exactly one rule and citation"
            )


def _computed_circle(scene: Scene, checks: SceneChecks) -> Optional[str]:
    """Name of a declared closed 1-dimensional patch verified transversal."""
    for name, patch in scene.patches.items():
        report = checks.transversality.get(name)
        if (
            report is not None
            and report.is_transversal
            and patch.dim == 1
            and all(p.periodic for p in patch.params)
        ):
            return name
    return None


def verdict_engine(scene: Scene, checks: SceneChecks) -> List[Verdict]:
    """Forward-chain the fixed rule table; deterministic in scene order."""
    notes = scene.annotations
    verdicts: List[Verdict] = []

    if checks.unimodular_certified and checks.not_unimodular_certified:
        raise ContradictionError(
            f"scene {scene.name!r}: density {checks.unimodular_witness!r} is "
            f"certified invariant, but {checks.not_unimodular_note}"
        )
    if checks.unimodular_certified:
        for key, cert in checks.certificates.items():
            if cert.status == "failed":
                raise ContradictionError(
                    f"scene {scene.name!r}: density {checks.unimodular_witness!r} is "
                    f"certified invariant, yet the certificate for {key!r} failed "
                    f"({cert.failure_reason}); both cannot stand"
                )

    def fire(prop: str, status: str, rule: str, citation: str, detail: str) -> None:
        verdicts.append(Verdict(prop, status, rule, citation, detail))

    # --- HNPT rules -------------------------------------------------------
    if checks.unimodular_certified:
        fire(
            "HNPT",
            "holds",
            "Theorem 1",
            citations.THEOREM_1,
            f"density {checks.unimodular_witness!r} is exactly invariant",
        )
    if checks.jacobi_ok and "leaves_closed" in notes:
        fire(
            "HNPT",
            "holds",
            "Theorem 3",
            citations.THEOREM_3,
            f"declared: {notes['leaves_closed']}",
        )
    if "admits_surjective_proper_symplectic_realization" in notes:
        fire(
            "HNPT",
            "holds",
            "Corollary 1",
            citations.COROLLARY_1,
            f"declared: {notes['admits_surjective_proper_symplectic_realization']}",
        )
    if "H1_vanishes" in notes:
        circle = _computed_circle(scene, checks)
        if circle is not None:
            fire(
                "HNPT",
                "fails",
                "Example 1",
                citations.EXAMPLE_1,
                f"patch {circle!r} is a transversal circle and H_1 vanishes",
            )
        elif "transversal_circles_exist" in notes:
            fire(
                "HNPT",
                "fails",
                "Example 2",
                citations.EXAMPLE_2,
                f"declared: {notes['transversal_circles_exist']}; H_1 vanishes",
            )
    if "connected" in notes and len(checks.point_signs) >= 2:
        signs = sorted(checks.point_signs.items())
        positives = [n for n, s in signs if s > 0]
        negatives = [n for n, s in signs if s < 0]
        if positives and negatives:
            pair = sorted((positives[0], negatives[0]))
            fire(
                "HNPT",
                "fails",
                "Example 7",
                citations.EXAMPLE_7,
                f"[{pair[0]}] - [{pair[1]}] = 0: computed coorientation signs "
                f"{checks.point_signs[pair[0]]:+d} and {checks.point_signs[pair[1]]:+d}",
            )
    if checks.deck_ok and checks.deck_sign_flip:
        fire(
            "HNPT",
            "fails",
            "Example 8",
            citations.EXAMPLE_8,
            "the deck map preserves the bivector exactly and reverses the point "
            "coorientation, so the quotient's twisted 0-homology vanishes",
        )

    # --- weak-HNPT rules --------------------------------------------------
    log_annotation_only = (
        scene.bivector is None and "is_log_symplectic" in notes
    )
    if checks.log_symplectic_certified:
        fire(
            "weak-HNPT",
            "holds",
            "Theorem 4",
            citations.THEOREM_4,
            f"computed: {checks.log_symplectic.certificate_note}",
        )
    elif log_annotation_only:
        fire(
            "weak-HNPT",
            "holds",
            "Theorem 4",
            citations.THEOREM_4,
            f"declared: {notes['is_log_symplectic']}",
        )
    if checks.flat_bundle is not None and checks.flat_bundle.status == "fails":
        fire(
            "weak-HNPT",
            "fails",
            "Example 3",
            citations.EXAMPLE_3,
            checks.flat_bundle.reason,
        )

    # --- transversal-nontrivial rules --------------------------------------
    if (checks.log_symplectic_certified or log_annotation_only) and "orientable" in notes:
        fire(
            "transversal-nontrivial",
            "holds",
            "Theorem 5",
            citations.THEOREM_5,
            "log-symplectic with declared orientability: every compact connected "
            "nonempty transversal has nontrivial class",
        )
    if "meets_image_of_proper_hnpt_poisson_map" in notes:
        fire(
            "transversal-nontrivial",
            "holds",
            "Theorem 2",
            citations.THEOREM_2,
            f"declared: {notes['meets_image_of_proper_hnpt_poisson_map']}",
        )
    if "meets_closed_unimodular_submanifold" in notes:
        fire(
            "transversal-nontrivial",
            "holds",
            "Corollary 3",
            citations.COROLLARY_3,
            f"declared: {notes['meets_closed_unimodular_submanifold']}",
        )

    # --- symplectic-realization rule ---------------------------------------
    needed = ("regular_corank_one", "compact", "orientable", "H1_vanishes")
    if all(key in notes for key in needed):
        fire(
            "symplectic-realization",
            "fails",
            "Corollary 2",
            citations.COROLLARY_2,
            "declared: regular corank-one on a compact oriented manifold with "
            "vanishing first homology",
        )

    by_prop: Dict[str, List[Verdict]] = {}
    for v in verdicts:
        by_prop.setdefault(v.property, []).append(v)
    for prop, entries in by_prop.items():
        holds = [v for v in entries if v.status == "holds"]
        fails = [v for v in entries if v.status == "fails"]
        if holds and fails:
            raise ContradictionError(
                f"scene {scene.name!r}: contradictory verdicts for {prop}: "
                f"rule {holds[0].rule} ({holds[0].detail}) against "
                f"rule {fails[0].rule} ({fails[0].detail})"
            )
    for prop in ("HNPT", "weak-HNPT"):
        if prop not in by_prop:
            verdicts.append(
                Verdict(prop, "inconclusive", "", "", "no applicable rule fired")
            )
    return verdicts


def evaluate_scene(
    scene: Scene, tol: float = 1e-9, samples: Optional[int] = None
) -> Tuple[SceneChecks, List[Verdict]]:
    checks = run_scene_checks(scene, tol=tol, samples=samples)
    return checks, verdict_engine(scene, checks)


# ---------------------------------------------------------------------------
# the 3-d Lie-algebra classifier

CRITERION_NOTE = (
    "transverse circle exists exactly when the real parts of the eigenvalues "
    "of A are nonzero and share a sign; decided exactly as det(A) > 0 and "
    "tr(A) ≠ 0, avoiding floats"
)

_NAMED_SEMISIMPLE = ("so3", "sl2")


def _rational_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def _eigen_display(trace: Fraction, det: Fraction) -> str:
    disc = trace * trace - 4 * det
    half = Fraction(trace, 2)
    if disc == 0:
        return f"{half}, {half}"
    if disc > 0:
        root = _rational_sqrt(disc)
        if root is not None:
            return f"{half + root / 2}, {half - root / 2}"
        return f"({trace} +/- sqrt({disc}))/2"
    root = _rational_sqrt(-disc)
    if root is not None:
        return f"{half} +/- i*{root / 2}"
    return f"({trace} +/- i*sqrt({-disc}))/2"


@dataclass(frozen=True)
class Lie3Report:
    name: Optional[str]
    matrix: Optional[Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]]]
    trace: Optional[Fraction]
    det: Optional[Fraction]
    discriminant: Optional[Fraction]
    eigenvalues: str
    criterion_note: str
    transverse_circle: bool
    unimodular: bool
    degree0_basis_nonempty: bool
    circle_citation: str
    unimodular_citation: str
    structure: PoissonStructure
    circle_patch: Optional[Patch]
    circle_report: Optional[TransversalityReport]
    circle_cross_validated: Optional[bool]
    note: str


def classify_lie3(
    matrix: Optional[Sequence[Sequence]] = None,
    name: Optional[str] = None,
    tol: float = 1e-9,
    samples: Optional[int] = None,
) -> Lie3Report:
    """Classify a 3-d Lie-Poisson structure for circles and unimodularity.

    Give either a 2x2 rational ``matrix`` (the book structure it generates)
    or a ``name`` among "so3", "sl2", "heisenberg".
    """
    if (matrix is None) == (name is None):
        raise CatalogError("give exactly one of: a 2x2 matrix, or a name")
    if name is not None and name in _NAMED_SEMISIMPLE:
        algebra = so3_algebra() if name == "so3" else sl2_algebra()
        structure = lie_poisson(algebra)
        basis = solve_invariant_density(structure, 0)
        return Lie3Report(
            name=name,
            matrix=None,
            trace=None,
            det=None,
            discriminant=None,
            eigenvalues="not applicable (semisimple)",
            criterion_note=CRITERION_NOTE,
            transverse_circle=False,
            unimodular=True,
            degree0_basis_nonempty=bool(basis),
            circle_citation=citations.EXAMPLE_1_CIRCLE,
            unimodular_citation=citations.EXAMPLE_4,
            structure=structure,
            circle_patch=None,
            circle_report=None,
            circle_cross_validated=None,
            note="semisimple: no transverse circles; unimodular",
        )
    if name is not None:
        if name != "heisenberg":
            raise CatalogError(
                f"unknown name {name!r}; named algebras: so3, sl2, heisenberg"
            )
        rows = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)))
    else:
        if len(matrix) != 2 or any(len(row) != 2 for row in matrix):
            raise CatalogError("the book matrix must be 2x2")
        rows = tuple(tuple(_fraction(x) for x in row) for row in matrix)
    (a, b), (c, d) = rows
    structure = lie_poisson(book_algebra(a, b, c, d))
    trace, det = a + d, a * d - b * c
    disc = trace * trace - 4 * det
    circle_exists = det > 0 and trace != 0
    unimodular = trace == 0
    basis = solve_invariant_density(structure, 0)

    patch = unit_circle_patch()
    report = transversality_check(structure, patch, samples=samples, tol=tol)
    cross = report.is_transversal == circle_exists
    note = ""
    if circle_exists and not report.is_transversal:
        note = (
            "the criterion guarantees an adapted transverse circle; the round "
            "unit circle is not itself transverse for this matrix"
        )
    elif circle_exists:
        note = "round unit circle verified transverse"
    else:
        note = "no transverse circle exists for this matrix"
    return Lie3Report(
        name=name,
        matrix=rows,
        trace=trace,
        det=det,
        discriminant=disc,
        eigenvalues=_eigen_display(trace, det),
        criterion_note=CRITERION_NOTE,
        transverse_circle=circle_exists,
        unimodular=unimodular,
        degree0_basis_nonempty=bool(basis),
        circle_citation=citations.EXAMPLE_1_CIRCLE,
        unimodular_citation=citations.EXAMPLE_4,
        structure=structure,
        circle_patch=patch,
        circle_report=report,
        circle_cross_validated=cross,
        note=note,
    )


# ---------------------------------------------------------------------------
# the flat-bundle arithmetic check


@dataclass(frozen=True)
class FlatBundleVerdict:
    genus: int
    chern: int
    bound: int
    applies: bool
    status: str  # "fails" (weak HNPT fails) | "inconclusive"
    reason: str
    citation: str


def flat_bundle_check(genus: int, chern: int) -> FlatBundleVerdict:
    """Circle bundle over a genus-g surface with nonzero Euler/Chern pairing.

    When 0 < |n| <= 2(g-1) the bundle admits a transverse foliation and the
    pulled-back leafwise symplectic class is exact, so the weak HNPT property
    fails for the induced Poisson structure.
    """
    if not isinstance(genus, int) or isinstance(genus, bool) or genus < 2:
        raise ValueError("the genus must be an integer >= 2")
    if not isinstance(chern, int) or isinstance(chern, bool):
        raise ValueError("the pairing ⟨c, [Σ]⟩ must be an integer")
    bound = 2 * (genus - 1)
    if 0 < abs(chern) <= bound:
        return FlatBundleVerdict(
            genus,
            chern,
            bound,
            applies=True,
            status="fails",
            reason=(
                f"0 < |{chern}| ≤ {bound}: transverse foliation exists (Wood [33]); "
                "ϱ^*(ω^top) exact; weak HNPT fails"
            ),
            citation=citations.EXAMPLE_3,
        )
    if chern == 0:
        reason = "inconclusive: the pairing ⟨c, [Σ]⟩ vanishes; the criterion needs 0 < |⟨c, [Σ]⟩|"
    else:
        reason = (
            f"inconclusive: |⟨c, [Σ]⟩| = {abs(chern)} exceeds 2(g-1) = {bound}; "
            "no transverse foliation is guaranteed"
        )
    return FlatBundleVerdict(
        genus, chern, bound, applies=False, status="inconclusive", reason=reason, citation=""
    )
