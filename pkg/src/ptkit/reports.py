"""Command layer: every user-facing command as a pure function.

Each ``run_*`` function takes domain objects plus tolerances and returns a
:class:`CommandResult` holding the human report, the machine payload, and the
exit code.  The CLI and the HTTP service are both thin clients of this module;
neither adds logic of its own.

Output contract (golden-tested):
  - byte-stable text for fixed inputs and flags;
  - floats printed to 12 significant digits, exact rationals as ``p/q``;
  - a fenced JSON machine block appended after the text report;
  - exit codes: 0 = all asserted properties hold, 1 = a checked property
    fails, 2 = input error, 3 = inconclusive only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import citations
from .catalog import (
    CATALOG_VERSION,
    Lie3Report,
    PROPERTIES,
    Scene,
    SceneChecks,
    Verdict,
    builtin_scenes,
    classify_lie3,
    evaluate_scene,
)
from .dirac import (
    LinearDirac,
    PullbackResult,
    PushforwardResult,
    TransversalConditions,
    backward_pullback,
    cospinor_line,
    forward_pushforward,
    spinor_line,
    transversal_conditions,
)
from .poisson import (
    Density,
    check_invariant_density,
    jacobi_check,
    modular_chain,
    solve_invariant_density,
)
from .calculus import interior_product, multivector_power
from .transversal import (
    HnptCertificate,
    NotTransversalPointError,
    PairResult,
    Patch,
    pair,
    point_coorientation,
    transversality_check,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_INCONCLUSIVE = 3


class CommandError(ValueError):
    """A user-input problem; callers report it and exit with code 2."""


@dataclass(frozen=True)
class CommandResult:
    text: str
    machine: dict
    exit_code: int

    @property
    def machine_json(self) -> str:
        return json.dumps(self.machine, indent=2, sort_keys=True, ensure_ascii=False)


def fnum(x: float) -> str:
    return f"{x:.12g}"


def frac(x: Fraction) -> str:
    return str(x)


def _finish(lines: List[str], machine: dict, exit_code: int) -> CommandResult:
    machine = dict(machine)
    machine["exit_code"] = exit_code
    body = "\n".join(lines)
    block = json.dumps(machine, indent=2, sort_keys=True, ensure_ascii=False)
    text = f"{body}\n\n```json\n{block}\n```\n"
    return CommandResult(text=text, machine=machine, exit_code=exit_code)


def _scene_header(scene: Scene) -> List[str]:
    lines = []
    if scene.summary:
        lines.append(f"summary: {scene.summary}")
    if scene.chart_names:
        lines.append(f"chart: ({', '.join(scene.chart_names)})")
        if scene.bivector is not None:
            lines.append(f"bivector: {scene.bivector.fmt(scene.chart_names)}")
    else:
        lines.append("chart: (annotation-only scene)")
    return lines


def _get_patch(scene: Scene, patch_name: Optional[str]) -> Patch:
    if not scene.patches:
        raise CommandError(f"scene {scene.name!r} has no patches")
    if patch_name is None:
        if len(scene.patches) == 1:
            return next(iter(scene.patches.values()))
        raise CommandError(
            f"scene {scene.name!r} has several patches; pick one of: "
            + ", ".join(sorted(scene.patches))
        )
    try:
        return scene.patches[patch_name]
    except KeyError:
        raise CommandError(
            f"scene {scene.name!r} has no patch {patch_name!r}; available: "
            + ", ".join(sorted(scene.patches))
        ) from None


def _get_density(scene: Scene, density_name: str) -> Density:
    try:
        return scene.densities[density_name]
    except KeyError:
        available = ", ".join(sorted(scene.densities)) or "(none)"
        raise CommandError(
            f"scene {scene.name!r} has no density {density_name!r}; available: "
            + available
        ) from None


# ---------------------------------------------------------------------------
# verify


def run_verify(scene: Scene, tol: float = 1e-9) -> CommandResult:
    structure = scene.structure()
    verdict = jacobi_check(structure.bivector)
    lines = [f"verify: {scene.name}"]
    lines += _scene_header(scene)
    machine: dict = {"command": "verify", "scene": scene.name, "poisson": verdict.ok}
    if verdict.ok:
        lines.append("[pi, pi] = 0: the bivector is Poisson")
        machine["witness"] = None
        code = EXIT_OK
    else:
        coeff = verdict.witness_coeff.fmt(scene.chart_names)
        basis = "^".join(f"D{scene.chart_names[i]}" for i in verdict.witness_key)
        lines.append(f"[pi, pi] != 0: witness term ({coeff}) {basis}")
        machine["witness"] = {"indices": list(verdict.witness_key), "coeff": coeff}
        code = EXIT_FAIL
    return _finish(lines, machine, code)


# ---------------------------------------------------------------------------
# unimodular


def run_unimodular(
    scene: Scene,
    degree: Optional[int] = None,
    density: Optional[str] = None,
    tol: float = 1e-9,
) -> CommandResult:
    if (degree is None) == (density is None):
        raise CommandError("give exactly one of --degree D or --density NAME")
    structure = scene.structure()
    names = scene.chart_names

    if density is not None:
        chosen = _get_density(scene, density)
        verdict = check_invariant_density(structure, chosen)
        lines = [f"unimodular: {scene.name}, density {density}"]
        lines += _scene_header(scene)
        lines.append(f"density: {chosen.top_form.fmt(names)}")
        chain = modular_chain(structure, chosen)
        machine = {
            "command": "unimodular",
            "scene": scene.name,
            "mode": "density",
            "density": density,
            "invariant": verdict.ok,
            "chain": [
                {
                    "power": entry.power,
                    "closed": entry.is_closed,
                    "form": entry.form.fmt(names),
                }
                for entry in chain
            ],
        }
        if verdict.ok:
            lines.append(
                "d iota_pi mu = 0: the density is invariant; the pair is unimodular"
            )
        else:
            lines.append(
                f"d iota_pi mu = {verdict.defect.fmt(names)}: the density is not invariant"
            )
        lines.append("modular chain (iota_{pi^k} mu and its closedness):")
        for entry in chain:
            flag = "closed    " if entry.is_closed else "not closed"
            lines.append(f"  k={entry.power}: {flag} {entry.form.fmt(names)}")
        machine["verdict"] = "unimodular" if verdict.ok else "not-unimodular"
        return _finish(lines, machine, EXIT_OK if verdict.ok else EXIT_FAIL)

    if degree < 0:
        raise CommandError("--degree must be a nonnegative integer")
    basis = solve_invariant_density(structure, degree)
    lines = [f"unimodular: {scene.name}, polynomial densities up to degree {degree}"]
    lines += _scene_header(scene)
    machine = {
        "command": "unimodular",
        "scene": scene.name,
        "mode": "degree",
        "degree": degree,
        "basis": [g.fmt(names) for g in basis],
    }
    if basis:
        lines.append("basis of invariant-density coefficients g (d iota_pi (g Omega) = 0):")
        for g in basis:
            lines.append(f"  g = {g.fmt(names)}")
        lines.append("verdict: unimodular (invariant polynomial density found)")
        machine["verdict"] = "unimodular"
        return _finish(lines, machine, EXIT_OK)
    lines.append("basis of invariant-density coefficients: (empty)")
    if scene.book_matrix is not None:
        trace = scene.book_matrix[0][0] + scene.book_matrix[1][1]
        if trace != 0:
            lines.append(
                f"verdict: not unimodular (tr ≠ 0): the book matrix has trace {frac(trace)}"
            )
            lines.append(f'cite: "{citations.EXAMPLE_4}"')
            machine["verdict"] = "not-unimodular"
            machine["trace"] = frac(trace)
            machine["citation"] = citations.EXAMPLE_4
            return _finish(lines, machine, EXIT_FAIL)
    lines.append(
        f"verdict: none up to degree {degree} (the search bounds only this "
        "polynomial stratum; it is not a proof)"
    )
    machine["verdict"] = "inconclusive"
    return _finish(lines, machine, EXIT_INCONCLUSIVE)


# ---------------------------------------------------------------------------
# transversal


def run_transversal(
    scene: Scene,
    patch_name: Optional[str] = None,
    tol: float = 1e-9,
    samples: Optional[int] = None,
) -> CommandResult:
    structure = scene.structure()
    patch = _get_patch(scene, patch_name)
    lines = [f"transversal: {scene.name}, patch {patch.name}"]
    lines += _scene_header(scene)
    machine: dict = {
        "command": "transversal",
        "scene": scene.name,
        "patch": patch.name,
    }

    if patch.dim == 0:
        point = patch.evaluate(())
        lines.append(f"point patch at ({', '.join(fnum(x) for x in point)})")
        machine["kind"] = "point"
        machine["point"] = [float(x) for x in point]
        try:
            sign = point_coorientation(structure, point, tol=tol)
        except NotTransversalPointError as exc:
            lines.append(f"not transversal: {exc}")
            machine["is_transversal"] = False
            machine["sign"] = 0
            return _finish(lines, machine, EXIT_FAIL)
        lines.append(
            "the point lies in the open symplectic locus; canonical "
            f"coorientation sign {'+' if sign > 0 else '-'}"
        )
        machine["is_transversal"] = True
        machine["sign"] = sign
        return _finish(lines, machine, EXIT_OK)

    report = transversality_check(structure, patch, tol=tol, samples=samples)
    q = report.codim // 2
    lines.append(f"patch dimension {patch.dim}, codimension {report.codim} (q = {q})")
    machine.update(
        {
            "kind": "patch",
            "codim": report.codim,
            "patch_valid": report.patch_valid,
            "samples": len(report.determinant_samples),
            "min_abs": report.min_abs,
            "sign_constant": report.sign_constant,
            "sign": report.sign,
            "is_transversal": report.is_transversal,
        }
    )
    if not report.patch_valid:
        witness = report.immersion_witness
        where = f" at ({', '.join(fnum(x) for x in witness)})" if witness else ""
        lines.append(f"the patch is not an immersion{where}")
        return _finish(lines, machine, EXIT_FAIL)
    lines.append(
        f"samples: {len(report.determinant_samples)}; min |det| = {fnum(report.min_abs)}; "
        f"sign constant: {'yes' if report.sign_constant else 'no'}"
    )
    if report.is_transversal:
        lines.append(
            "the patch is a Poisson transversal; canonical coorientation sign "
            f"{'+' if report.sign > 0 else '-'}"
        )
        return _finish(lines, machine, EXIT_OK)
    worst = min(report.determinant_samples, key=lambda item: abs(item[1]))
    lines.append(
        "not transversal: the coorientation determinant vanishes or changes "
        f"sign (value {fnum(worst[1])} at ({', '.join(fnum(x) for x in worst[0])}))"
    )
    return _finish(lines, machine, EXIT_FAIL)


# ---------------------------------------------------------------------------
# pair


def _auto_density(scene: Scene) -> Tuple[str, Density]:
    if not scene.densities:
        raise CommandError(
            f"scene {scene.name!r} has no densities; --form auto needs one"
        )
    structure = scene.structure()
    for name, density in scene.densities.items():
        if check_invariant_density(structure, density).ok:
            return name, density
    name = next(iter(scene.densities))
    return name, scene.densities[name]


def run_pair(
    scene: Scene,
    patch_name: Optional[str] = None,
    form: str = "auto",
    tol: float = 1e-9,
    samples: Optional[int] = None,
) -> CommandResult:
    structure = scene.structure()
    patch = _get_patch(scene, patch_name)
    machine: dict = {"command": "pair", "scene": scene.name, "patch": patch.name}

    if form == "auto":
        density_name, density = _auto_density(scene)
        lines = [
            f"pair: {scene.name}, patch {patch.name}, form auto "
            f"(iota_{{pi^q}} mu with mu = {density_name})"
        ]
        lines += _scene_header(scene)
        cert = hnpt_certificate_or_error(structure, density, patch, tol, samples)
        machine.update(
            {
                "form": "auto",
                "density": density_name,
                "status": cert.status,
                "failure_reason": cert.failure_reason,
                "q": cert.q,
                "orientation_sign": cert.orientation_sign,
                "raw_integral": cert.raw_integral,
                "pairing": cert.pairing,
                "integrand_min": cert.integrand_min,
                "integrand_positive": cert.integrand_positive,
                "verdict": cert.verdict,
                "citation": cert.citation,
            }
        )
        lines.append(f"status: {cert.status}")
        if cert.status == "certified":
            lines.append(
                f"q = {cert.q}; coorientation sign "
                f"{'+' if cert.orientation_sign > 0 else '-'}"
            )
            lines.append(
                f"raw integral = {fnum(cert.raw_integral)}; "
                f"pairing = {fnum(cert.pairing)}"
            )
            lines.append(
                f"integrand minimum over samples = {fnum(cert.integrand_min)} > 0"
            )
            lines.append(f"verdict: {cert.verdict}")
            lines.append(f'cite: "{cert.citation}"')
            return _finish(lines, machine, EXIT_OK)
        lines.append(f"reason: {cert.failure_reason}")
        if cert.integrand_min is not None:
            lines.append(
                f"integrand minimum over samples = {fnum(cert.integrand_min)}"
            )
        return _finish(lines, machine, EXIT_FAIL)

    density = _get_density(scene, form)
    codim = len(scene.chart_names) - patch.dim
    if codim < 0 or codim % 2:
        raise CommandError(
            f"patch {patch.name!r} has odd codimension {codim}; pairing needs "
            "an even-codimension patch"
        )
    q = codim // 2
    alpha = interior_product(multivector_power(structure.bivector, q), density.top_form)
    result = pair(alpha, patch, tol=tol, samples=samples)
    lines = [
        f"pair: {scene.name}, patch {patch.name}, form {form} "
        f"(raw integral of iota_{{pi^{q}}} mu)"
    ]
    lines += _scene_header(scene)
    lines.append(f"integrand: {alpha.fmt(scene.chart_names)}")
    lines.append(
        f"value = {fnum(result.value)} (nodes: "
        + ", ".join(str(n) for n in result.nodes)
        + ")"
    )
    lines.append(f"closed form: {'yes' if result.closed else 'no'}")
    if result.warning:
        lines.append(f"warning: {result.warning}")
    machine.update(
        {
            "form": form,
            "q": q,
            "value": result.value,
            "closed": result.closed,
            "converged": result.converged,
            "nodes": list(result.nodes),
            "warning": result.warning,
        }
    )
    return _finish(lines, machine, EXIT_OK if result.converged else EXIT_INCONCLUSIVE)


def hnpt_certificate_or_error(structure, density, patch, tol, samples) -> HnptCertificate:
    from .transversal import hnpt_certificate

    try:
        return hnpt_certificate(structure, density, patch, tol=tol, samples=samples)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc


# ---------------------------------------------------------------------------
# report


_PROPERTY_LABELS = {
    "HNPT": "HNPT",
    "weak-HNPT": "weak HNPT",
    "transversal-nontrivial": "transversal class nontrivial",
    "symplectic-realization": "proper symplectic realizations",
}


def headline(verdicts: Sequence[Verdict]) -> str:
    parts: List[str] = []
    for prop in PROPERTIES:
        for verdict in verdicts:
            if verdict.property != prop or verdict.status == "inconclusive":
                continue
            part = f"{_PROPERTY_LABELS[prop]} {verdict.status}"
            if verdict.rule.startswith(("Theorem", "Corollary")):
                part += f" ({verdict.rule})"
            parts.append(part)
            break
    if not parts:
        return "all checked properties inconclusive"
    return "; ".join(parts)


def _checks_lines(scene: Scene, checks: SceneChecks) -> List[str]:
    names = scene.chart_names
    lines = ["checks:"]
    if checks.jacobi_ok is None:
        lines.append("  jacobi: (no bivector to check)")
    elif checks.jacobi_ok:
        lines.append("  jacobi: [pi, pi] = 0")
    else:
        lines.append(f"  jacobi: fails ({checks.jacobi_note})")
    for name in checks.density_verdicts:
        ok = checks.density_verdicts[name]
        lines.append(
            f"  density {name}: {'invariant' if ok else 'not invariant'}"
        )
    if checks.not_unimodular_certified:
        lines.append(f"  book criterion: {checks.not_unimodular_note}")
    if checks.log_symplectic is not None:
        report = checks.log_symplectic
        if checks.log_symplectic_certified:
            lines.append(
                "  log-symplectic: certified (top coefficient "
                f"{report.top_coefficient.fmt(names)}; {report.certificate_note})"
            )
        elif report.identically_zero:
            lines.append("  log-symplectic: no (top power vanishes identically)")
        else:
            lines.append(
                "  log-symplectic: not certified "
                f"(top coefficient {report.top_coefficient.fmt(names)})"
            )
    for name, report in checks.transversality.items():
        verdict = "transversal" if report.is_transversal else "not transversal"
        sign = {1: "+", -1: "-", 0: "0"}[report.sign]
        lines.append(
            f"  patch {name}: {verdict} (min |det| = {fnum(report.min_abs)}, "
            f"sign {sign}, constant: {'yes' if report.sign_constant else 'no'})"
        )
    for name, sign in checks.point_signs.items():
        lines.append(
            f"  point {name}: coorientation {'+' if sign > 0 else '-'}"
        )
    for key, cert in checks.certificates.items():
        if cert.status == "certified":
            lines.append(
                f"  certificate {key}: certified (pairing {fnum(cert.pairing)})"
            )
        else:
            lines.append(
                f"  certificate {key}: {cert.status} ({cert.failure_reason})"
            )
    if checks.deck_ok is not None:
        lines.append(
            f"  deck map: {'exactly invariant' if checks.deck_ok else checks.deck_note}"
        )
        if checks.deck_sign_flip is not None:
            lines.append(
                "  deck action on coorientations: "
                + ("flips every point sign" if checks.deck_sign_flip else "preserves signs")
            )
    if checks.flat_bundle is not None:
        fb = checks.flat_bundle
        lines.append(
            f"  flat bundle (genus {fb.genus}, pairing {fb.chern}): {fb.reason}"
        )
    if scene.annotations:
        lines.append(
            "  annotations: " + ", ".join(sorted(scene.annotations))
        )
    return lines


def _machine_checks(checks: SceneChecks) -> dict:
    payload: dict = {
        "jacobi_ok": checks.jacobi_ok,
        "densities": dict(checks.density_verdicts),
        "unimodular_certified": checks.unimodular_certified,
        "unimodular_witness": checks.unimodular_witness,
        "not_unimodular_certified": checks.not_unimodular_certified,
        "log_symplectic_certified": checks.log_symplectic_certified,
        "transversality": {
            name: report.is_transversal
            for name, report in checks.transversality.items()
        },
        "point_signs": dict(checks.point_signs),
        "certificates": {
            key: cert.status for key, cert in checks.certificates.items()
        },
        "deck_ok": checks.deck_ok,
        "deck_sign_flip": checks.deck_sign_flip,
    }
    if checks.flat_bundle is not None:
        payload["flat_bundle"] = {
            "genus": checks.flat_bundle.genus,
            "chern": checks.flat_bundle.chern,
            "status": checks.flat_bundle.status,
        }
    return payload


def run_report(
    scene: Scene, tol: float = 1e-9, samples: Optional[int] = None
) -> CommandResult:
    checks, verdicts = evaluate_scene(scene, tol=tol, samples=samples)
    head = headline(verdicts)
    lines = [f"report: {scene.name}"]
    lines += _scene_header(scene)
    lines.append("")
    lines.append(f"headline: {head}")
    lines.append("")
    lines += _checks_lines(scene, checks)
    lines.append("")
    lines.append("verdicts:")
    for verdict in verdicts:
        label = _PROPERTY_LABELS[verdict.property]
        if verdict.status == "inconclusive":
            lines.append(f"  - {label}: inconclusive")
            if verdict.detail:
                lines.append(f"      {verdict.detail}")
            continue
        lines.append(f"  - {label} {verdict.status} [{verdict.rule}]")
        if verdict.detail:
            lines.append(f"      {verdict.detail}")
        lines.append(f'      cite: "{verdict.citation}"')
    machine = {
        "command": "report",
        "scene": scene.name,
        "headline": head,
        "checks": _machine_checks(checks),
        "verdicts": [
            {
                "property": v.property,
                "status": v.status,
                "rule": v.rule or None,
                "citation": v.citation or None,
                "detail": v.detail or None,
            }
            for v in verdicts
        ],
    }
    statuses = {v.status for v in verdicts}
    if "fails" in statuses:
        code = EXIT_FAIL
    elif "holds" in statuses:
        code = EXIT_OK
    else:
        code = EXIT_INCONCLUSIVE
    return _finish(lines, machine, code)


# ---------------------------------------------------------------------------
# dirac


def parse_matrix(text: str, what: str = "matrix") -> List[List[Fraction]]:
    """Parse an inline rational matrix: rows split by ';', entries by ','."""
    rows: List[List[Fraction]] = []
    for row_text in text.strip().split(";"):
        row: List[Fraction] = []
        for entry in row_text.strip().split(","):
            entry = entry.strip()
            if not entry:
                raise CommandError(f"{what}: empty entry in {text!r}")
            try:
                row.append(Fraction(entry))
            except (ValueError, ZeroDivisionError):
                raise CommandError(
                    f"{what}: bad rational entry {entry!r} (use integers or p/q)"
                ) from None
        rows.append(row)
    if not rows or any(len(row) != len(rows[0]) for row in rows):
        raise CommandError(f"{what}: rows must all have the same length")
    return rows


def build_dirac(
    rows: Optional[str] = None,
    bivector: Optional[str] = None,
    two_form: Optional[str] = None,
    tangent: Optional[int] = None,
    cotangent: Optional[int] = None,
) -> Tuple[LinearDirac, str]:
    """Build a Lagrangian from exactly one of the five input forms."""
    given = [
        value
        for value in (rows, bivector, two_form, tangent, cotangent)
        if value is not None
    ]
    if len(given) != 1:
        raise CommandError(
            "give exactly one of --rows, --bivector, --two-form, --tangent N, "
            "--cotangent N"
        )
    try:
        if rows is not None:
            mat = parse_matrix(rows, "--rows")
            if len(mat[0]) % 2:
                raise CommandError("--rows: need n rows of length 2n")
            return LinearDirac(len(mat[0]) // 2, tuple(tuple(r) for r in mat)), "rows"
        if bivector is not None:
            return (
                LinearDirac.graph_of_bivector(parse_matrix(bivector, "--bivector")),
                "graph of bivector",
            )
        if two_form is not None:
            return (
                LinearDirac.graph_of_two_form(parse_matrix(two_form, "--two-form")),
                "graph of two-form",
            )
        if tangent is not None:
            return LinearDirac.tangent(tangent), "tangent space"
        return LinearDirac.cotangent(cotangent), "cotangent space"
    except CommandError:
        raise
    except ValueError as exc:
        raise CommandError(str(exc)) from exc


def _matrix_lines(rows: Sequence[Sequence[Fraction]], indent: str = "  ") -> List[str]:
    return [indent + "[" + ", ".join(frac(x) for x in row) + "]" for row in rows]


def _matrix_machine(rows: Sequence[Sequence[Fraction]]) -> List[List[str]]:
    return [[frac(x) for x in row] for row in rows]


def run_dirac_spinor(dirac: LinearDirac, source: str, cospinor: bool = False) -> CommandResult:
    kind = "cospinor" if cospinor else "spinor"
    line = cospinor_line(dirac) if cospinor else spinor_line(dirac)
    lines = [f"dirac {kind}: {source} in dimension {dirac.n}"]
    lines.append("Lagrangian basis rows (V-part | V*-part):")
    lines += _matrix_lines(dirac.rows)
    lines.append(f"{kind} line: {line.fmt()}")
    machine = {
        "command": "dirac",
        "op": kind,
        "n": dirac.n,
        "rows": _matrix_machine(dirac.rows),
        "line": line.fmt(),
    }
    return _finish(lines, machine, EXIT_OK)


def run_dirac_pullback(dirac: LinearDirac, matrix_text: str, source: str) -> CommandResult:
    matrix = parse_matrix(matrix_text, "--map")
    try:
        result: PullbackResult = backward_pullback(dirac, matrix)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    lines = [f"dirac pullback: {source} along a map with matrix"]
    lines += _matrix_lines(matrix)
    lines.append("pulled-back Lagrangian basis rows:")
    lines += _matrix_lines(result.dirac.rows)
    lines.append(
        "transversality (ker f^* cap L = 0): "
        + ("holds" if result.transversal else "fails")
    )
    if result.transversal:
        lines.append(
            "spinor transported: "
            + ("verified" if result.spinor_transported else "not verified")
        )
        lines.append(f"spinor line: {spinor_line(result.dirac).fmt()}")
    machine = {
        "command": "dirac",
        "op": "pullback",
        "map": _matrix_machine([[Fraction(x) for x in row] for row in matrix]),
        "rows": _matrix_machine(result.dirac.rows),
        "transversal": result.transversal,
        "spinor_transported": result.spinor_transported,
    }
    return _finish(lines, machine, EXIT_OK if result.transversal else EXIT_FAIL)


def run_dirac_pushforward(dirac: LinearDirac, matrix_text: str, source: str) -> CommandResult:
    matrix = parse_matrix(matrix_text, "--map")
    try:
        result: PushforwardResult = forward_pushforward(dirac, matrix)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    lines = [f"dirac pushforward: {source} along a map with matrix"]
    lines += _matrix_lines(matrix)
    lines.append("pushed-forward Lagrangian basis rows:")
    lines += _matrix_lines(result.dirac.rows)
    lines.append(
        "strong condition (ker f_* cap L = 0): "
        + ("holds" if result.strong else "fails")
    )
    lines.append("the map is " + ("surjective" if result.surjective else "not surjective"))
    if result.strong:
        lines.append(
            "co-spinor transported: "
            + ("verified" if result.cospinor_transported else "not verified")
        )
        if result.surjective:
            lines.append(
                "kernel contraction solved as a pullback spinor: "
                + ("verified" if result.kernel_spinor_checked else "not verified")
            )
    machine = {
        "command": "dirac",
        "op": "pushforward",
        "map": _matrix_machine([[Fraction(x) for x in row] for row in matrix]),
        "rows": _matrix_machine(result.dirac.rows),
        "strong": result.strong,
        "surjective": result.surjective,
        "cospinor_transported": result.cospinor_transported,
        "kernel_spinor_checked": result.kernel_spinor_checked,
    }
    return _finish(lines, machine, EXIT_OK if result.strong else EXIT_FAIL)


def run_dirac_conditions(dirac: LinearDirac, subspace_text: str, source: str) -> CommandResult:
    subspace = parse_matrix(subspace_text, "--subspace")
    try:
        conditions: TransversalConditions = transversal_conditions(dirac, subspace)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    lines = [f"dirac conditions: {source}, subspace basis rows"]
    lines += _matrix_lines(subspace)
    lines.append(f"codimension q = {conditions.codim}")
    lines.append(
        f"(b) (X (+) ann X) cap L = 0: {'holds' if conditions.b else 'fails'}"
    )
    lines.append(
        f"(c) top coefficient of the restricted spinor nonzero: "
        f"{'holds' if conditions.c else 'fails'}"
    )
    lines.append(
        f"(d) co-spinor projects onto the top power of V/X: "
        f"{'holds' if conditions.d else 'fails'}"
    )
    lines.append(f"conditions agree: {'yes' if conditions.agree else 'NO'}")
    lines.append(
        "the subspace is "
        + ("a linear Poisson transversal" if conditions.all_hold else "not transversal")
    )
    machine = {
        "command": "dirac",
        "op": "conditions",
        "subspace": _matrix_machine([[Fraction(x) for x in row] for row in subspace]),
        "b": conditions.b,
        "c": conditions.c,
        "d": conditions.d,
        "codim": conditions.codim,
        "agree": conditions.agree,
        "all_hold": conditions.all_hold,
    }
    return _finish(lines, machine, EXIT_OK if conditions.all_hold else EXIT_FAIL)


# ---------------------------------------------------------------------------
# classify-lie3


def run_classify_lie3(
    matrix: Optional[str] = None,
    name: Optional[str] = None,
    tol: float = 1e-9,
    samples: Optional[int] = None,
) -> CommandResult:
    parsed: Optional[List[List[Fraction]]] = None
    if matrix is not None:
        entries = matrix.replace(";", ",").split(",")
        if len(entries) != 4:
            raise CommandError("--matrix wants four rational entries: a,b,c,d")
        flat = []
        for entry in entries:
            entry = entry.strip()
            try:
                flat.append(Fraction(entry))
            except (ValueError, ZeroDivisionError):
                raise CommandError(
                    f"--matrix: bad rational entry {entry!r} (use integers or p/q)"
                ) from None
        parsed = [[flat[0], flat[1]], [flat[2], flat[3]]]
    try:
        report: Lie3Report = classify_lie3(
            matrix=parsed, name=name, tol=tol, samples=samples
        )
    except ValueError as exc:
        raise CommandError(str(exc)) from exc

    if report.name is not None:
        lines = [f"classify-lie3: {report.name}"]
    else:
        lines = ["classify-lie3: book matrix"]
        lines += _matrix_lines(report.matrix)
    lines.append(f"structure: {report.structure.bivector.fmt(('x', 'y', 'z'))}")
    machine: dict = {
        "command": "classify-lie3",
        "name": report.name,
        "matrix": _matrix_machine(report.matrix) if report.matrix is not None else None,
        "eigenvalues": report.eigenvalues,
        "transverse_circle": report.transverse_circle,
        "unimodular": report.unimodular,
        "degree0_basis_nonempty": report.degree0_basis_nonempty,
        "circle_cross_validated": report.circle_cross_validated,
    }
    if report.trace is not None:
        lines.append(
            f"trace = {frac(report.trace)}, det = {frac(report.det)}, "
            f"discriminant = {frac(report.discriminant)}"
        )
        machine["trace"] = frac(report.trace)
        machine["det"] = frac(report.det)
        machine["discriminant"] = frac(report.discriminant)
    lines.append(f"eigenvalues: {report.eigenvalues}")
    lines.append(
        f"transverse circle: {'yes' if report.transverse_circle else 'no'}"
        + (f" — {report.note}" if report.note else "")
    )
    if report.criterion_note:
        lines.append(f"  criterion: {report.criterion_note}")
    lines.append(f'  cite: "{report.circle_citation}"')
    if report.circle_report is not None:
        lines.append(
            "  round unit circle check: "
            + ("transversal" if report.circle_report.is_transversal else "not transversal")
            + f" (min |det| = {fnum(report.circle_report.min_abs)})"
        )
        machine["circle_is_transversal"] = report.circle_report.is_transversal
    lines.append(
        f"unimodular: {'yes' if report.unimodular else 'no'} "
        f"(degree-0 invariant densities: "
        f"{'nonempty' if report.degree0_basis_nonempty else 'none'})"
    )
    lines.append(f'  cite: "{report.unimodular_citation}"')
    machine["circle_citation"] = report.circle_citation
    machine["unimodular_citation"] = report.unimodular_citation
    machine["note"] = report.note
    return _finish(lines, machine, EXIT_OK)


# ---------------------------------------------------------------------------
# scenes


def run_scenes() -> CommandResult:
    scenes = builtin_scenes()
    width = max(len(scene.name) for scene in scenes)
    lines = [f"builtin scenes (catalog {CATALOG_VERSION}):"]
    for scene in scenes:
        lines.append(f"  {scene.name.ljust(width)}  {scene.summary}")
    machine = {
        "command": "scenes",
        "version": CATALOG_VERSION,
        "scenes": [
            {"name": scene.name, "summary": scene.summary} for scene in scenes
        ],
    }
    return _finish(lines, machine, EXIT_OK)
