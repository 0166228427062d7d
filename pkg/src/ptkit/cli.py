"""Command-line interface: a thin client over the command layer.

Every subcommand resolves its inputs, calls the matching ``run_*`` function,
prints the returned report (or just its machine block with ``--json``), and
exits with the command's code: 0 = all asserted properties hold, 1 = a
checked property fails, 2 = input error, 3 = inconclusive only.

Scene references are resolved as: an existing file path; then a builtin
scene name; then ``<dir>/<ref>.json`` for directories on ``PTK_SCENE_PATH``.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from . import reports
from .catalog import CatalogError, ContradictionError
from .dirac import DiracError
from .reports import CommandError, CommandResult
from .scenefile import SceneFileError, resolve_scene, scene_schema

_INPUT_ERRORS = (
    CommandError,
    SceneFileError,
    CatalogError,
    ContradictionError,
    DiracError,
    ValueError,
)


def _common_options(f):
    f = click.option(
        "--tol",
        type=float,
        default=None,
        help="Numerical tolerance (default 1e-9, or the scene file's).",
    )(f)
    f = click.option(
        "--samples",
        type=int,
        default=None,
        help="Sample count for sampled checks (default per check).",
    )(f)
    f = click.option(
        "--out",
        type=click.Path(dir_okay=False, writable=True),
        default=None,
        help="Write the report to this path instead of stdout.",
    )(f)
    f = click.option(
        "--json",
        "json_only",
        is_flag=True,
        help="Emit only the machine-readable JSON block.",
    )(f)
    return f


def _emit(result: CommandResult, out: Optional[str], json_only: bool) -> None:
    text = result.machine_json + "\n" if json_only else result.text
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)
    sys.exit(result.exit_code)


def _fail_input(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(reports.EXIT_INPUT)


def _resolve(scene_ref: str, tol: Optional[float], samples: Optional[int]):
    scene, tolerances = resolve_scene(scene_ref)
    merged_tol = tol if tol is not None else tolerances.tol
    merged_samples = samples if samples is not None else tolerances.samples
    return scene, merged_tol, merged_samples


@click.group()
def main() -> None:
    """Exact computational checks for Poisson transversals."""


@main.command()
@click.argument("scene_ref", metavar="SCENE")
@_common_options
def verify(scene_ref, tol, samples, out, json_only) -> None:
    """Check the Jacobi identity [pi, pi] = 0 exactly."""
    try:
        scene, tol, _ = _resolve(scene_ref, tol, samples)
        result = reports.run_verify(scene, tol=tol)
    except _INPUT_ERRORS as exc:
        _fail_input(exc)
    _emit(result, out, json_only)


@main.command()
@click.argument("scene_ref", metavar="SCENE")
@click.option("--degree", type=int, default=None, help="Polynomial degree bound for the solver.")
@click.option("--density", type=str, default=None, help="Check this named density instead.")
@_common_options
def unimodular(scene_ref, degree, density, tol, samples, out, json_only) -> None:
    """Test unimodularity: named density or polynomial-density solver."""
    try:
        scene, tol, _ = _resolve(scene_ref, tol, samples)
        result = reports.run_unimodular(scene, degree=degree, density=density, tol=tol)
    except _INPUT_ERRORS as exc:
        _fail_input(exc)
    _emit(result, out, json_only)


@main.command()
@click.argument("scene_ref", metavar="SCENE")
@click.option("--patch", type=str, default=None, help="Patch name (default: the only patch).")
@_common_options
def transversal(scene_ref, patch, tol, samples, out, json_only) -> None:
    """Check that a patch is a Poisson transversal."""
    try:
        scene, tol, samples = _resolve(scene_ref, tol, samples)
        result = reports.run_transversal(scene, patch_name=patch, tol=tol, samples=samples)
    except _INPUT_ERRORS as exc:
        _fail_input(exc)
    _emit(result, out, json_only)


@main.command()
@click.argument("scene_ref", metavar="SCENE")
@click.option("--patch", type=str, default=None, help="Patch name (default: the only patch).")
@click.option(
    "--form",
    type=str,
    default="auto",
    show_default=True,
    help="'auto' for the full positivity certificate, or a density name for a raw integral.",
)
@_common_options
def pair(scene_ref, patch, form, tol, samples, out, json_only) -> None:
    """Pair a patch with the contracted density by quadrature."""
    try:
        scene, tol, samples = _resolve(scene_ref, tol, samples)
        result = reports.run_pair(scene, patch_name=patch, form=form, tol=tol, samples=samples)
    except _INPUT_ERRORS as exc:
        _fail_input(exc)
    _emit(result, out, json_only)


@main.command()
@click.argument("scene_ref", metavar="SCENE")
@_common_options
def report(scene_ref, tol, samples, out, json_only) -> None:
    """Run every applicable check, then the verdict rule table."""
    try:
        scene, tol, samples = _resolve(scene_ref, tol, samples)
        result = reports.run_report(scene, tol=tol, samples=samples)
    except _INPUT_ERRORS as exc:
        _fail_input(exc)
    _emit(result, out, json_only)


@main.command()
@click.argument(
    "op",
    type=click.Choice(["spinor", "cospinor", "pullback", "pushforward", "conditions"]),
)
@click.option("--rows", type=str, default=None, help="Lagrangian basis rows, n x 2n: 'a,b,...;c,d,...'.")
@click.option("--bivector", type=str, default=None, help="Antisymmetric matrix; use its graph.")
@click.option("--two-form", "two_form", type=str, default=None, help="Antisymmetric matrix; use its graph.")
@click.option("--tangent", type=int, default=None, help="Use the tangent space of this dimension.")
@click.option("--cotangent", type=int, default=None, help="Use the cotangent space of this dimension.")
@click.option("--map", "map_matrix", type=str, default=None, help="Linear map matrix (rows = target coords).")
@click.option("--subspace", type=str, default=None, help="Subspace basis rows (for 'conditions').")
@_common_options
def dirac(op, rows, bivector, two_form, tangent, cotangent, map_matrix, subspace, tol, samples, out, json_only) -> None:
    """Exact linear Dirac computations: spinor lines, images, conditions."""
    try:
        lagrangian, source = reports.build_dirac(
            rows=rows,
            bivector=bivector,
            two_form=two_form,
            tangent=tangent,
            cotangent=cotangent,
        )
        if op in ("spinor", "cospinor"):
            result = reports.run_dirac_spinor(lagrangian, source, cospinor=(op == "cospinor"))
        elif op == "conditions":
            if subspace is None:
                raise CommandError("conditions needs --subspace")
            result = reports.run_dirac_conditions(lagrangian, subspace, source)
        else:
            if map_matrix is None:
                raise CommandError(f"{op} needs --map")
            if op == "pullback":
                result = reports.run_dirac_pullback(lagrangian, map_matrix, source)
            else:
                result = reports.run_dirac_pushforward(lagrangian, map_matrix, source)
    except _INPUT_ERRORS as exc:
        _fail_input(exc)
    _emit(result, out, json_only)


@main.command(name="classify-lie3")
@click.option("--matrix", type=str, default=None, help="Book matrix entries a,b,c,d (rationals).")
@click.option("--name", type=str, default=None, help="Named algebra: so3, sl2, heisenberg.")
@_common_options
def classify_lie3(matrix, name, tol, samples, out, json_only) -> None:
    """Classify a 3-d Lie-Poisson structure: transverse circles, unimodularity."""
    try:
        result = reports.run_classify_lie3(
            matrix=matrix, name=name, tol=tol if tol is not None else 1e-9, samples=samples
        )
    except _INPUT_ERRORS as exc:
        _fail_input(exc)
    _emit(result, out, json_only)


@main.command()
@click.option("--schema", "show_schema", is_flag=True, help="Print the scene-file JSON schema.")
@_common_options
def scenes(show_schema, tol, samples, out, json_only) -> None:
    """List the builtin scenes (or print the scene-file schema)."""
    if show_schema:
        text = json.dumps(scene_schema(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        if out:
            Path(out).write_text(text, encoding="utf-8")
        else:
            click.echo(text, nl=False)
        sys.exit(reports.EXIT_OK)
    _emit(reports.run_scenes(), out, json_only)


@main.command()
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port) -> None:
    """Run the HTTP service (uvicorn)."""
    import uvicorn

    uvicorn.run("ptkit.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
