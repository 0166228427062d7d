"""Scene files: a JSON format for charts, bivectors, patches, and facts.

The on-disk format is UTF-8 JSON validated by pydantic models; every
polynomial or map component is an expression string in the same grammar the
rest of the package parses.  Serialization is canonical enough that built-in
scenes round-trip identically: expressions re-parse to equal trees and
polynomial coefficients re-parse to equal term maps.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .calculus import Multivector
from .expr import (
    Add,
    Cos,
    Expression,
    Mul,
    Neg,
    Num,
    Pow,
    Sin,
    Sub,
    Var,
    parse_expr,
)
from .poisson import Density, DiffForm
from .poly import PolyScalar, parse_poly
from .catalog import CatalogError, DeckMap, Scene
from .transversal import ParamSpec, Patch


class SceneFileError(ValueError):
    pass


# ---------------------------------------------------------------------------
# expression and polynomial text


def format_expr(e: Expression) -> str:
    """Render an expression so that re-parsing yields an equal tree.

    The formatter assumes parser-produced trees (negative literals appear as
    ``Neg`` nodes, never as negative ``Num`` values); machine-built trees with
    negative or float literals serialize to equivalent but not identical text.
    """
    if isinstance(e, Num):
        value = e.value
        if isinstance(value, Fraction) and value.denominator != 1:
            return f"({value})"
        return str(value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Add):
        right = format_expr(e.right)
        if isinstance(e.right, (Add, Sub)):
            right = f"({right})"
        return f"{format_expr(e.left)} + {right}"
    if isinstance(e, Sub):
        right = format_expr(e.right)
        if isinstance(e.right, (Add, Sub, Neg)):
            right = f"({right})"
        return f"{format_expr(e.left)} - {right}"
    if isinstance(e, Mul):
        left = format_expr(e.left)
        if isinstance(e.left, (Add, Sub, Neg)):
            left = f"({left})"
        right = format_expr(e.right)
        if isinstance(e.right, (Add, Sub, Neg, Mul)):
            right = f"({right})"
        return f"{left}*{right}"
    if isinstance(e, Neg):
        inner = format_expr(e.operand)
        if not isinstance(e.operand, (Num, Var, Pow, Sin, Cos)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = format_expr(e.base)
        if not isinstance(e.base, Var):
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, Sin):
        return f"sin({format_expr(e.operand)})"
    if isinstance(e, Cos):
        return f"cos({format_expr(e.operand)})"
    raise SceneFileError(f"cannot serialize expression node {type(e).__name__}")


def _fraction_text(value: Fraction) -> str:
    return str(value)


def _parse_fraction(text: Union[str, int]) -> Fraction:
    if isinstance(text, bool) or isinstance(text, float):
        raise SceneFileError("rational entries must be integers or 'p/q' strings")
    if isinstance(text, str) and not text.lstrip("+-").replace("/", "", 1).isdigit():
        raise SceneFileError(f"bad rational literal {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise SceneFileError(f"bad rational literal {text!r}") from exc


# ---------------------------------------------------------------------------
# pydantic models (the published schema)


class ChartModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    coords: List[str] = Field(default_factory=list)
    periods: Optional[List[Optional[float]]] = None

    @model_validator(mode="after")
    def _check(self) -> "ChartModel":
        if len(set(self.coords)) != len(self.coords):
            raise ValueError("chart coordinates must be distinct")
        if self.periods is not None and len(self.periods) != len(self.coords):
            raise ValueError("one period entry per coordinate")
        return self


class TermModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    indices: Tuple[int, int]
    coeff: str

    @model_validator(mode="after")
    def _check(self) -> "TermModel":
        i, j = self.indices
        if not 0 <= i < j:
            raise ValueError("term indices must be strictly increasing and nonnegative")
        return self


class PoissonModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    terms: List[TermModel]


class DensityModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    coeff: str = "1"
    note: str = ""


class ParamModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    name: str
    start: float
    end: float
    periodic: bool = False


class PatchModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    params: List[ParamModel] = Field(default_factory=list)
    map: List[str]
    target_periods: Optional[List[Optional[float]]] = None


class AnnotationModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    fact: str
    note: str = ""


class DeckModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    matrix: List[List[Union[int, str]]]
    shifts: List[Optional[float]]
    note: str = ""


class ToleranceModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    tol: float = 1e-9
    samples: Optional[int] = None


class SceneFileModel(BaseModel):
    model_config = ConfigDict(extra="forbid")
    name: str
    summary: str = ""
    chart: ChartModel = Field(default_factory=ChartModel)
    poisson: Optional[PoissonModel] = None
    densities: Dict[str, DensityModel] = Field(default_factory=dict)
    patches: Dict[str, PatchModel] = Field(default_factory=dict)
    annotations: List[Union[str, AnnotationModel]] = Field(default_factory=list)
    book_matrix: Optional[List[List[Union[int, str]]]] = None
    deck: Optional[DeckModel] = None
    flat_bundle: Optional[Tuple[int, int]] = None
    tolerances: ToleranceModel = Field(default_factory=ToleranceModel)

    @field_validator("name")
    @classmethod
    def _name_nonempty(cls, value: str) -> str:
        if not value:
            raise ValueError("scene name must be nonempty")
        return value


def scene_schema() -> dict:
    """The published JSON schema for scene files."""
    return SceneFileModel.model_json_schema()


# ---------------------------------------------------------------------------
# model -> domain


def _to_patch(name: str, model: PatchModel, chart: ChartModel) -> Patch:
    params = tuple(
        ParamSpec(p.name, p.start, p.end, periodic=p.periodic) for p in model.params
    )
    param_names = tuple(p.name for p in model.params)
    if len(model.map) != len(chart.coords):
        raise SceneFileError(
            f"patch {name!r}: {len(chart.coords)} chart coordinates but "
            f"{len(model.map)} map components"
        )
    components = tuple(
        parse_expr(src, param_names, allow_trig=True) for src in model.map
    )
    target_periods: Tuple[Optional[float], ...] = ()
    if model.target_periods is not None:
        if len(model.target_periods) != len(chart.coords):
            raise SceneFileError(
                f"patch {name!r}: one target period entry per chart coordinate"
            )
        target_periods = tuple(model.target_periods)
    return Patch(name, tuple(chart.coords), params, components, target_periods=target_periods)


def _rational_rows(
    rows: List[List[Union[int, str]]], what: str
) -> Tuple[Tuple[Fraction, ...], ...]:
    if len(rows) != 2 or any(len(row) != 2 for row in rows):
        raise SceneFileError(f"{what} must be a 2x2 matrix")
    return tuple(tuple(_parse_fraction(x) for x in row) for row in rows)


def to_scene(model: SceneFileModel) -> Tuple[Scene, ToleranceModel]:
    coords = tuple(model.chart.coords)
    m = len(coords)
    periods: Tuple[Optional[float], ...] = (
        tuple(model.chart.periods) if model.chart.periods is not None else tuple(None for _ in coords)
    )

    bivector: Optional[Multivector] = None
    if model.poisson is not None:
        if m == 0:
            raise SceneFileError("a poisson section needs chart coordinates")
        terms: Dict[Tuple[int, int], PolyScalar] = {}
        for term in model.poisson.terms:
            i, j = term.indices
            if j >= m:
                raise SceneFileError(
                    f"term indices {term.indices} out of range for a {m}-coordinate chart"
                )
            if (i, j) in terms:
                raise SceneFileError(f"duplicate term indices {term.indices}")
            try:
                coeff = parse_poly(term.coeff, coords)
            except ValueError as exc:
                raise SceneFileError(
                    f"bad coefficient for term {term.indices}: {exc}"
                ) from exc
            if not coeff.is_zero():
                terms[(i, j)] = coeff
        bivector = Multivector(m, 2, terms)

    densities: Dict[str, Density] = {}
    for name, dm in model.densities.items():
        if m == 0:
            raise SceneFileError("densities need chart coordinates")
        try:
            coeff = parse_poly(dm.coeff, coords)
        except ValueError as exc:
            raise SceneFileError(f"bad density {name!r}: {exc}") from exc
        top = DiffForm(m, m, {tuple(range(m)): coeff})
        densities[name] = Density(top, dm.note)

    patches: Dict[str, Patch] = {}
    for name, pm in model.patches.items():
        try:
            patches[name] = _to_patch(name, pm, model.chart)
        except ValueError as exc:
            raise SceneFileError(f"patch {name!r}: {exc}") from exc

    annotations: Dict[str, str] = {}
    for entry in model.annotations:
        if isinstance(entry, str):
            annotations[entry] = ""
        else:
            annotations[entry.fact] = entry.note

    book = (
        _rational_rows(model.book_matrix, "book_matrix")
        if model.book_matrix is not None
        else None
    )
    deck = None
    if model.deck is not None:
        matrix = tuple(
            tuple(_parse_fraction(x) for x in row) for row in model.deck.matrix
        )
        deck = DeckMap(matrix=matrix, shifts=tuple(model.deck.shifts), note=model.deck.note)

    try:
        scene = Scene(
            name=model.name,
            summary=model.summary,
            chart_names=coords,
            chart_periods=periods,
            bivector=bivector,
            densities=densities,
            patches=patches,
            annotations=annotations,
            book_matrix=book,
            deck=deck,
            flat_bundle=model.flat_bundle,
        )
    except CatalogError as exc:
        raise SceneFileError(str(exc)) from exc
    return scene, model.tolerances


# ---------------------------------------------------------------------------
# domain -> model


def from_scene(scene: Scene, tolerances: Optional[ToleranceModel] = None) -> SceneFileModel:
    coords = list(scene.chart_names)
    periods = (
        list(scene.chart_periods)
        if any(p is not None for p in scene.chart_periods)
        else None
    )
    poisson = None
    if scene.bivector is not None:
        poisson = PoissonModel(
            terms=[
                TermModel(indices=key, coeff=coeff.fmt(coords))
                for key, coeff in scene.bivector.sorted_terms()
            ]
        )
    densities = {
        name: DensityModel(
            coeff=density.coefficient().fmt(coords), note=density.orientation_note
        )
        for name, density in scene.densities.items()
    }
    patches = {
        name: PatchModel(
            params=[
                ParamModel(name=p.name, start=p.start, end=p.end, periodic=p.periodic)
                for p in patch.params
            ],
            map=[format_expr(c) for c in patch.components],
            target_periods=(
                list(patch.target_periods)
                if any(p is not None for p in patch.target_periods)
                else None
            ),
        )
        for name, patch in scene.patches.items()
    }
    annotations: List[Union[str, AnnotationModel]] = [
        AnnotationModel(fact=fact, note=note) if note else fact
        for fact, note in scene.annotations.items()
    ]
    book = (
        [[_fraction_text(x) for x in row] for row in scene.book_matrix]
        if scene.book_matrix is not None
        else None
    )
    deck = None
    if scene.deck is not None:
        deck = DeckModel(
            matrix=[[_fraction_text(x) for x in row] for row in scene.deck.matrix],
            shifts=list(scene.deck.shifts),
            note=scene.deck.note,
        )
    return SceneFileModel(
        name=scene.name,
        summary=scene.summary,
        chart=ChartModel(coords=coords, periods=periods),
        poisson=poisson,
        densities=densities,
        patches=patches,
        annotations=annotations,
        book_matrix=book,
        deck=deck,
        flat_bundle=scene.flat_bundle,
        tolerances=tolerances or ToleranceModel(),
    )


# ---------------------------------------------------------------------------
# files


def loads_scene(text: str) -> Tuple[Scene, ToleranceModel]:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneFileError(f"not valid JSON: {exc}") from exc
    try:
        model = SceneFileModel.model_validate(payload)
    except Exception as exc:  # pydantic.ValidationError
        raise SceneFileError(f"scene file does not match the schema: {exc}") from exc
    return to_scene(model)


def dumps_scene(scene: Scene, tolerances: Optional[ToleranceModel] = None) -> str:
    model = from_scene(scene, tolerances)
    payload = model.model_dump(mode="json", exclude_none=True)
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_scene(path: Union[str, Path]) -> Tuple[Scene, ToleranceModel]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneFileError(f"cannot read {path}: {exc}") from exc
    return loads_scene(text)


def save_scene(
    scene: Scene, path: Union[str, Path], tolerances: Optional[ToleranceModel] = None
) -> None:
    Path(path).write_text(dumps_scene(scene, tolerances), encoding="utf-8")


def resolve_scene(ref: str) -> Tuple[Scene, ToleranceModel]:
    """Resolve a scene reference: file path, builtin name, or search path.

    Order: an existing file path wins; then a builtin scene name; then
    ``<dir>/<ref>.json`` for each directory in the ``PTK_SCENE_PATH``
    environment variable (``os.pathsep``-separated).
    """
    import os

    from .catalog import scene_names

    path = Path(ref)
    if path.is_file():
        return load_scene(path)
    if ref in scene_names():
        from .catalog import get_scene

        return get_scene(ref), ToleranceModel()
    for directory in os.environ.get("PTK_SCENE_PATH", "").split(os.pathsep):
        if not directory:
            continue
        candidate = Path(directory) / f"{ref}.json"
        if candidate.is_file():
            return load_scene(candidate)
    raise SceneFileError(
        f"unknown scene {ref!r}: not a file, not a builtin "
        f"({', '.join(scene_names())}), and not found on PTK_SCENE_PATH"
    )
