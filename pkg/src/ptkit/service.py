"""HTTP service: every command exposed as an endpoint.

The service is a thin client of :mod:`ptkit.reports`; request models carry
exactly the command-layer arguments, and every response is the unchanged
``CommandResult`` (text report, machine payload, exit code).  Input problems
map to HTTP 400 with the offending message.
"""

from __future__ import annotations

from typing import List, Optional, Union

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, ConfigDict

from . import reports
from .catalog import CATALOG_VERSION, CatalogError, ContradictionError, Scene
from .dirac import DiracError
from .reports import CommandError, CommandResult
from .scenefile import (
    SceneFileError,
    SceneFileModel,
    ToleranceModel,
    resolve_scene,
    scene_schema,
    to_scene,
)


class CommandResponse(BaseModel):
    text: str
    machine: dict
    exit_code: int


class SceneRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    scene: Union[str, SceneFileModel]
    tol: Optional[float] = None
    samples: Optional[int] = None

    def resolve(self) -> tuple:
        if isinstance(self.scene, str):
            scene, tolerances = resolve_scene(self.scene)
        else:
            scene, tolerances = to_scene(self.scene)
        tol = self.tol if self.tol is not None else tolerances.tol
        samples = self.samples if self.samples is not None else tolerances.samples
        return scene, tol, samples


class UnimodularRequest(SceneRequest):
    degree: Optional[int] = None
    density: Optional[str] = None


class TransversalRequest(SceneRequest):
    patch: Optional[str] = None


class PairRequest(SceneRequest):
    patch: Optional[str] = None
    form: str = "auto"


class DiracRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    rows: Optional[str] = None
    bivector: Optional[str] = None
    two_form: Optional[str] = None
    tangent: Optional[int] = None
    cotangent: Optional[int] = None
    map: Optional[str] = None
    subspace: Optional[str] = None


class ClassifyRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")
    matrix: Optional[str] = None
    name: Optional[str] = None
    tol: float = 1e-9
    samples: Optional[int] = None


_INPUT_ERRORS = (
    CommandError,
    SceneFileError,
    CatalogError,
    ContradictionError,
    DiracError,
    ValueError,
)


def _respond(result: CommandResult) -> CommandResponse:
    return CommandResponse(
        text=result.text, machine=result.machine, exit_code=result.exit_code
    )


def create_app() -> FastAPI:
    app = FastAPI(
        title="poisson-transversal toolkit",
        version=CATALOG_VERSION,
        description=(
            "Exact multivector calculus, unimodularity and transversality "
            "checks, homology pairings, and rule-based HNPT verdicts."
        ),
    )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": CATALOG_VERSION}

    @app.get("/schema")
    def schema() -> dict:
        return scene_schema()

    @app.get("/scenes", response_model=CommandResponse)
    def scenes() -> CommandResponse:
        return _respond(reports.run_scenes())

    @app.post("/verify", response_model=CommandResponse)
    def verify(request: SceneRequest) -> CommandResponse:
        try:
            scene, tol, _ = request.resolve()
            return _respond(reports.run_verify(scene, tol=tol))
        except _INPUT_ERRORS as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/unimodular", response_model=CommandResponse)
    def unimodular(request: UnimodularRequest) -> CommandResponse:
        try:
            scene, tol, _ = request.resolve()
            return _respond(
                reports.run_unimodular(
                    scene, degree=request.degree, density=request.density, tol=tol
                )
            )
        except _INPUT_ERRORS as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/transversal", response_model=CommandResponse)
    def transversal(request: TransversalRequest) -> CommandResponse:
        try:
            scene, tol, samples = request.resolve()
            return _respond(
                reports.run_transversal(
                    scene, patch_name=request.patch, tol=tol, samples=samples
                )
            )
        except _INPUT_ERRORS as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/pair", response_model=CommandResponse)
    def pair(request: PairRequest) -> CommandResponse:
        try:
            scene, tol, samples = request.resolve()
            return _respond(
                reports.run_pair(
                    scene,
                    patch_name=request.patch,
                    form=request.form,
                    tol=tol,
                    samples=samples,
                )
            )
        except _INPUT_ERRORS as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/report", response_model=CommandResponse)
    def report(request: SceneRequest) -> CommandResponse:
        try:
            scene, tol, samples = request.resolve()
            return _respond(reports.run_report(scene, tol=tol, samples=samples))
        except _INPUT_ERRORS as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/dirac/{op}", response_model=CommandResponse)
    def dirac(op: str, request: DiracRequest) -> CommandResponse:
        try:
            if op not in ("spinor", "cospinor", "pullback", "pushforward", "conditions"):
                raise CommandError(
                    f"unknown dirac op {op!r}; use spinor, cospinor, pullback, "
                    "pushforward, or conditions"
                )
            lagrangian, source = reports.build_dirac(
                rows=request.rows,
                bivector=request.bivector,
                two_form=request.two_form,
                tangent=request.tangent,
                cotangent=request.cotangent,
            )
            if op in ("spinor", "cospinor"):
                return _respond(
                    reports.run_dirac_spinor(
                        lagrangian, source, cospinor=(op == "cospinor")
                    )
                )
            if op == "conditions":
                if request.subspace is None:
                    raise CommandError("conditions needs a --subspace matrix")
                return _respond(
                    reports.run_dirac_conditions(lagrangian, request.subspace, source)
                )
            if request.map is None:
                raise CommandError(f"{op} needs a --map matrix")
            if op == "pullback":
                return _respond(
                    reports.run_dirac_pullback(lagrangian, request.map, source)
                )
            return _respond(
                reports.run_dirac_pushforward(lagrangian, request.map, source)
            )
        except _INPUT_ERRORS as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.post("/classify-lie3", response_model=CommandResponse)
    def classify(request: ClassifyRequest) -> CommandResponse:
        try:
            return _respond(
                reports.run_classify_lie3(
                    matrix=request.matrix,
                    name=request.name,
                    tol=request.tol,
                    samples=request.samples,
                )
            )
        except _INPUT_ERRORS as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    return app


app = create_app()
