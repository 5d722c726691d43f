"""HTTP API serving the run lifecycle and artifacts (versioned under /v1)."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import __version__
from ..errors import (
    MissingInput,
    ProtocolError,
    SurftreatError,
    UnknownRun,
)
from ..orchestrator import RunBusy, RunConfigs, Runner
from ..orchestrator.manifest import ARTIFACT_KINDS
from .schemas import (
    HealthResponse,
    ManifestModel,
    RunCreateRequest,
    RunResponse,
    UtteranceRequest,
    WizardOutput,
)

_STATUS = {
    UnknownRun.code: 404,
    MissingInput.code: 400,
    ProtocolError.code: 409,
    RunBusy.code: 409,
    "parse_error": 400,
    "invalid_parameter": 400,
}

_MEDIA = {
    "cloud": "text/plain",
    "defects": "application/json",
    "path": "application/json",
    "metrics": "application/json",
    "trajectory": "text/csv",
    "trajectory_sim": "text/csv",
    "trajectory_exec": "text/csv",
    "transcript": "text/plain",
    "ground_truth": "application/json",
}


def create_app(data_dir, kb_path=None, lexicon_path=None, frontend_dir=None) -> FastAPI:
    runner = Runner(data_dir, kb_path=kb_path, lexicon_path=lexicon_path)
    app = FastAPI(title="surftreat", version=__version__)
    app.state.runner = runner

    @app.exception_handler(SurftreatError)
    async def surftreat_error(_req: Request, exc: SurftreatError):
        status = _STATUS.get(exc.code, 500)
        return JSONResponse(status_code=status,
                            content={"error": {"code": exc.code, "message": str(exc)}})

    def _run_response(manifest, output) -> RunResponse:
        return RunResponse(manifest=ManifestModel.model_validate(manifest.to_dict()),
                           output=WizardOutput.model_validate(output))

    @app.get("/v1/healthz", response_model=HealthResponse)
    def healthz():
        return HealthResponse(status="ok", version=__version__,
                              runs=len(runner.store.list_runs()))

    @app.post("/v1/runs", response_model=RunResponse, status_code=201)
    def create_run(req: RunCreateRequest):
        inputs = {}
        if req.cloud_ref:
            inputs["cloud_ref"] = req.cloud_ref
        if req.voxel_leaf:
            inputs["voxel_leaf"] = req.voxel_leaf
        configs = RunConfigs.from_dict(req.configs) if req.configs else None
        manifest, output = runner.run_create(inputs, configs)
        return _run_response(manifest, output)

    @app.get("/v1/runs", response_model=list[str])
    def list_runs():
        return runner.store.list_runs()

    @app.get("/v1/runs/{run_id}", response_model=RunResponse)
    def get_run(run_id: str):
        manifest = runner.get(run_id)
        return _run_response(manifest, runner.current_output(manifest))

    @app.post("/v1/runs/{run_id}/wizard", response_model=RunResponse)
    def wizard_utterance(run_id: str, req: UtteranceRequest):
        manifest, output = runner.feed_user(run_id, req.text)
        return _run_response(manifest, output)

    @app.post("/v1/runs/{run_id}/advance", response_model=RunResponse)
    def advance(run_id: str):
        manifest, output = runner.advance(run_id)
        return _run_response(manifest, output)

    @app.get("/v1/runs/{run_id}/artifacts/{kind}")
    def artifact(run_id: str, kind: str):
        manifest = runner.get(run_id)
        if kind not in ARTIFACT_KINDS or kind not in manifest.artifacts:
            return JSONResponse(status_code=404,
                                content={"error": {"code": "artifact_not_found",
                                                   "message": f"run has no {kind!r} artifact"}})
        data = runner.store.read_artifact(manifest, kind)
        return Response(content=data, media_type=_MEDIA.get(kind, "application/octet-stream"))

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app
