"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class StageStatusModel(BaseModel):
    state: Literal["pending", "running", "ok", "failed"]
    reason: str | None = None
    attempts: int = 0
    completed_at: str | None = None


class ArtifactRef(BaseModel):
    path: str
    sha256: str


class ManifestModel(BaseModel):
    run_id: str
    created_at: str
    inputs: dict[str, Any]
    configs: dict[str, Any]
    stages: dict[str, StageStatusModel]
    artifacts: dict[str, ArtifactRef]
    wizard: dict[str, Any] | None = None


class WizardOutput(BaseModel):
    kind: Literal["question", "action", "done"]
    concept: str | None = None
    prompt: str | None = None
    action: dict[str, Any] | None = None


class RunCreateRequest(BaseModel):
    cloud_ref: str | None = Field(default=None, description="server-side cloud file path")
    voxel_leaf: float | None = None
    configs: dict[str, Any] = Field(default_factory=dict)


class RunResponse(BaseModel):
    manifest: ManifestModel
    output: WizardOutput


class UtteranceRequest(BaseModel):
    text: str


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody


class HealthResponse(BaseModel):
    status: Literal["ok"]
    version: str
    runs: int
