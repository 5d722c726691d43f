"""Run lifecycle, persistence and stage execution."""

from .manifest import (
    ARTIFACT_KINDS,
    STAGES,
    STEP_TO_STAGE,
    UPSTREAM,
    ArtifactIntegrityError,
    RunManifest,
    RunStore,
    StageStatus,
    atomic_write_bytes,
    atomic_write_text,
    sha256_file,
)
from .runner import RunBusy, Runner
from .stages import RunConfigs, execute_stage, path_from_json, path_to_json

__all__ = [
    "ARTIFACT_KINDS",
    "ArtifactIntegrityError",
    "RunBusy",
    "RunConfigs",
    "RunManifest",
    "RunStore",
    "Runner",
    "STAGES",
    "STEP_TO_STAGE",
    "StageStatus",
    "UPSTREAM",
    "atomic_write_bytes",
    "atomic_write_text",
    "execute_stage",
    "path_from_json",
    "path_to_json",
    "sha256_file",
]
