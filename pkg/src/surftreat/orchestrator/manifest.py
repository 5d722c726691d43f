"""Run manifests: persistent, atomically updated lifecycle state.

One directory per run; the manifest (with the embedded wizard session) is
a single JSON document replaced atomically, so a crash between stages
always leaves a resumable state. Artifacts are content-hashed on write
and verified on read.
"""

from __future__ import annotations

import hashlib
import json
import os
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..errors import MissingInput, SurftreatError, UnknownRun

STAGES = ("scan-ingest", "defect-detect", "plan", "simulate", "validate", "execute", "qc")

UPSTREAM = {
    "scan-ingest": (),
    "defect-detect": ("scan-ingest",),
    "plan": ("defect-detect",),
    "simulate": ("plan",),
    "validate": ("simulate",),
    "execute": ("validate",),
    "qc": ("execute",),
}

# Wizard workflow steps <-> pipeline stage names.
STEP_TO_STAGE = {
    "SurfaceScanning": "scan-ingest",
    "DefectDetection": "defect-detect",
    "PathPlanning": "plan",
    "Simulation": "simulate",
    "UserValidation": "validate",
    "Execution": "execute",
    "QualityControl": "qc",
}

ARTIFACT_KINDS = ("cloud", "defects", "path", "trajectory", "metrics", "transcript",
                  "trajectory_sim", "trajectory_exec", "ground_truth")


class ArtifactIntegrityError(SurftreatError):
    code = "artifact_integrity"


@dataclass
class StageStatus:
    state: str = "pending"            # pending | running | ok | failed
    reason: str | None = None
    attempts: int = 0
    completed_at: str | None = None

    def to_dict(self) -> dict:
        return {"state": self.state, "reason": self.reason,
                "attempts": self.attempts, "completed_at": self.completed_at}

    @classmethod
    def from_dict(cls, d: dict) -> "StageStatus":
        return cls(**d)


@dataclass
class RunManifest:
    run_id: str
    created_at: str
    inputs: dict
    configs: dict
    stages: dict[str, StageStatus] = field(default_factory=dict)
    artifacts: dict[str, dict] = field(default_factory=dict)
    session: dict | None = None

    @classmethod
    def new(cls, inputs: dict, configs: dict) -> "RunManifest":
        return cls(run_id=str(uuid.uuid4()),
                   created_at=datetime.now(timezone.utc).isoformat(),
                   inputs=dict(inputs),
                   configs=dict(configs),
                   stages={s: StageStatus() for s in STAGES})

    def to_dict(self) -> dict:
        return {"run_id": self.run_id,
                "created_at": self.created_at,
                "inputs": self.inputs,
                "configs": self.configs,
                "stages": {k: v.to_dict() for k, v in self.stages.items()},
                "artifacts": self.artifacts,
                "wizard": self.session}

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(run_id=d["run_id"], created_at=d["created_at"], inputs=d["inputs"],
                   configs=d["configs"],
                   stages={k: StageStatus.from_dict(v) for k, v in d["stages"].items()},
                   artifacts=d.get("artifacts", {}),
                   session=d.get("wizard"))

    def set_stage(self, stage: str, state: str, reason: str | None = None) -> None:
        st = self.stages[stage]
        if state == "running":
            st.attempts += 1
        if state == "ok":
            for up in UPSTREAM[stage]:
                if self.stages[up].state != "ok":
                    raise SurftreatError(
                        f"stage {stage} cannot be ok: upstream {up} is {self.stages[up].state}")
            st.completed_at = datetime.now(timezone.utc).isoformat()
        st.state = state
        st.reason = reason

    def reset_stages(self, stages) -> None:
        # attempts accumulate across passes; only the state resets
        for s in stages:
            self.stages[s] = StageStatus(attempts=self.stages[s].attempts)

    def done(self) -> bool:
        return bool(self.session) and self.session.get("status") == "done"


def atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class RunStore:
    """Filesystem layout and persistence for runs under a data directory."""

    def __init__(self, data_dir):
        self.data_dir = Path(data_dir)
        (self.data_dir / "runs").mkdir(parents=True, exist_ok=True)

    def run_dir(self, run_id: str) -> Path:
        return self.data_dir / "runs" / run_id

    def artifact_dir(self, run_id: str) -> Path:
        return self.run_dir(run_id) / "artifacts"

    def list_runs(self) -> list[str]:
        return sorted(p.name for p in (self.data_dir / "runs").iterdir() if p.is_dir())

    def create(self, manifest: RunManifest) -> None:
        d = self.run_dir(manifest.run_id)
        d.mkdir(parents=True, exist_ok=False)
        self.artifact_dir(manifest.run_id).mkdir()
        self.save(manifest)

    def save(self, manifest: RunManifest) -> None:
        atomic_write_text(self.run_dir(manifest.run_id) / "manifest.json",
                          json.dumps(manifest.to_dict(), indent=1, sort_keys=True))

    def load(self, run_id: str) -> RunManifest:
        path = self.run_dir(run_id) / "manifest.json"
        if not path.exists():
            raise UnknownRun(f"no run {run_id!r}")
        return RunManifest.from_dict(json.loads(path.read_text(encoding="utf-8")))

    def put_artifact(self, manifest: RunManifest, kind: str, name: str, data: bytes) -> Path:
        path = self.artifact_dir(manifest.run_id) / name
        atomic_write_bytes(path, data)
        manifest.artifacts[kind] = {"path": f"artifacts/{name}",
                                    "sha256": hashlib.sha256(data).hexdigest()}
        return path

    def artifact_path(self, manifest: RunManifest, kind: str) -> Path:
        if kind not in manifest.artifacts:
            raise MissingInput(f"run has no {kind!r} artifact")
        return self.run_dir(manifest.run_id) / manifest.artifacts[kind]["path"]

    def read_artifact(self, manifest: RunManifest, kind: str) -> bytes:
        path = self.artifact_path(manifest, kind)
        data = path.read_bytes()
        want = manifest.artifacts[kind]["sha256"]
        got = hashlib.sha256(data).hexdigest()
        if got != want:
            raise ArtifactIntegrityError(
                f"artifact {kind} hash mismatch: manifest {want[:12]}.., file {got[:12]}..")
        return data
