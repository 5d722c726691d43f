"""Pipeline stage handlers invoked for wizard action descriptors.

Each handler loads its inputs from run artifacts, executes the module
operation, writes output artifacts, and returns the action result fed
back into the wizard (ok flag + belief updates + summary).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..control import (
    PlantConfig,
    VibrationSpec,
    WrenchRegion,
    control_metrics,
    simulate_execution,
    tune_gains_default,
)
from ..errors import MissingInput, SurftreatError
from ..geometry import PointCloud, load_cloud, save_cloud, voxel_downsample
from ..perception import PerceptionConfig, ScanSpec, detect_defects, make_synthetic_scan
from ..planner import PlannerConfig, ToolPath, Waypoint, plan_path
from .manifest import RunManifest, RunStore


def default_scan_spec() -> ScanSpec:
    """Rectangular demo scan with one seeded dent (stable principal frame)."""
    from ..perception import DefectSpec
    return ScanSpec(surface="plane", size=(0.12, 0.1), spacing=1e-3, noise_sigma=2e-5,
                    defects=[DefectSpec(center=(0.02, 0.02), radius=8e-3, depth=-1e-3)],
                    seed=0)


@dataclass
class RunConfigs:
    """Config snapshot frozen into every run manifest."""

    scan: ScanSpec = field(default_factory=default_scan_spec)
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    plant: PlantConfig = field(default_factory=PlantConfig)
    execution_vibration: VibrationSpec = field(
        default_factory=lambda: VibrationSpec(amplitude=5e-4, frequency=10.0))
    seed: int = 0
    kb_sha256: str = ""

    def to_dict(self) -> dict:
        return {"scan": self.scan.to_dict(),
                "perception": self.perception.to_dict(),
                "planner": self.planner.to_dict(),
                "plant": self.plant.to_dict(),
                "execution_vibration": self.execution_vibration.to_dict(),
                "seed": self.seed,
                "kb_sha256": self.kb_sha256}

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfigs":
        d = dict(d)
        out = cls()
        if "scan" in d:
            out.scan = ScanSpec.from_dict(d["scan"])
        if "perception" in d:
            out.perception = PerceptionConfig.from_dict(d["perception"])
        if "planner" in d:
            out.planner = PlannerConfig.from_dict(d["planner"])
        if "plant" in d:
            out.plant = PlantConfig.from_dict(d["plant"])
        if "execution_vibration" in d:
            out.execution_vibration = VibrationSpec(**d["execution_vibration"])
        out.seed = d.get("seed", 0)
        out.kb_sha256 = d.get("kb_sha256", "")
        return out


def path_to_json(path: ToolPath, metrics) -> str:
    doc = path.to_dict()
    doc["metrics"] = metrics.to_dict()
    return json.dumps(doc, indent=1)


def path_from_json(text: str) -> ToolPath:
    doc = json.loads(text)
    cfg = PlannerConfig.from_dict(doc["config"])
    waypoints = [Waypoint(position=np.asarray(w["position_m"]),
                          orientation=np.asarray(w["quaternion_wxyz"]),
                          travel=np.asarray(w["travel"]),
                          kind=w["kind"]) for w in doc["waypoints"]]
    return ToolPath(waypoints=waypoints, config=cfg,
                    source_cloud=doc.get("source_cloud", ""),
                    total_length=doc.get("total_length_m", 0.0),
                    skipped_planes=doc.get("skipped_planes", []))


def _update_metrics_artifact(store: RunStore, manifest: RunManifest, key: str, value: dict):
    merged = {}
    if "metrics" in manifest.artifacts:
        merged = json.loads(store.read_artifact(manifest, "metrics"))
    merged[key] = value
    store.put_artifact(manifest, "metrics", "metrics.json", json.dumps(merged, indent=1).encode())


def _force_newtons(belief: dict) -> float:
    force = belief.get("force_setpoint")
    if isinstance(force, dict):
        force = force.get("~qty", {}).get("si")
    elif hasattr(force, "si"):
        force = force.si
    if force is None:
        raise MissingInput("belief lacks a force setpoint")
    return float(force)


def _load_run_cloud(store: RunStore, manifest: RunManifest) -> PointCloud:
    store.read_artifact(manifest, "cloud")  # integrity check
    cloud = load_cloud(store.artifact_path(manifest, "cloud"))
    # Artifacts must not embed volatile filesystem paths: reference the
    # cloud by content hash so CLI and API runs serialize identically.
    cloud.meta.source = "cloud:" + manifest.artifacts["cloud"]["sha256"][:16]
    return cloud


def stage_scan_ingest(store: RunStore, manifest: RunManifest, cfg: RunConfigs, belief: dict) -> dict:
    if manifest.inputs.get("cloud_ref"):
        cloud = load_cloud(manifest.inputs["cloud_ref"])
        truth = []
    else:
        cloud, truth = make_synthetic_scan(cfg.scan)
    leaf = manifest.inputs.get("voxel_leaf")
    if leaf:
        cloud = voxel_downsample(cloud, float(leaf))
    tmp_path = store.artifact_dir(manifest.run_id) / "cloud.xyz.tmp-src"
    save_cloud(cloud, tmp_path, fmt="xyz-ascii")
    data = tmp_path.read_bytes()
    tmp_path.unlink()
    store.put_artifact(manifest, "cloud", "cloud.xyz", data)
    if truth:
        store.put_artifact(manifest, "ground_truth", "ground_truth.json",
                           json.dumps([t.to_dict() for t in truth], indent=1).encode())
    return {"ok": True,
            "belief": {"cloud_points": len(cloud)},
            "summary": f"scan ingested: {len(cloud)} points"}


def stage_defect_detect(store: RunStore, manifest: RunManifest, cfg: RunConfigs, belief: dict) -> dict:
    cloud = _load_run_cloud(store, manifest)
    report = detect_defects(cloud, cfg.perception)
    store.put_artifact(manifest, "defects", "defects.json",
                       json.dumps(report.to_dict(), indent=1).encode())
    return {"ok": True,
            "belief": {"defect_count": len(report.regions)},
            "summary": f"{len(report.regions)} defect regions "
                       f"({len(report.sor_removed)} stray points removed)"}


def stage_plan(store: RunStore, manifest: RunManifest, cfg: RunConfigs, belief: dict) -> dict:
    cloud = _load_run_cloud(store, manifest)
    path, metrics = plan_path(cloud, cfg.planner)
    store.put_artifact(manifest, "path", "path.json", path_to_json(path, metrics).encode())
    _update_metrics_artifact(store, manifest, "alignment", metrics.to_dict())
    return {"ok": True,
            "belief": {"path_waypoints": len(path.waypoints),
                       "align_rmse_mm": round(metrics.rmse * 1e3, 4)},
            "summary": f"planned {len(path.waypoints)} waypoints, "
                       f"rmse {metrics.rmse * 1e3:.3f} mm"}


def _run_sim(store: RunStore, manifest: RunManifest, cfg: RunConfigs, belief: dict,
             execution_grade: bool) -> dict:
    cloud = _load_run_cloud(store, manifest)
    path = path_from_json(store.read_artifact(manifest, "path").decode())
    plant = PlantConfig.from_dict(cfg.plant.to_dict())
    if execution_grade:
        plant.vibration = cfg.execution_vibration
    else:
        plant.sensor_noise_sigma = 0.0
        plant.vibration = VibrationSpec()
    region = WrenchRegion.force_z(_force_newtons(belief))
    gains = tune_gains_default(plant, region)
    traj, metrics = simulate_execution(path, region, gains, plant,
                                       seed=cfg.seed, cloud=cloud)
    tmp = store.artifact_dir(manifest.run_id) / "traj.tmp-src"
    traj.write_csv(tmp)
    data = tmp.read_bytes()
    tmp.unlink()
    name = "trajectory_exec.csv" if execution_grade else "trajectory_sim.csv"
    kind = "trajectory_exec" if execution_grade else "trajectory_sim"
    store.put_artifact(manifest, kind, name, data)
    # 'trajectory' always points at the most recent run.
    store.put_artifact(manifest, "trajectory", "trajectory.csv", data)
    key = "execute" if execution_grade else "simulate"
    _update_metrics_artifact(store, manifest, key, metrics.to_dict())
    prefix = "last_exec" if execution_grade else "last_sim"
    result_belief = {
        f"{prefix}_ok": bool(metrics.success),
        f"{prefix}_mae": None if metrics.mae is None else round(metrics.mae, 4),
        f"{prefix}_rise": None if metrics.rise_time is None else round(metrics.rise_time, 4),
    }
    if execution_grade and metrics.success:
        remaining = int(belief.get("passes_remaining", 1)) - 1
        result_belief["passes_remaining"] = max(0, remaining)
    summary = (f"{'execution' if execution_grade else 'simulation'} "
               f"{'ok' if metrics.success else 'FAILED'}"
               + (f" ({metrics.failure_reason})" if metrics.failure_reason else "")
               + (f", force MAE {metrics.mae:.3f} N" if metrics.mae is not None else ""))
    return {"ok": bool(metrics.success),
            "error": metrics.failure_reason,
            "belief": result_belief,
            "summary": summary}


def stage_simulate(store, manifest, cfg, belief) -> dict:
    return _run_sim(store, manifest, cfg, belief, execution_grade=False)


def stage_execute(store, manifest, cfg, belief) -> dict:
    return _run_sim(store, manifest, cfg, belief, execution_grade=True)


HANDLERS = {
    "scan-ingest": stage_scan_ingest,
    "defect-detect": stage_defect_detect,
    "plan": stage_plan,
    "simulate": stage_simulate,
    "execute": stage_execute,
}


def execute_stage(kind: str, store: RunStore, manifest: RunManifest, cfg: RunConfigs,
                  belief: dict) -> dict:
    if kind not in HANDLERS:
        raise SurftreatError(f"no handler for action kind {kind!r}")
    return HANDLERS[kind](store, manifest, cfg, belief)
