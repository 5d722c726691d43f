"""Command-line client for the surface-treatment pipeline.

Thin wrappers over the same module operations the HTTP service exposes:
scan generation/import, defect detection, planning, control simulation,
the interactive wizard, scripted end-to-end runs, and the API server.

Exit codes: 0 success, 1 usage error, 2 stage/pipeline failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .control import PlantConfig, VibrationSpec, WrenchRegion, simulate_execution, tune_gains_default
from .errors import SurftreatError
from .geometry import load_cloud, save_cloud, voxel_downsample
from .orchestrator import RunConfigs, Runner, path_from_json, path_to_json
from .perception import PerceptionConfig, ScanSpec, detect_defects, make_synthetic_scan
from .planner import PlannerConfig, plan_path

USAGE_ERROR = 1
STAGE_FAILURE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(USAGE_ERROR)


def _load_configs(path: str | None) -> RunConfigs:
    if not path:
        return RunConfigs()
    return RunConfigs.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _section(path: str | None, key: str, cls, default):
    if not path:
        return default()
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if key in data:
        return cls.from_dict(data[key])
    return default()


def cmd_scan_gen(args) -> int:
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        spec = ScanSpec.from_dict(data.get("scan", data))
    else:
        spec = ScanSpec()
    if args.seed is not None:
        spec.seed = args.seed
    cloud, truth = make_synthetic_scan(spec)
    save_cloud(cloud, args.out)
    if args.truth_out:
        Path(args.truth_out).write_text(
            json.dumps([t.to_dict() for t in truth], indent=1), encoding="utf-8")
    print(f"wrote {len(cloud)} points to {args.out}")
    return 0


def cmd_scan_import(args) -> int:
    cloud = load_cloud(args.input, args.format)
    if args.voxel:
        cloud = voxel_downsample(cloud, args.voxel)
    save_cloud(cloud, args.out)
    print(f"imported {len(cloud)} points -> {args.out} (meters)")
    return 0


def cmd_detect(args) -> int:
    cloud = load_cloud(args.input)
    cfg = _section(args.config, "perception", PerceptionConfig, PerceptionConfig)
    report = detect_defects(cloud, cfg)
    Path(args.out).write_text(json.dumps(report.to_dict(), indent=1), encoding="utf-8")
    print(f"{len(report.regions)} defect regions "
          f"({len(report.sor_removed)} stray points removed) -> {args.out}")
    return 0


def cmd_plan(args) -> int:
    cloud = load_cloud(args.input)
    cfg = _section(args.config, "planner", PlannerConfig, PlannerConfig)
    path, metrics = plan_path(cloud, cfg)
    Path(args.out).write_text(path_to_json(path, metrics), encoding="utf-8")
    print(f"planned {len(path.waypoints)} waypoints, rmse {metrics.rmse * 1e3:.3f} mm, "
          f"max {metrics.max * 1e3:.3f} mm -> {args.out}")
    return 0


def cmd_simulate(args) -> int:
    cloud = load_cloud(args.cloud)
    path = path_from_json(Path(args.path).read_text(encoding="utf-8"))
    plant = _section(args.config, "plant", PlantConfig, PlantConfig)
    if args.vibration:
        amp, freq = (float(x) for x in args.vibration.split("@"))
        plant.vibration = VibrationSpec(amplitude=amp, frequency=freq)
    region = WrenchRegion.force_z(args.force)
    gains = tune_gains_default(plant, region)
    traj, metrics = simulate_execution(path, region, gains, plant,
                                       seed=args.seed or 0, cloud=cloud)
    traj.write_csv(args.out)
    if args.metrics_out:
        Path(args.metrics_out).write_text(json.dumps(metrics.to_dict(), indent=1),
                                          encoding="utf-8")
    status = "ok" if metrics.success else f"FAILED ({metrics.failure_reason})"
    mae = f"{metrics.mae:.3f}" if metrics.mae is not None else "n/a"
    print(f"simulation {status}: rise {metrics.rise_time}, force MAE {mae} N -> {args.out}")
    return 0 if metrics.success else STAGE_FAILURE


def _runner(args) -> Runner:
    return Runner(args.data_dir, kb_path=args.kb)


def _run_inputs(args) -> dict:
    inputs = {}
    if args.cloud:
        inputs["cloud_ref"] = str(Path(args.cloud).resolve())
    return inputs


def cmd_wizard(args) -> int:
    runner = _runner(args)
    manifest, output = runner.run_create(_run_inputs(args), _load_configs(args.config))
    print(f"run {manifest.run_id}")
    while True:
        if output["kind"] == "done":
            print("workflow complete")
            break
        if output["kind"] == "action":
            kind = output["action"]["kind"]
            print(f"... running {kind}")
            manifest, output = runner.advance(manifest.run_id)
            st = manifest.stages.get(kind)
            if st is not None and st.state == "failed":
                print(f"    {kind} failed: {st.reason}")
            continue
        try:
            answer = input(f"{output['prompt']} ")
        except EOFError:
            print("\n(no more input; run is resumable)")
            return STAGE_FAILURE
        manifest, output = runner.feed_user(manifest.run_id, answer)
    return _exit_for(manifest)


def _exit_for(manifest) -> int:
    failed = [s for s, st in manifest.stages.items() if st.state == "failed"]
    return STAGE_FAILURE if failed else 0


def cmd_run(args) -> int:
    runner = _runner(args)
    answers = _transcript_answers(Path(args.transcript).read_text(encoding="utf-8"))
    manifest, output = runner.run_create(_run_inputs(args), _load_configs(args.config))
    manifest, output = runner.drive(manifest.run_id, answers)
    print(f"run {manifest.run_id}: {output['kind']}")
    for stage, st in manifest.stages.items():
        print(f"  {stage:<13} {st.state}" + (f" ({st.reason})" if st.reason else ""))
    if output["kind"] != "done":
        print("run did not finish (transcript exhausted)")
        return STAGE_FAILURE
    return _exit_for(manifest)


def _transcript_answers(text: str) -> list[str]:
    answers = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" in line:
            speaker, _, rest = line.partition(":")
            if speaker.strip() in ("wizard", "action"):
                continue
            if speaker.strip() == "user":
                answers.append(rest.strip())
                continue
        answers.append(line)
    return answers


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    app = create_app(args.data_dir, kb_path=args.kb, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> _Parser:
    p = _Parser(prog="surftreat", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="generate or import scans")
    scan_sub = scan.add_subparsers(dest="scan_command", required=True)
    g = scan_sub.add_parser("gen", help="generate a synthetic scan")
    g.add_argument("--out", required=True)
    g.add_argument("--config", help="JSON file with a scan spec")
    g.add_argument("--seed", type=int)
    g.add_argument("--truth-out", help="write ground-truth defect list JSON")
    g.set_defaults(func=cmd_scan_gen)
    imp = scan_sub.add_parser("import", help="convert a scan file to canonical meters")
    imp.add_argument("--in", dest="input", required=True)
    imp.add_argument("--out", required=True)
    imp.add_argument("--format", choices=("xyz-ascii", "ply"))
    imp.add_argument("--voxel", type=float, help="optional voxel leaf size (m)")
    imp.set_defaults(func=cmd_scan_import)

    d = sub.add_parser("detect", help="detect surface defects in a cloud")
    d.add_argument("--in", dest="input", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--config")
    d.set_defaults(func=cmd_detect)

    pl = sub.add_parser("plan", help="plan a meander tool path")
    pl.add_argument("--in", dest="input", required=True)
    pl.add_argument("--out", required=True)
    pl.add_argument("--config")
    pl.set_defaults(func=cmd_plan)

    sim = sub.add_parser("simulate", help="simulate force-controlled execution")
    sim.add_argument("--path", required=True)
    sim.add_argument("--cloud", required=True)
    sim.add_argument("--out", required=True)
    sim.add_argument("--metrics-out")
    sim.add_argument("--force", type=float, default=5.0, help="contact force setpoint (N)")
    sim.add_argument("--vibration", help="disturbance as '<amplitude_m>@<freq_hz>'")
    sim.add_argument("--config")
    sim.add_argument("--seed", type=int, default=0)
    sim.set_defaults(func=cmd_simulate)

    wiz = sub.add_parser("wizard", help="interactive workflow dialog")
    wiz.add_argument("--data-dir", required=True)
    wiz.add_argument("--cloud")
    wiz.add_argument("--config")
    wiz.add_argument("--kb")
    wiz.set_defaults(func=cmd_wizard)

    run = sub.add_parser("run", help="scripted end-to-end run from a transcript")
    run.add_argument("--data-dir", required=True)
    run.add_argument("--transcript", required=True)
    run.add_argument("--cloud")
    run.add_argument("--config")
    run.add_argument("--kb")
    run.set_defaults(func=cmd_run)

    srv = sub.add_parser("serve", help="serve the HTTP API")
    srv.add_argument("--data-dir", required=True)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8234)
    srv.add_argument("--kb")
    srv.add_argument("--frontend", help="directory with the built web UI")
    srv.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SurftreatError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return STAGE_FAILURE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
