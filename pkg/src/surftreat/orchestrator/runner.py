"""Run lifecycle: create, feed wizard input, execute pending actions.

The wizard decides what happens next; the runner executes emitted action
descriptors against the pipeline modules, records stage statuses and
artifacts, and persists everything atomically after every transition.
CLI and HTTP API both drive exactly this code path.
"""

from __future__ import annotations

import hashlib
import threading
from pathlib import Path

from ..errors import MissingInput, ProtocolError, SurftreatError
from ..wizard import (
    AWAITING_ACTION,
    AWAITING_USER,
    Lexicon,
    Wizard,
    WizardSession,
    kb_load,
    default_kb_path,
    default_lexicon_path,
)
from .manifest import STEP_TO_STAGE, RunManifest, RunStore, atomic_write_text
from .stages import RunConfigs, execute_stage


class RunBusy(SurftreatError):
    code = "run_busy"


class Runner:
    """Binds a data directory, knowledge base and lexicon."""

    def __init__(self, data_dir, kb_path=None, lexicon_path=None):
        self.store = RunStore(data_dir)
        self.kb_path = Path(kb_path) if kb_path else default_kb_path()
        self.kb = kb_load(self.kb_path)
        self.lexicon = Lexicon.load(lexicon_path or default_lexicon_path())
        self.wizard = Wizard(self.kb, self.lexicon)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, run_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(run_id, threading.Lock())

    # -- lifecycle ----------------------------------------------------------

    def run_create(self, inputs: dict | None = None, configs: RunConfigs | None = None):
        inputs = dict(inputs or {})
        configs = configs or RunConfigs()
        configs.kb_sha256 = self.kb.source_sha256
        if inputs.get("cloud_ref") and not Path(inputs["cloud_ref"]).exists():
            raise MissingInput(f"input cloud {inputs['cloud_ref']!r} does not exist")
        manifest = RunManifest.new(inputs, configs.to_dict())
        session, output = self.wizard.new_session(manifest.run_id)
        manifest.session = session.to_dict()
        self.store.create(manifest)
        self._write_transcript(manifest, session)
        self.store.save(manifest)
        return manifest, output

    def get(self, run_id: str) -> RunManifest:
        return self.store.load(run_id)

    def current_output(self, manifest: RunManifest) -> dict:
        session = WizardSession.from_dict(manifest.session)
        if session.status == AWAITING_USER:
            return {"kind": "question", **session.pending_question}
        if session.status == AWAITING_ACTION:
            return {"kind": "action", "action": session.pending_action}
        return {"kind": "done"}

    # -- transitions --------------------------------------------------------

    def feed_user(self, run_id: str, text: str):
        """Deliver one user utterance to the run's wizard."""
        lock = self._lock(run_id)
        if not lock.acquire(blocking=False):
            raise RunBusy(f"run {run_id} is processing another request")
        try:
            manifest = self.store.load(run_id)
            session = WizardSession.from_dict(manifest.session)
            prev_step = session.current_step
            output = self.wizard.step(session, user_text=text)
            self._reconcile_question_stages(manifest, session, prev_step)
            manifest.session = session.to_dict()
            self._write_transcript(manifest, session)
            self.store.save(manifest)
            return manifest, output
        finally:
            lock.release()

    def advance(self, run_id: str):
        """Execute the pending action, if any; one stage per call."""
        lock = self._lock(run_id)
        if not lock.acquire(blocking=False):
            raise RunBusy(f"run {run_id} is processing another request")
        try:
            manifest = self.store.load(run_id)
            session = WizardSession.from_dict(manifest.session)
            if session.status == AWAITING_USER:
                return manifest, {"kind": "question", **session.pending_question}
            if session.status != AWAITING_ACTION:
                raise ProtocolError("run is done; nothing to advance")
            descriptor = session.pending_action
            stage = descriptor["kind"]
            manifest.set_stage(stage, "running")
            self.store.save(manifest)
            try:
                result = execute_stage(stage, self.store, manifest,
                                       RunConfigs.from_dict(manifest.configs),
                                       session.belief)
            except SurftreatError as exc:
                result = {"ok": False, "error": f"{exc.code}: {exc}",
                          "belief": {}, "summary": f"{stage} failed: {exc}"}
            result.setdefault("action", stage)
            if result.get("ok"):
                manifest.set_stage(stage, "ok")
            else:
                manifest.set_stage(stage, "failed", reason=result.get("error") or "failed")
            prev_step = session.current_step
            output = self.wizard.step(session, action_result=result)
            self._reconcile_question_stages(manifest, session, prev_step)
            manifest.session = session.to_dict()
            self._write_transcript(manifest, session)
            self.store.save(manifest)
            return manifest, output
        finally:
            lock.release()

    def _reconcile_question_stages(self, manifest: RunManifest, session: WizardSession,
                                   prev_step: str | None) -> None:
        """Map wizard movement through question steps onto stage statuses."""
        step = session.current_step
        if prev_step == "UserValidation" and step != "UserValidation":
            approved = session.belief.get("sim_approved") is True
            manifest.set_stage("validate", "ok" if approved else "failed",
                               reason=None if approved else "rejected by user")
        if prev_step == "QualityControl" and step != "QualityControl":
            manifest.set_stage("qc", "ok")
        if session.status == "done" and manifest.stages["qc"].state != "ok":
            manifest.set_stage("qc", "ok")
        if prev_step == "QualityControl" and step == "PathPlanning":
            # Another pass: downstream stages run again.
            manifest.reset_stages(("plan", "simulate", "validate", "execute", "qc"))

    def _write_transcript(self, manifest: RunManifest, session: WizardSession) -> None:
        path = self.store.artifact_dir(manifest.run_id) / "transcript.txt"
        text = session.transcript_text()
        atomic_write_text(path, text)
        manifest.artifacts["transcript"] = {"path": "artifacts/transcript.txt",
                                            "sha256": hashlib.sha256(text.encode()).hexdigest()}

    # -- batch driving ------------------------------------------------------

    def drive(self, run_id: str, answers: list[str], max_steps: int = 200):
        """Run until done or out of answers; returns (manifest, last output).

        Pending actions are executed as they appear; each answer feeds one
        question. Used by both the CLI `run` command and tests.
        """
        queue = list(answers)
        manifest = self.store.load(run_id)
        output = self.current_output(manifest)
        for _ in range(max_steps):
            if output["kind"] == "done":
                break
            if output["kind"] == "action":
                manifest, output = self.advance(run_id)
            elif output["kind"] == "question":
                if not queue:
                    break
                manifest, output = self.feed_user(run_id, queue.pop(0))
        return manifest, output
