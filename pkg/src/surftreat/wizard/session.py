"""Interactive grounding dialog driving the treatment workflow.

The session is a pure state machine: a prompt or an action descriptor is
always pending (unless done), user text grounds exactly one concept, and
action results fold their outcome into the belief state before the
workflow advances. Replaying a transcript reproduces the session exactly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ProtocolError
from .ground import Lexicon, NoMatch, ground_concept
from .kb import KnowledgeBase
from .values import Sym, Value, value_from_json, value_to_json, value_to_text
from .workflow import DONE, next_task

AWAITING_USER = "awaiting_user"
AWAITING_ACTION = "awaiting_action"
DONE_STATUS = "done"


@dataclass
class WizardSession:
    session_id: str
    workflow_id: str
    belief: dict[str, Value] = field(default_factory=dict)
    current_step: str | None = None
    status: str = AWAITING_USER
    pending_question: dict | None = None   # {concept, prompt}
    pending_action: dict | None = None     # {kind, step, belief snapshot}
    transcript: list[tuple[str, str]] = field(default_factory=list)
    action_done: bool = False

    def say(self, speaker: str, text: str) -> None:
        self.transcript.append((speaker, text))

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "workflow_id": self.workflow_id,
            "belief": {k: value_to_json(v) for k, v in self.belief.items()},
            "current_step": self.current_step,
            "status": self.status,
            "pending_question": self.pending_question,
            "pending_action": self.pending_action,
            "transcript": [list(t) for t in self.transcript],
            "action_done": self.action_done,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WizardSession":
        return cls(
            session_id=data["session_id"],
            workflow_id=data["workflow_id"],
            belief={k: value_from_json(v) for k, v in data["belief"].items()},
            current_step=data["current_step"],
            status=data["status"],
            pending_question=data["pending_question"],
            pending_action=data["pending_action"],
            transcript=[tuple(t) for t in data["transcript"]],
            action_done=data["action_done"],
        )

    def transcript_text(self) -> str:
        return "\n".join(f"{speaker}: {text}" for speaker, text in self.transcript) + "\n"


_PLACEHOLDER_RE = re.compile(r"\{(\w+)\}")


def render_prompt(template: str, belief: dict) -> str:
    def repl(m):
        v = belief.get(m.group(1))
        return value_to_text(v) if v is not None else "?"
    return _PLACEHOLDER_RE.sub(repl, template)


class Wizard:
    """Binds a knowledge base and lexicon to session state transitions."""

    def __init__(self, kb: KnowledgeBase, lexicon: Lexicon, workflow_id: str = "main"):
        if workflow_id not in kb.workflows:
            raise ProtocolError(f"KB has no workflow {workflow_id!r}")
        self.kb = kb
        self.lexicon = lexicon
        self.workflow = kb.workflows[workflow_id]

    def new_session(self, session_id: str) -> tuple[WizardSession, dict]:
        session = WizardSession(session_id=session_id, workflow_id=self.workflow.workflow_id,
                                current_step=str(self.workflow.steps[0]))
        return session, self._advance(session)

    def required_params(self, step: str) -> list[str]:
        return [str(o) for o in self.kb.objects(step, "requires_param")]

    def cleared_params(self, step: str) -> list[str]:
        return [str(o) for o in self.kb.objects(step, "clears_param")]

    def action_kind(self, step: str):
        kind = self.kb.first_object(step, "action_kind")
        return str(kind) if kind is not None else None

    def step(self, session: WizardSession, user_text: str | None = None,
             action_result: dict | None = None) -> dict:
        """Feed one input (user text or action result) and advance."""
        if (user_text is None) == (action_result is None):
            raise ProtocolError("provide exactly one of user text or action result")
        if session.status == DONE_STATUS:
            raise ProtocolError("session is done")
        if user_text is not None:
            if session.status != AWAITING_USER or session.pending_question is None:
                raise ProtocolError("no question pending; cannot accept user text")
            session.say("user", user_text)
            concept = session.pending_question["concept"]
            value = ground_concept(user_text, concept, self.lexicon, self.kb)
            if isinstance(value, NoMatch):
                # Unusable input is discarded and the question repeated.
                prompt = session.pending_question["prompt"]
                session.say("wizard", prompt)
                return {"kind": "question", "concept": concept, "prompt": prompt}
            self._set_belief(session, concept, value)
            session.pending_question = None
        else:
            if session.status != AWAITING_ACTION or session.pending_action is None:
                raise ProtocolError("no action pending; cannot accept an action result")
            session.say("action", json.dumps(action_result, sort_keys=True))
            for key, raw in action_result.get("belief", {}).items():
                session.belief[key] = value_from_json(raw)
            session.pending_action = None
            session.action_done = True
        return self._advance(session)

    def _set_belief(self, session: WizardSession, key: str, value: Value) -> None:
        session.belief[key] = value
        for target in self.kb.objects(key, "init_key"):
            session.belief[str(target)] = value

    def _advance(self, session: WizardSession) -> dict:
        while True:
            step = session.current_step
            missing = [p for p in self.required_params(step) if p not in session.belief]
            if missing:
                concept = missing[0]
                template = self.kb.first_object(concept, "prompt") or f"Please provide {concept}."
                prompt = render_prompt(str(template), session.belief)
                session.pending_question = {"concept": concept, "prompt": prompt}
                session.status = AWAITING_USER
                session.say("wizard", prompt)
                return {"kind": "question", "concept": concept, "prompt": prompt}
            kind = self.action_kind(step)
            if kind is not None and not session.action_done:
                descriptor = {"kind": kind, "step": step,
                              "belief": {k: value_to_json(v) for k, v in session.belief.items()}}
                session.pending_action = descriptor
                session.status = AWAITING_ACTION
                return {"kind": "action", "action": descriptor}
            session.belief["current_step"] = Sym(step)
            nxt = next_task(self.workflow, session.belief)
            if nxt == DONE:
                session.status = DONE_STATUS
                session.say("wizard", "Workflow complete.")
                return {"kind": "done"}
            session.current_step = str(nxt)
            session.action_done = False
            for key in self.cleared_params(str(nxt)):
                session.belief.pop(key, None)


def default_kb_path() -> Path:
    return Path(__file__).parent / "data" / "default.kb"


def default_lexicon_path() -> Path:
    return Path(__file__).parent / "data" / "lexicon.json"
