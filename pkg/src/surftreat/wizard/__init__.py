"""Knowledge base, grounding and the interactive workflow wizard."""

from .ground import (
    FUZZY_THRESHOLD,
    Lexicon,
    NO_MATCH,
    NoMatch,
    damerau_levenshtein,
    ground_concept,
    match_symbol,
    normalize,
    parse_quantity,
    similarity,
)
from .kb import KnowledgeBase, Rule, Triple, kb_load
from .session import (
    AWAITING_ACTION,
    AWAITING_USER,
    DONE_STATUS,
    Wizard,
    WizardSession,
    default_kb_path,
    default_lexicon_path,
    render_prompt,
)
from .values import Quantity, Sym, value_from_json, value_to_json, value_to_text
from .workflow import DONE, Edge, GuardAtom, WorkflowDef
from .workflow import next_task as _next_task_wf


def next_task(kb: KnowledgeBase, workflow_id: str, belief: dict):
    """Successor step in the KB's workflow for the given belief state."""
    return _next_task_wf(kb.workflows[workflow_id], belief)


def derive(kb: KnowledgeBase, rule_name: str, args: tuple | None = None):
    return kb.derive(rule_name, args)


def query(kb: KnowledgeBase, s=None, p=None, o=None):
    return kb.query(s=s, p=p, o=o)


__all__ = [
    "AWAITING_ACTION",
    "AWAITING_USER",
    "DONE",
    "DONE_STATUS",
    "Edge",
    "FUZZY_THRESHOLD",
    "GuardAtom",
    "KnowledgeBase",
    "Lexicon",
    "NO_MATCH",
    "NoMatch",
    "Quantity",
    "Rule",
    "Sym",
    "Triple",
    "Wizard",
    "WizardSession",
    "WorkflowDef",
    "damerau_levenshtein",
    "default_kb_path",
    "default_lexicon_path",
    "derive",
    "ground_concept",
    "kb_load",
    "match_symbol",
    "next_task",
    "normalize",
    "parse_quantity",
    "query",
    "render_prompt",
    "similarity",
    "value_from_json",
    "value_to_json",
    "value_to_text",
]
