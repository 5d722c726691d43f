"""Utterance grounding: lexicon lookup, fuzzy matching, quantity parsing."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ParseError
from .values import Quantity, Sym

# Canonical unit table; lexicon files may extend it.
UNIT_TABLE: dict[str, dict] = {
    "m": {"dimension": "length", "factor": 1.0},
    "cm": {"dimension": "length", "factor": 1e-2},
    "mm": {"dimension": "length", "factor": 1e-3},
    "um": {"dimension": "length", "factor": 1e-6},
    "µm": {"dimension": "length", "factor": 1e-6},
    "n": {"dimension": "force", "factor": 1.0},
    "kn": {"dimension": "force", "factor": 1e3},
    "nm": {"dimension": "torque", "factor": 1.0},
    "s": {"dimension": "time", "factor": 1.0},
    "ms": {"dimension": "time", "factor": 1e-3},
    "hz": {"dimension": "frequency", "factor": 1.0},
    "rpm": {"dimension": "angular_speed", "factor": 0.10471975511965977},
    "m/s": {"dimension": "speed", "factor": 1.0},
    "mm/s": {"dimension": "speed", "factor": 1e-3},
    "deg": {"dimension": "angle", "factor": 0.017453292519943295},
}

FUZZY_THRESHOLD = 0.8


class NoMatch:
    """Sentinel result: grounding failed, re-prompt the user."""

    def __repr__(self) -> str:
        return "NoMatch"


NO_MATCH = NoMatch()


@dataclass
class Lexicon:
    """Surface forms per concept plus the unit table."""

    concepts: dict[str, list[str]] = field(default_factory=dict)
    units: dict[str, dict] = field(default_factory=lambda: dict(UNIT_TABLE))

    @classmethod
    def load(cls, path) -> "Lexicon":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        units = dict(UNIT_TABLE)
        units.update({k.lower(): v for k, v in data.get("units", {}).items()})
        return cls(concepts={k: list(v) for k, v in data.get("concepts", {}).items()},
                   units=units)

    def forms(self, concept: str) -> list[str]:
        return self.concepts.get(concept, [concept.lower()])

    def primary_form(self, concept: str) -> str:
        return self.forms(concept)[0]


def normalize(text: str) -> str:
    text = text.strip().lower()
    text = re.sub(r"[^\w\s./+-]", " ", text)
    return re.sub(r"\s+", " ", text).strip()


def damerau_levenshtein(a: str, b: str) -> int:
    """Optimal string alignment distance (edits + adjacent transpositions)."""
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return max(la, lb)
    prev2: list[int] = []
    prev = list(range(lb + 1))
    for i in range(1, la + 1):
        cur = [i] + [0] * lb
        for j in range(1, lb + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            if i > 1 and j > 1 and a[i - 1] == b[j - 2] and a[i - 2] == b[j - 1]:
                cur[j] = min(cur[j], prev2[j - 2] + 1)
        prev2, prev = prev, cur
    return prev[lb]


def similarity(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    return 1.0 - damerau_levenshtein(a, b) / max(len(a), len(b))


_NUM_UNIT_RE = re.compile(
    r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S+)\s*$")


def parse_quantity(text: str, lexicon: Lexicon | None = None) -> Quantity:
    """'0.5 mm' -> Quantity(0.5, mm, 5e-4 m). Word numerals are out of scope."""
    units = lexicon.units if lexicon is not None else UNIT_TABLE
    m = _NUM_UNIT_RE.match(text)
    if not m:
        raise ParseError(f"expected '<number> <unit>', got {text!r}")
    num, unit_token = m.group(1), m.group(2)
    info = units.get(unit_token.lower())
    if info is None:
        raise ParseError(f"unknown unit {unit_token!r}")
    value = float(num)
    return Quantity(value=value, unit=unit_token, si=value * info["factor"],
                    dimension=info["dimension"])


def _unique_winner(hits: list[tuple[str, float]]):
    """Best-scoring concept, None on a tie for the top score."""
    if not hits:
        return None
    hits = sorted(hits, key=lambda h: -h[1])
    if len(hits) > 1 and hits[0][1] == hits[1][1] and hits[0][0] != hits[1][0]:
        return None
    return hits[0][0]


def match_symbol(utterance: str, candidates: list[str], lexicon: Lexicon):
    """Resolve an utterance against candidate concepts' surface forms.

    Stages: exact full-string match, per-token match, then fuzzy
    (Damerau-Levenshtein similarity >= 0.8 with a unique winner).
    """
    text = normalize(utterance)
    if not text:
        return NO_MATCH
    # normalize keeps ./+- for quantities; symbols drop edge punctuation
    tokens = [t.strip("./+-") for t in text.split()]

    exact = {c for c in candidates if text in lexicon.forms(c)}
    if len(exact) == 1:
        return Sym(exact.pop())
    if len(exact) > 1:
        return NO_MATCH

    token_hits = {c for c in candidates
                  for form in lexicon.forms(c) if form in tokens}
    if len(token_hits) == 1:
        return Sym(token_hits.pop())
    if len(token_hits) > 1:
        return NO_MATCH

    fuzzy: list[tuple[str, float]] = []
    for c in candidates:
        score = max(similarity(text, form) for form in lexicon.forms(c))
        if score >= FUZZY_THRESHOLD:
            fuzzy.append((c, score))
    winner = _unique_winner(fuzzy)
    return Sym(winner) if winner is not None else NO_MATCH


def match_boolean(utterance: str, lexicon: Lexicon):
    got = match_symbol(utterance, ["true", "false"], lexicon)
    if isinstance(got, NoMatch):
        return NO_MATCH
    return got == "true"


def match_integer(utterance: str):
    for token in normalize(utterance).split():
        if re.fullmatch(r"[-+]?\d+", token):
            return int(token)
    return NO_MATCH


def ground_concept(utterance: str, concept: str, lexicon: Lexicon, kb) -> object:
    """Ground one concept from user text; NoMatch triggers a re-prompt.

    The concept's declared range (in the KB) selects the strategy: a class
    symbol matches its instances via the lexicon; Boolean/Integer and the
    quantity ranges parse typed literals.
    """
    rng = kb.first_object(concept, "range")
    rng = str(rng) if rng is not None else "String"
    if rng == "Boolean":
        return match_boolean(utterance, lexicon)
    if rng == "Integer":
        return match_integer(utterance)
    if rng.endswith("Quantity"):
        want = rng[: -len("Quantity")].lower()
        try:
            q = parse_quantity(utterance, lexicon)
        except ParseError:
            return NO_MATCH
        if want and q.dimension != want:
            return NO_MATCH
        return q
    if rng == "String":
        text = utterance.strip()
        return text if text else NO_MATCH
    candidates = [str(s) for s in kb.instances_of(rng)]
    if not candidates:
        return NO_MATCH
    return match_symbol(utterance, candidates, lexicon)
