"""Line-oriented triple store with rules and workflow definitions.

File format (UTF-8, one statement per line, ``#`` comments):

    subject predicate object          # object: symbol, "string", 5, true, 5e-4~m
    @rule name: head(A, B) :- pred(A, C), other(B, C).
    @workflow id ... @end             # steps + guarded edges, see workflow.py

Variables in rules are capitalized identifiers, Prolog style.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConsistencyError, ParseError, UnknownRule
from .values import Quantity, Sym, Value
from .workflow import Edge, GuardAtom, WorkflowDef

# Predicates that may carry only one object per subject.
FUNCTIONAL_PREDICATES = {"range", "prompt", "action_kind"}

_SYMBOL_RE = re.compile(r"^[A-Za-z_][\w\-./]*$")
_NUMBER_RE = re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")
_QUANTITY_RE = re.compile(r"^([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)~(\S+)$")


@dataclass(frozen=True)
class Triple:
    s: Sym
    p: Sym
    o: Value


@dataclass
class RuleAtom:
    predicate: str
    args: tuple[str, ...]   # variable names (capitalized) or ground tokens


@dataclass
class Rule:
    name: str
    params: tuple[str, ...]
    body: list[RuleAtom]


@dataclass
class KnowledgeBase:
    triples: list[Triple] = field(default_factory=list)
    rules: dict[str, Rule] = field(default_factory=dict)
    workflows: dict[str, WorkflowDef] = field(default_factory=dict)
    source_sha256: str = ""
    _seen: set = field(default_factory=set, repr=False)
    _by_sp: dict = field(default_factory=dict, repr=False)

    def add(self, s: Sym, p: Sym, o: Value, line: int | None = None) -> None:
        key = (s, p, _hashable(o))
        if key in self._seen:
            return  # exact duplicates are harmless
        if p in FUNCTIONAL_PREDICATES and (s, p) in self._by_sp:
            raise ConsistencyError(
                f"line {line}: conflicting declaration of functional "
                f"predicate ({s} {p}): already {self._by_sp[(s, p)]!r}, now {o!r}")
        self._seen.add(key)
        self._by_sp[(s, p)] = o
        self.triples.append(Triple(s, p, o))

    def query(self, s: str | None = None, p: str | None = None, o: Value | None = None):
        """All matching triples' open slots bound, in insertion order.

        A fully ground pattern yields one empty binding when present.
        """
        out = []
        for t in self.triples:
            if s is not None and t.s != s:
                continue
            if p is not None and t.p != p:
                continue
            if o is not None and not _values_equal(t.o, o):
                continue
            binding = {}
            if s is None:
                binding["s"] = t.s
            if p is None:
                binding["p"] = t.p
            if o is None:
                binding["o"] = t.o
            out.append(binding)
        return out

    def objects(self, s: str, p: str) -> list[Value]:
        return [b["o"] for b in self.query(s=s, p=p)]

    def first_object(self, s: str, p: str) -> Value | None:
        objs = self.objects(s, p)
        return objs[0] if objs else None

    def instances_of(self, cls: str) -> list[Sym]:
        return [b["s"] for b in self.query(p="type", o=Sym(cls))]

    def derive(self, rule_name: str, args: tuple | None = None) -> list[dict]:
        """Evaluate a registered rule; explicit facts with the same
        predicate are included (derivation extends, never hides, them)."""
        if rule_name not in self.rules:
            raise UnknownRule(f"no rule named {rule_name!r}")
        rule = self.rules[rule_name]
        args = args or tuple(None for _ in rule.params)
        if len(args) != len(rule.params):
            raise UnknownRule(f"rule {rule_name} takes {len(rule.params)} arguments")
        # Plain-string arguments mean symbols here; rules join on symbols.
        args = tuple(Sym(a) if isinstance(a, str) and not isinstance(a, Sym) else a
                     for a in args)
        results: list[dict] = []
        seen: set = set()

        def emit(binding: dict) -> None:
            key = tuple(_hashable(binding[p]) for p in rule.params)
            if key not in seen:
                seen.add(key)
                results.append({p: binding[p] for p in rule.params})

        # Explicit facts under the head predicate.
        for t in self.triples:
            if t.p == rule_name and len(rule.params) == 2:
                cand = {rule.params[0]: t.s, rule.params[1]: t.o}
                if _args_match(cand, rule.params, args):
                    emit(cand)

        # Conjunctive evaluation of the body, left to right.
        seed = {}
        for param, arg in zip(rule.params, args):
            if arg is not None:
                seed[param] = arg
        bindings = [seed]
        for atom in rule.body:
            nxt = []
            for b in bindings:
                nxt.extend(_match_atom(self, atom, b))
            bindings = nxt
        for b in bindings:
            if all(p in b for p in rule.params):
                emit(b)
        return results


def _hashable(v: Value):
    return (type(v).__name__, str(v))


def _values_equal(a: Value, b: Value) -> bool:
    if isinstance(a, Sym) != isinstance(b, Sym):
        return False
    return a == b


def _args_match(binding: dict, params: tuple, args: tuple) -> bool:
    for p, a in zip(params, args):
        if a is not None and not _values_equal(binding[p], a):
            return False
    return True


def _is_var(token: str) -> bool:
    return bool(token) and token[0].isupper()


def _match_atom(kb: KnowledgeBase, atom: RuleAtom, binding: dict):
    """Unify one body atom pred(A, B) ~ triples (A, pred, B)."""
    a, b = atom.args
    want_s = binding.get(a) if _is_var(a) else Sym(a)
    want_o = binding.get(b) if _is_var(b) else Sym(b)
    for t in kb.triples:
        if t.p != atom.predicate:
            continue
        if want_s is not None and not _values_equal(t.s, want_s):
            continue
        if want_o is not None and not _values_equal(t.o, want_o):
            continue
        new = dict(binding)
        if _is_var(a):
            new[a] = t.s
        if _is_var(b):
            new[b] = t.o
        yield new


def parse_object(token: str, line: int) -> Value:
    if token.startswith('"'):
        if len(token) < 2 or not token.endswith('"'):
            raise ParseError("unterminated string literal", line=line)
        return token[1:-1]
    if token in ("true", "false"):
        return token == "true"
    m = _QUANTITY_RE.match(token)
    if m:
        return _quantity_from_tokens(m.group(1), m.group(2), line)
    if _NUMBER_RE.match(token):
        f = float(token)
        return int(f) if f.is_integer() and ("e" not in token.lower() and "." not in token) else f
    if _SYMBOL_RE.match(token):
        return Sym(token)
    raise ParseError(f"cannot parse object token {token!r}", line=line)


def _quantity_from_tokens(num: str, unit: str, line: int) -> Quantity:
    from .ground import UNIT_TABLE
    info = UNIT_TABLE.get(unit.lower())
    if info is None:
        raise ParseError(f"unknown unit {unit!r} in quantity", line=line)
    value = float(num)
    return Quantity(value=value, unit=unit, si=value * info["factor"],
                    dimension=info["dimension"])


def _split_statement(line: str, line_no: int) -> list[str]:
    """Tokenize subject/predicate/object honoring quoted strings."""
    tokens = []
    i = 0
    n = len(line)
    while i < n:
        if line[i].isspace():
            i += 1
            continue
        if line[i] == '"':
            j = line.find('"', i + 1)
            if j < 0:
                raise ParseError("unterminated string literal", line=line_no)
            tokens.append(line[i:j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not line[j].isspace():
                j += 1
            tokens.append(line[i:j])
            i = j
    return tokens


_RULE_RE = re.compile(
    r"^@rule\s+(?P<name>\w+)\s*:\s*(?P<head>\w+)\((?P<params>[^)]*)\)\s*:-\s*(?P<body>.+)\.\s*$")
_ATOM_RE = re.compile(r"(\w+)\(([^)]*)\)")


def _parse_rule(line: str, line_no: int) -> Rule:
    m = _RULE_RE.match(line)
    if not m:
        raise ParseError("malformed @rule declaration", line=line_no)
    name = m.group("name")
    if m.group("head") != name:
        raise ParseError("rule head must match the rule name", line=line_no)
    params = tuple(p.strip() for p in m.group("params").split(",") if p.strip())
    body = []
    for pred, arglist in _ATOM_RE.findall(m.group("body")):
        args = tuple(a.strip() for a in arglist.split(","))
        if len(args) != 2:
            raise ParseError(f"rule atom {pred} must be binary", line=line_no)
        body.append(RuleAtom(predicate=pred, args=args))
    if not body:
        raise ParseError("rule body is empty", line=line_no)
    return Rule(name=name, params=params, body=body)


_EDGE_RE = re.compile(r"^(?P<src>\S+)\s*->\s*(?P<dst>\S+)\s*\[(?P<guard>[^\]]*)\]\s*$")
_GUARD_OPS = ("!=", "=", "<", ">")


def _parse_guard(text: str, line_no: int) -> list[GuardAtom]:
    text = text.strip()
    if not text:
        return []
    atoms = []
    for part in text.split(","):
        part = part.strip()
        for op in _GUARD_OPS:
            if op in part:
                key, _, raw = part.partition(op)
                value = parse_object(raw.strip(), line_no)
                atoms.append(GuardAtom(key=key.strip(), op=op, value=value))
                break
        else:
            raise ParseError(f"guard atom {part!r} lacks an operator", line=line_no)
    return atoms


def kb_load(path) -> KnowledgeBase:
    """Parse a KB file; duplicates are dropped, conflicts are fatal."""
    path = Path(path)
    raw = path.read_bytes()
    kb = KnowledgeBase(source_sha256=hashlib.sha256(raw).hexdigest())
    lines = raw.decode("utf-8").splitlines()
    in_workflow: WorkflowDef | None = None
    for line_no, full in enumerate(lines, start=1):
        line = full.split("#", 1)[0].rstrip() if not full.lstrip().startswith("#") else ""
        line = line.strip()
        if not line:
            continue
        if line.startswith("@rule"):
            rule = _parse_rule(line, line_no)
            kb.rules[rule.name] = rule
            continue
        if line.startswith("@workflow"):
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("@workflow needs an id", line=line_no)
            in_workflow = WorkflowDef(workflow_id=parts[1])
            continue
        if line == "@end":
            if in_workflow is None:
                raise ParseError("@end without @workflow", line=line_no)
            in_workflow.validate()
            kb.workflows[in_workflow.workflow_id] = in_workflow
            in_workflow = None
            continue
        if in_workflow is not None:
            if line.startswith("steps"):
                in_workflow.steps.extend(Sym(s) for s in line.split()[1:])
                continue
            m = _EDGE_RE.match(line)
            if not m:
                raise ParseError("expected steps list or 'from -> to [guard]' edge",
                                 line=line_no)
            in_workflow.edges.append(Edge(src=Sym(m.group("src")), dst=Sym(m.group("dst")),
                                          atoms=_parse_guard(m.group("guard"), line_no)))
            continue
        tokens = _split_statement(line, line_no)
        if len(tokens) != 3:
            raise ParseError(f"expected 3 tokens (subject predicate object), got {len(tokens)}",
                             line=line_no)
        subject, predicate = tokens[0], tokens[1]
        if not _SYMBOL_RE.match(subject) or not _SYMBOL_RE.match(predicate):
            raise ParseError("subject and predicate must be bare symbols", line=line_no)
        kb.add(Sym(subject), Sym(predicate), parse_object(tokens[2], line_no), line=line_no)
    if in_workflow is not None:
        raise ParseError("unterminated @workflow block", line=len(lines))
    return kb
