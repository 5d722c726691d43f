"""Workflow-as-data: steps chained by guarded succeedence edges."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import AmbiguousSuccessor, InvalidParameter, NoSuccessor
from .values import Sym, Value

DONE = Sym("Done")

_OPS = {
    "=": lambda a, b: _eq(a, b),
    "!=": lambda a, b: not _eq(a, b),
    "<": lambda a, b: _num(a) < _num(b),
    ">": lambda a, b: _num(a) > _num(b),
}


def _eq(a: Value, b: Value) -> bool:
    if isinstance(a, bool) or isinstance(b, bool):
        return a is b if isinstance(a, bool) and isinstance(b, bool) else False
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return float(a) == float(b)
    return str(a) == str(b)


def _num(v: Value) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidParameter(f"guard compares non-numeric value {v!r}")
    return float(v)


@dataclass
class GuardAtom:
    key: str
    op: str
    value: Value

    def holds(self, belief: dict) -> bool:
        if self.key not in belief:
            return False
        return _OPS[self.op](belief[self.key], self.value)

    def __str__(self) -> str:
        return f"{self.key} {self.op} {self.value}"


@dataclass
class Edge:
    src: Sym
    dst: Sym
    atoms: list[GuardAtom]

    def holds(self, belief: dict) -> bool:
        return all(a.holds(belief) for a in self.atoms)


@dataclass
class WorkflowDef:
    workflow_id: str
    steps: list[Sym] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)

    def validate(self) -> None:
        declared = set(self.steps)
        if not declared:
            raise InvalidParameter(f"workflow {self.workflow_id} declares no steps")
        for e in self.edges:
            if e.src not in declared or e.dst not in declared:
                raise InvalidParameter(
                    f"workflow {self.workflow_id}: edge {e.src}->{e.dst} uses undeclared step")
        if not self.terminals():
            raise InvalidParameter(f"workflow {self.workflow_id} has no terminal step")

    def outgoing(self, step: str) -> list[Edge]:
        return [e for e in self.edges if e.src == step]

    def terminals(self) -> list[Sym]:
        sources = {e.src for e in self.edges}
        return [s for s in self.steps if s not in sources]

    def guard_keys(self) -> list[str]:
        keys: list[str] = []
        for e in self.edges:
            for a in e.atoms:
                if a.key not in keys:
                    keys.append(a.key)
        return keys


def next_task(workflow: WorkflowDef, belief: dict) -> Sym:
    """Successor of the belief's current step; DONE at a terminal.

    Guards of the outgoing edges must partition: exactly one may hold.
    """
    step = belief.get("current_step")
    if step is None:
        raise NoSuccessor("belief does not record a current step")
    edges = workflow.outgoing(step)
    if not edges:
        return DONE
    holding = [e for e in edges if e.holds(belief)]
    if len(holding) > 1:
        guards = "; ".join(" & ".join(map(str, e.atoms)) or "[]" for e in holding)
        raise AmbiguousSuccessor(f"step {step}: {len(holding)} guards hold ({guards})")
    if not holding:
        raise NoSuccessor(f"step {step}: no outgoing guard holds for belief")
    return holding[0].dst
