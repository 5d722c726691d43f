"""Value model for the knowledge base and belief state.

Symbols are interned names (``Sym``); literals are plain strings, numbers,
booleans and unit-tagged quantities. Everything round-trips through JSON
with type tags so sessions can be persisted and replayed.
"""

from __future__ import annotations

from dataclasses import dataclass


class Sym(str):
    """A bare identifier, distinct from a quoted string literal."""

    __slots__ = ()

    def __repr__(self) -> str:
        return f"Sym({str.__repr__(self)})"


@dataclass(frozen=True)
class Quantity:
    value: float
    unit: str
    si: float
    dimension: str

    def __str__(self) -> str:
        return f"{self.value:g}~{self.unit}"


Value = Sym | str | bool | int | float | Quantity


def value_to_json(v: Value):
    if isinstance(v, Sym):
        return {"~sym": str(v)}
    if isinstance(v, Quantity):
        return {"~qty": {"value": v.value, "unit": v.unit, "si": v.si,
                         "dimension": v.dimension}}
    return v


def value_from_json(v) -> Value:
    if isinstance(v, dict):
        if "~sym" in v:
            return Sym(v["~sym"])
        if "~qty" in v:
            q = v["~qty"]
            return Quantity(q["value"], q["unit"], q["si"], q["dimension"])
    return v


def value_to_text(v: Value) -> str:
    """Human-readable rendering for prompts and transcripts."""
    if isinstance(v, Quantity):
        return f"{v.value:g} {v.unit}"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)
