"""
core/model.py
Domain types shared by every stage: variables, the single repeating
dimension, formula expressions, and the naming discipline that turns
display labels into spreadsheet names.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional, Union


# ── Errors ────────────────────────────────────────────────────────────────────

class SsmiError(Exception):
    """Base class for every error raised by this package."""


class EmptyLabel(SsmiError):
    pass


class NameCollision(SsmiError):
    def __init__(self, name: str, message: str = ""):
        self.name = name
        super().__init__(message or f"name collision on '{name}'")


class CycleDetected(SsmiError):
    def __init__(self, cycle: list):
        self.cycle = list(cycle)
        super().__init__("dependency cycle: " + " -> ".join(self.cycle + self.cycle[:1]))


class ShapeError(SsmiError):
    def __init__(self, violations: list):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


# ── Names ─────────────────────────────────────────────────────────────────────

_DISALLOWED = re.compile(r"[^A-Za-z0-9_]")

# Names a spreadsheet would read as a cell address, in either notation.
_A1_LIKE = re.compile(r"^[A-Za-z]{1,3}[0-9]+$")
_R1C1_LIKE = re.compile(r"^([Rr][0-9]*)?([Cc][0-9]*)?$")

ENTRY_SUFFIX = "__entry"


def mangle(label: str) -> str:
    """
    Turn a display label into a name the way "Create Name from Selection"
    does: every character outside [A-Za-z0-9_] becomes "_", and a leading
    digit gets a "_" prefix.

        mangle("Total Demand")  -> "Total_Demand"
        mangle("Cost ($/unit)") -> "Cost____unit_"
    """
    if label is None or not label.strip():
        raise EmptyLabel("label is empty")
    name = _DISALLOWED.sub("_", label.strip())
    if name[0].isdigit():
        name = "_" + name
    return name


def looks_like_cell_reference(name: str) -> bool:
    """True for names a spreadsheet would parse as A1 or R1C1 addresses."""
    return bool(_A1_LIKE.match(name)) or bool(name and _R1C1_LIKE.match(name))


# ── Expressions ───────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Agg:
    fn: str
    arg: VarRef


Expr = Union[Number, VarRef, Neg, BinOp, Agg]

BINARY_OPS = ("+", "-", "*", "/", "^")
AGGREGATES = ("SUM",)  # extension point: MIN/MAX/AVERAGE would slot in here


def walk(expr: Expr) -> Iterator[Expr]:
    """Pre-order, left-to-right traversal."""
    yield expr
    if isinstance(expr, Neg):
        yield from walk(expr.operand)
    elif isinstance(expr, BinOp):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, Agg):
        yield expr.arg


def references(expr: Expr) -> list:
    """Referenced names in first-appearance order, aggregate arguments included."""
    seen = []
    for node in walk(expr):
        if isinstance(node, VarRef) and node.name not in seen:
            seen.append(node.name)
    return seen


def direct_references(expr: Expr) -> list:
    """Like references(), but skips names that only appear inside an aggregate."""
    seen = []

    def visit(node):
        if isinstance(node, VarRef):
            if node.name not in seen:
                seen.append(node.name)
        elif isinstance(node, Neg):
            visit(node.operand)
        elif isinstance(node, BinOp):
            visit(node.left)
            visit(node.right)

    visit(expr)
    return seen


def operator_kinds(expr: Expr) -> list:
    """Distinct operator/function tokens of a formula, first-appearance order."""
    kinds = []
    for node in walk(expr):
        token = None
        if isinstance(node, Neg):
            token = "neg"
        elif isinstance(node, BinOp):
            token = node.op
        elif isinstance(node, Agg):
            token = node.fn
        if token and token not in kinds:
            kinds.append(token)
    return kinds


# ── Model ─────────────────────────────────────────────────────────────────────

class VariableKind(str, Enum):
    INPUT = "input"
    PARAMETER = "param"
    CALCULATED = "calc"
    OUTPUT = "out"

    @property
    def is_calculated(self) -> bool:
        return self in (VariableKind.CALCULATED, VariableKind.OUTPUT)


@dataclass(frozen=True)
class Dimension:
    name: str
    instances: tuple

    def __post_init__(self):
        if not self.instances:
            raise SsmiError(f"dimension {self.name} has no instances")
        if len(set(self.instances)) != len(self.instances):
            raise SsmiError(f"dimension {self.name} repeats an instance label")

    @property
    def size(self) -> int:
        return len(self.instances)


@dataclass(frozen=True)
class Variable:
    display_label: str
    canonical_name: str
    kind: VariableKind
    repeating: bool = False
    formula: Optional[Expr] = None
    literals: Optional[tuple] = None

    @property
    def name(self) -> str:
        return self.canonical_name

    @property
    def is_calculated(self) -> bool:
        return self.kind.is_calculated


def make_variable(label: str, kind: VariableKind, repeating: bool = False,
                  formula: Optional[Expr] = None, literals=None) -> Variable:
    """Build a Variable, deriving the canonical name from the label."""
    if kind.is_calculated and formula is None:
        raise SsmiError(f"calculated variable '{label}' needs a formula")
    if not kind.is_calculated and formula is not None:
        raise SsmiError(f"{kind.name.lower()} '{label}' cannot carry a formula")
    if kind is VariableKind.PARAMETER and not literals:
        raise SsmiError(f"parameter '{label}' needs a value")
    return Variable(
        display_label=label,
        canonical_name=mangle(label),
        kind=kind,
        repeating=repeating,
        formula=formula,
        literals=tuple(float(x) for x in literals) if literals is not None else None,
    )


@dataclass(frozen=True)
class Model:
    dimension: Optional[Dimension]
    variables: tuple = field(default_factory=tuple)

    def __post_init__(self):
        seen = {}
        for var in self.variables:
            if var.canonical_name in seen:
                raise NameCollision(
                    var.canonical_name,
                    f"'{var.display_label}' and '{seen[var.canonical_name]}' "
                    f"both mangle to '{var.canonical_name}'",
                )
            seen[var.canonical_name] = var.display_label
            if var.repeating and self.dimension is None:
                raise SsmiError(f"'{var.display_label}' repeats but the model has no dimension")
            if var.literals is not None:
                expected = self.dimension.size if var.repeating else 1
                if len(var.literals) != expected:
                    raise SsmiError(
                        f"'{var.display_label}' has {len(var.literals)} value(s), expected {expected}"
                    )

    def __contains__(self, name: str) -> bool:
        return any(v.canonical_name == name for v in self.variables)

    def get(self, name: str) -> Variable:
        for var in self.variables:
            if var.canonical_name == name:
                return var
        raise KeyError(name)

    @property
    def names(self) -> list:
        return [v.canonical_name for v in self.variables]

    def of_kind(self, *kinds: VariableKind) -> list:
        return [v for v in self.variables if v.kind in kinds]

    @property
    def calculated(self) -> list:
        return [v for v in self.variables if v.is_calculated]


class Severity(str, Enum):
    ERROR = "error"
    WARN = "warn"
