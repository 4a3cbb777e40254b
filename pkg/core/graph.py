"""
core/graph.py
The model as a dependency graph: shape validation (scalar vs repeating)
and the deterministic evaluation/layout order.
"""

import logging
from dataclasses import dataclass

from core.model import Agg, BinOp, CycleDetected, Model, Neg, ShapeError, VarRef, references

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShapeViolation:
    variable: str
    operand: str
    message: str

    def __str__(self):
        return f"{self.variable}: {self.message}"


# ── Shapes ────────────────────────────────────────────────────────────────────

def check_shapes(model: Model) -> list:
    """
    A scalar formula may reach a repeating variable only through an
    aggregate; aggregates must range over repeating variables; repeating
    formulas may mix scalars (broadcast) and repeating operands freely.
    """
    repeating = {v.canonical_name: v.repeating for v in model.variables}
    violations = []

    for var in model.calculated:
        name = var.canonical_name

        def visit(node, inside_agg=False):
            if isinstance(node, VarRef):
                if node.name not in repeating:
                    violations.append(ShapeViolation(name, node.name, f"unknown variable '{node.name}'"))
                elif repeating[node.name] and not var.repeating and not inside_agg:
                    violations.append(ShapeViolation(
                        name, node.name,
                        f"scalar formula uses repeating '{node.name}' outside an aggregate",
                    ))
            elif isinstance(node, Neg):
                visit(node.operand)
            elif isinstance(node, BinOp):
                visit(node.left)
                visit(node.right)
            elif isinstance(node, Agg):
                arg = node.arg.name
                if arg in repeating and not repeating[arg]:
                    violations.append(ShapeViolation(
                        name, arg, f"{node.fn}({arg}) aggregates a scalar variable",
                    ))
                visit(node.arg, inside_agg=True)

        visit(var.formula)

    return violations


# ── Ordering ──────────────────────────────────────────────────────────────────

def dependencies(model: Model) -> dict:
    """name -> referenced names (first-appearance order), for every variable."""
    return {
        v.canonical_name: references(v.formula) if v.formula is not None else []
        for v in model.variables
    }


def toposort(model: Model) -> list:
    """
    Inputs and Parameters first, in declaration order; then every calculated
    variable after everything it references. Calculated variables are
    visited depth-first in declaration order and their references in
    first-appearance order, so a variable lands right after the chain that
    feeds it.
    """
    deps = dependencies(model)
    order = [v.canonical_name for v in model.variables if not v.is_calculated]
    done = set(order)
    stack = []

    def visit(name):
        if name in done:
            return
        if name in stack:
            raise CycleDetected(stack[stack.index(name):])
        stack.append(name)
        for dep in deps.get(name, []):
            if dep in deps:
                visit(dep)
        stack.pop()
        done.add(name)
        order.append(name)

    for var in model.calculated:
        visit(var.canonical_name)

    logger.debug("toposort: %s", order)
    return order


def validate(model: Model) -> list:
    """Shape and cycle checks together; returns the toposort order."""
    violations = check_shapes(model)
    if violations:
        raise ShapeError(violations)
    return toposort(model)
