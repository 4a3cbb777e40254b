"""
transform/decompose.py
The "never mix operators or functions in a formula" rule: find formulas
that break it, and rewrite a model so that none do.
"""

import logging
from dataclasses import dataclass, replace

from core.model import (
    Agg, BinOp, Model, NameCollision, Neg, Number, Severity, VarRef,
    VariableKind, direct_references, make_variable, mangle, operator_kinds,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ComplexityFinding:
    variable: str
    distinct_ops: int
    ops: tuple
    severity: Severity

    def __str__(self):
        return f"{self.variable}: mixes {', '.join(self.ops)} ({self.severity.value})"


def complexity_check(model: Model, strict: bool = False) -> list:
    """One finding per formula using more than one operator/function kind."""
    severity = Severity.ERROR if strict else Severity.WARN
    findings = []
    for var in model.calculated:
        ops = operator_kinds(var.formula)
        if len(ops) > 1:
            findings.append(ComplexityFinding(var.canonical_name, len(ops), tuple(ops), severity))
    return findings


# ── Decomposition ─────────────────────────────────────────────────────────────

def _kind(node):
    if isinstance(node, BinOp):
        return node.op
    if isinstance(node, Neg):
        return "neg"
    if isinstance(node, Agg):
        return node.fn
    return None


def decompose(model: Model) -> Model:
    """
    Split every mixed formula into single-kind formulas. Foreign-kind
    subexpressions become Calculated variables "<parent label> term k",
    numbered depth-first left to right and declared right before the parent.

    Each intermediate is evaluated on its own, so one that overflows raises
    DomainError even where the parent formula absorbed the infinity
    (`1 / x ^ 400` evaluates to 0; its term `x ^ 400` does not evaluate).
    """
    taken = set(model.names)
    repeating = {v.canonical_name: v.repeating for v in model.variables}
    variables = []

    for var in model.variables:
        if not var.is_calculated or len(operator_kinds(var.formula)) <= 1:
            variables.append(var)
            continue

        extracted = []

        def flatten(node):
            top = _kind(node)

            def chain(n):
                if isinstance(n, BinOp) and n.op == top:
                    return BinOp(n.op, chain(n.left), chain(n.right))
                if isinstance(n, Neg) and top == "neg":
                    return Neg(chain(n.operand))
                if n is node:
                    return n
                return extract(n)

            return chain(node)

        def extract(n):
            if isinstance(n, (Number, VarRef)):
                return n
            inner = flatten(n)
            label = f"{var.display_label} term {len(extracted) + 1}"
            name = mangle(label)
            if name in taken:
                raise NameCollision(name, f"generated name '{name}' already exists")
            taken.add(name)
            shaped = any(repeating.get(ref, False) for ref in direct_references(inner))
            repeating[name] = shaped
            extracted.append(make_variable(label, VariableKind.CALCULATED, shaped, inner))
            return VarRef(name)

        formula = flatten(var.formula)
        logger.info("decomposed %s into %d intermediate(s)", var.canonical_name, len(extracted))
        variables.extend(extracted)
        variables.append(replace(var, formula=formula))

    return Model(model.dimension, tuple(variables))
