"""
dsl/emitter.py
Model -> .ssmi text. parse_model(emit_model(m)) == m for every valid model.
"""

import re

from core.model import Agg, BinOp, Model, Neg, Number, VarRef, VariableKind
from dsl.parser import KEYWORDS

_BARE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")

# DSL binding strength: + - < * / < unary - < ^ < atoms
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}
_ATOM = 5


def format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value))


def format_label(label: str) -> str:
    if _BARE.match(label) and label not in KEYWORDS:
        return label
    return f'"{label}"'


def _prec(node) -> int:
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return _PREC["neg"]
    return _ATOM


def format_expr(node) -> str:
    if isinstance(node, Number):
        return format_number(node.value)
    if isinstance(node, VarRef):
        return node.name
    if isinstance(node, Agg):
        return f"{node.fn}({node.arg.name})"
    if isinstance(node, Neg):
        inner = format_expr(node.operand)
        return "-" + (f"({inner})" if _prec(node.operand) < _PREC["neg"] else inner)

    p = _PREC[node.op]
    left = format_expr(node.left)
    right = format_expr(node.right)
    if node.op == "^":
        # right-assoc; a signed exponent needs no parentheses
        if _prec(node.left) <= p:
            left = f"({left})"
        if not isinstance(node.right, Neg) and _prec(node.right) < p:
            right = f"({right})"
    else:
        if _prec(node.left) < p:
            left = f"({left})"
        if _prec(node.right) <= p:
            right = f"({right})"
    return f"{left} {node.op} {right}"


def _format_literals(values, repeating: bool) -> str:
    if repeating:
        return "[" + ", ".join(format_number(v) for v in values) + "]"
    return format_number(values[0])


def emit_model(model: Model) -> str:
    lines = []
    if model.dimension is not None:
        dim = model.dimension
        lines.append(f"dimension {dim.name} = [{', '.join(format_label(i) for i in dim.instances)}]")
        lines.append("")

    for var in model.variables:
        if var.kind is VariableKind.OUTPUT:
            head = "calc out"
        else:
            head = var.kind.value
        line = f"{head} {format_label(var.display_label)}"
        if var.repeating:
            line += f" over {model.dimension.name}"
        if var.is_calculated:
            line += " = " + format_expr(var.formula)
        elif var.literals is not None:
            line += " = " + _format_literals(var.literals, var.repeating)
        lines.append(line)

    return "\n".join(lines) + "\n"
