"""
engine/evaluator.py
Numeric evaluation of a model. Scalars are float64, repeating variables are
float64 vectors indexed by dimension instance; scalars broadcast.
"""

import logging
from typing import Mapping, Optional

import numpy as np

from core.graph import toposort
from core.model import Agg, BinOp, Model, Neg, Number, SsmiError, VarRef, VariableKind

logger = logging.getLogger(__name__)


class MissingInput(SsmiError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"input '{name}' has no value and no default")


class DomainError(SsmiError):
    def __init__(self, name: str, detail: str = "non-finite result"):
        self.name = name
        super().__init__(f"{name}: {detail}")


class UnknownVariable(SsmiError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown variable '{name}'")


class InputShapeError(SsmiError):
    def __init__(self, name: str, detail: str):
        self.name = name
        super().__init__(f"input '{name}': {detail}")


_OPS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


class Valuation(dict):
    """canonical name -> float (scalar) or tuple of floats (repeating)."""

    def vector(self, name: str) -> np.ndarray:
        return np.asarray(self[name], dtype=np.float64)


def _input_value(var, supplied, size: Optional[int]):
    if var.canonical_name in supplied:
        try:
            arr = np.asarray(supplied[var.canonical_name], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise InputShapeError(var.canonical_name, "not a number") from exc
        if not var.repeating:
            if arr.ndim != 0:
                raise InputShapeError(var.canonical_name, "scalar input takes one value")
            return np.float64(arr)
        if arr.ndim > 1 or (arr.ndim == 1 and arr.size != size):
            raise InputShapeError(var.canonical_name, f"takes one value or {size}, got {arr.size}")
        return np.broadcast_to(arr, (size,)).astype(np.float64)
    if var.literals is None:
        raise MissingInput(var.canonical_name)
    if var.repeating:
        return np.array(var.literals, dtype=np.float64)
    return np.float64(var.literals[0])


def _eval(node, values):
    if isinstance(node, Number):
        return np.float64(node.value)
    if isinstance(node, VarRef):
        return values[node.name]
    if isinstance(node, Neg):
        return np.negative(_eval(node.operand, values))
    if isinstance(node, BinOp):
        return _OPS[node.op](_eval(node.left, values), _eval(node.right, values))
    if isinstance(node, Agg):
        total = np.float64(0.0)
        for x in values[node.arg.name]:
            total = total + x
        return total
    raise TypeError(f"unknown expression node {node!r}")


def evaluate(model: Model, inputs: Optional[Mapping] = None) -> Valuation:
    """
    Evaluate every variable in toposort order. `inputs` overrides Input
    defaults by canonical name; a repeating Input takes a number (broadcast)
    or one value per instance. 0^0 is 1.
    """
    inputs = dict(inputs or {})
    for name in inputs:
        if name not in model:
            raise UnknownVariable(name)
        if model.get(name).kind is not VariableKind.INPUT:
            raise SsmiError(f"'{name}' is not an input")

    size = model.dimension.size if model.dimension else None
    values = {}

    with np.errstate(all="ignore"):
        for name in toposort(model):
            var = model.get(name)
            if var.kind is VariableKind.INPUT:
                value = _input_value(var, inputs, size)
            elif var.kind is VariableKind.PARAMETER:
                value = np.array(var.literals, dtype=np.float64) if var.repeating else np.float64(var.literals[0])
            else:
                value = _eval(var.formula, values)
                if var.repeating:
                    value = np.broadcast_to(value, (size,)).astype(np.float64)
                elif np.ndim(value) != 0:
                    raise SsmiError(f"{name}: scalar formula produced one value per instance")
            if not np.all(np.isfinite(value)):
                raise DomainError(name)
            values[name] = value

    result = Valuation()
    for var in model.variables:
        value = values[var.canonical_name]
        if var.repeating:
            result[var.canonical_name] = tuple(float(x) for x in value)
        else:
            result[var.canonical_name] = float(value)
    logger.debug("evaluated %d variable(s)", len(result))
    return result
