"""
workbook/recompute.py
Spreadsheet-side evaluation of a workbook: every formula cell computed from
the cells it references, with names resolved the way a spreadsheet does.

A name over a single cell behaves as an absolute reference. A name over a
row run resolves to the cell of that run in the referencing cell's column
(implicit intersection); SUM(name) takes the whole run.
"""

import logging
from typing import Mapping, Optional

import numpy as np

from core.model import ENTRY_SUFFIX
from workbook.cells import (
    CellCycle, NameIntersectionMiss, UnresolvedName, Workbook, WorkbookError,
    address, split_address,
)
from workbook.formula import WBinOp, WCell, WName, WNeg, WNumber, WSum, parse_formula

logger = logging.getLogger(__name__)

_OPS = {
    "+": np.add,
    "-": np.subtract,
    "*": np.multiply,
    "/": np.divide,
    "^": np.power,
}


def cell_key(sheet: str, addr: str) -> str:
    return f"{sheet}!{addr}"


class _Engine:
    def __init__(self, wb: Workbook, overrides: dict):
        self.wb = wb
        self.overrides = overrides
        self.names = {n.name: n for n in wb.names}
        self.values = {}
        self.parsed = {}
        self.stack = []

    def content(self, sheet: str, addr: str):
        return self.wb.sheet(sheet).get(addr)

    def formula_of(self, sheet: str, addr: str):
        key = cell_key(sheet, addr)
        if key not in self.parsed:
            self.parsed[key] = parse_formula(self.content(sheet, addr).formula)
        return self.parsed[key]

    def resolve_name(self, name: str, sheet: str, addr: str) -> tuple:
        """(sheet, address) a bare name stands for when used at sheet!addr."""
        defined = self.names.get(name)
        if defined is None:
            raise UnresolvedName(name, cell_key(sheet, addr))
        if defined.is_single_cell:
            return defined.sheet, defined.addresses()[0]
        c1, row, c2, _ = defined.bounds
        col, _ = split_address(addr)
        if not c1 <= col <= c2:
            raise NameIntersectionMiss(name, cell_key(sheet, addr))
        return defined.sheet, address(col, row)

    def name_cells(self, name: str, sheet: str, addr: str) -> list:
        defined = self.names.get(name)
        if defined is None:
            raise UnresolvedName(name, cell_key(sheet, addr))
        return [(defined.sheet, a) for a in defined.addresses()]

    def value(self, sheet: str, addr: str) -> np.float64:
        key = cell_key(sheet, addr)
        if key in self.overrides:
            return self.overrides[key]
        if key in self.values:
            return self.values[key]
        content = self.content(sheet, addr)
        if content is None:
            return np.float64(0.0)
        if content.is_literal:
            return np.float64(content.literal)
        if content.is_label:
            raise WorkbookError(f"{key} holds a label, not a number")

        if key in self.stack:
            raise CellCycle(self.stack[self.stack.index(key):] + [key])
        self.stack.append(key)
        result = self.eval(self.formula_of(sheet, addr), sheet, addr)
        self.stack.pop()
        self.values[key] = result
        return result

    def eval(self, node, sheet: str, addr: str):
        if isinstance(node, WNumber):
            return np.float64(node.value)
        if isinstance(node, WCell):
            return self.value(node.ref.sheet or sheet, node.ref.address)
        if isinstance(node, WName):
            return self.value(*self.resolve_name(node.name, sheet, addr))
        if isinstance(node, WSum):
            if isinstance(node.arg, WCell):
                return self.value(node.arg.ref.sheet or sheet, node.arg.ref.address)
            total = np.float64(0.0)
            for target in self.name_cells(node.arg.name, sheet, addr):
                total = total + self.value(*target)
            return total
        if isinstance(node, WNeg):
            return np.negative(self.eval(node.operand, sheet, addr))
        if isinstance(node, WBinOp):
            return _OPS[node.op](self.eval(node.left, sheet, addr), self.eval(node.right, sheet, addr))
        raise TypeError(f"unknown formula node {node!r}")


def _entry_overrides(wb: Workbook, entries: Mapping) -> dict:
    overrides = {}
    for key, value in entries.items():
        name = key + ENTRY_SUFFIX if wb.has_name(key + ENTRY_SUFFIX) else key
        defined = wb.name(name)
        cells = defined.addresses()
        sheet = wb.sheet(defined.sheet)
        for addr in cells:
            content = sheet.get(addr)
            if content is None or not content.is_literal:
                raise WorkbookError(f"name '{name}' does not point at entry cells")
        values = np.broadcast_to(np.asarray(value, dtype=np.float64), (len(cells),))
        for addr, v in zip(cells, values):
            overrides[cell_key(defined.sheet, addr)] = np.float64(v)
    return overrides


def recompute(wb: Workbook, entries: Optional[Mapping] = None) -> dict:
    """
    Value of every literal and formula cell, keyed "Sheet!A1". `entries`
    sets entry cells by name: a canonical input name goes to its
    "__entry" cells when those exist. One number fills a whole row run.
    """
    engine = _Engine(wb, _entry_overrides(wb, entries or {}))
    result = {}
    with np.errstate(all="ignore"):
        for sheet in wb.sheets:
            for addr, content in sheet.cells.items():
                if content.is_label:
                    continue
                result[cell_key(sheet.name, addr)] = float(engine.value(sheet.name, addr))
    logger.debug("recomputed %d cell(s)", len(result))
    return result


def precedents(wb: Workbook, sheet: str, addr: str) -> list:
    """Direct precedents of a formula cell as (sheet, address), in formula order."""
    engine = _Engine(wb, {})
    content = engine.content(sheet, addr)
    if content is None or not content.is_formula:
        return []
    found = []

    def visit(node):
        if isinstance(node, WCell):
            found.append((node.ref.sheet or sheet, node.ref.address))
        elif isinstance(node, WName):
            found.append(engine.resolve_name(node.name, sheet, addr))
        elif isinstance(node, WSum):
            if isinstance(node.arg, WCell):
                visit(node.arg)
            else:
                found.extend(engine.name_cells(node.arg.name, sheet, addr))
        elif isinstance(node, WNeg):
            visit(node.operand)
        elif isinstance(node, WBinOp):
            visit(node.left)
            visit(node.right)

    visit(engine.formula_of(sheet, addr))
    unique = []
    for item in found:
        if item not in unique:
            unique.append(item)
    return unique
