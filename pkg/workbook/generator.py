"""
workbook/generator.py
Model -> 3-tier workbook. Interface holds entry cells and output displays,
Parameters holds every Input and Parameter under its canonical name, and
the Model sheets hold one definition block per calculated variable.
"""

import logging

from core.graph import validate
from core.model import (
    ENTRY_SUFFIX, Agg, BinOp, Model, NameCollision, Neg, Number, VarRef,
    VariableKind, direct_references, mangle,
)
from workbook.cells import (
    MAX_COLUMNS, CellRef, DefinedName, DefinitionBlock, LayoutOverflow, Sheet,
    SheetKind, Workbook, WorkbookError, column_letters, formula, label, literal, range_text,
)
from workbook.formula import WBinOp, WCell, WName, WNeg, WNumber, WSum, to_text

logger = logging.getLogger(__name__)

DEFAULT_FIRST_BLOCK_ROW = 3
DATA_COLUMN = 2


def create_names_from_selection(sheet: Sheet, rows, columns, suffix: str = "") -> list:
    """
    One name per selected row, taken from the label in column A and spanning
    the selected data columns of that row.
    """
    columns = list(columns)
    names = []
    for row in rows:
        cell = sheet.get(f"A{row}")
        if cell is None or not cell.is_label:
            raise WorkbookError(f"{sheet.name}!A{row} holds no label to name the row by")
        name = mangle(cell.label) + suffix
        if any(n.name == name for n in names):
            raise NameCollision(name, f"two selected rows on {sheet.name} both name '{name}'")
        names.append(DefinedName(name, sheet.name, range_text(columns[0], columns[-1], row)))
    return names


def _to_cell_formula(expr, rows: dict, column: str):
    if isinstance(expr, Number):
        return WNumber(expr.value)
    if isinstance(expr, VarRef):
        return WCell(CellRef(None, column, rows[expr.name]))
    if isinstance(expr, Neg):
        return WNeg(_to_cell_formula(expr.operand, rows, column))
    if isinstance(expr, BinOp):
        return WBinOp(expr.op, _to_cell_formula(expr.left, rows, column), _to_cell_formula(expr.right, rows, column))
    if isinstance(expr, Agg):
        return WSum(WName(expr.arg.name))
    raise TypeError(f"unknown expression node {expr!r}")


class _Layout:
    def __init__(self, model: Model, first_block_row: int):
        self.model = model
        self.first_block_row = first_block_row
        self.size = model.dimension.size if model.dimension else 1
        if self.size + 1 > MAX_COLUMNS:
            raise LayoutOverflow(
                f"dimension {model.dimension.name} has {self.size} instances; "
                f"at most {MAX_COLUMNS - 1} fit beside the label column"
            )
        self.names = []
        self.blocks = []

    def columns(self, repeating: bool) -> range:
        return range(DATA_COLUMN, DATA_COLUMN + (self.size if repeating else 1))

    def header(self, sheet: Sheet, row: int):
        dim = self.model.dimension
        sheet.set(1, row, label(dim.name))
        for i, instance in enumerate(dim.instances):
            sheet.set(DATA_COLUMN + i, row, label(instance))

    def table_start(self, sheet: Sheet) -> int:
        """Title in row 1, dimension header in row 2 when there is one; data from row 3."""
        sheet.set(1, 1, label(sheet.name))
        if self.model.dimension is not None:
            self.header(sheet, 2)
        return 3

    def interface(self) -> Sheet:
        sheet = Sheet("Interface", SheetKind.INTERFACE)
        row = self.table_start(sheet)
        entry_rows = []
        for var in self.model.of_kind(VariableKind.INPUT):
            sheet.set(1, row, label(var.display_label))
            values = var.literals
            if values is None:
                logger.warning("input %s has no default; its entry cell starts at 0", var.canonical_name)
                values = (0.0,) * (self.size if var.repeating else 1)
            for col, value in zip(self.columns(var.repeating), values):
                sheet.set(col, row, literal(value))
            entry_rows.append((row, var))
            row += 1
        for r, var in entry_rows:
            self.names += create_names_from_selection(sheet, [r], self.columns(var.repeating), suffix=ENTRY_SUFFIX)

        outputs = self.model.of_kind(VariableKind.OUTPUT)
        if entry_rows and outputs:
            row += 1
        for var in outputs:
            sheet.set(1, row, label(var.display_label))
            for col in self.columns(var.repeating):
                sheet.set(col, row, formula(f"={var.canonical_name}"))
            row += 1
        return sheet

    def parameters(self) -> Sheet:
        sheet = Sheet("Parameters", SheetKind.PARAMETERS)
        row = self.table_start(sheet)
        for var in self.model.variables:
            if var.is_calculated:
                continue
            sheet.set(1, row, label(var.display_label))
            for i, col in enumerate(self.columns(var.repeating)):
                if var.kind is VariableKind.INPUT:
                    sheet.set(col, row, formula(f"={var.canonical_name}{ENTRY_SUFFIX}"))
                else:
                    sheet.set(col, row, literal(var.literals[i]))
            self.names += create_names_from_selection(sheet, [row], self.columns(var.repeating))
            row += 1
        return sheet

    def block(self, sheet: Sheet, row: int, var) -> int:
        """Lay out one definition block from `row`; returns the definition row."""
        rows = {}
        for ref in direct_references(var.formula):
            target = self.model.get(ref)
            sheet.set(1, row, label(target.display_label))
            for col in self.columns(var.repeating):
                sheet.set(col, row, formula(f"={ref}"))
            rows[ref] = row
            row += 1

        sheet.set(1, row, label(var.display_label, bold_italic=True))
        for col in self.columns(var.repeating):
            text = to_text(_to_cell_formula(var.formula, rows, column_letters(col)))
            sheet.set(col, row, formula(text, bold_italic=True))
        self.names += create_names_from_selection(sheet, [row], self.columns(var.repeating))
        self.blocks.append(DefinitionBlock(sheet.name, tuple(rows.values()), row, var.canonical_name))
        return row

    def model_sheets(self, order: list) -> list:
        scalar = Sheet("Model", SheetKind.MODEL)
        scalar.set(1, 1, label(scalar.name))
        sheets = [scalar]
        next_row = {scalar.name: self.first_block_row}

        calculated = [self.model.get(n) for n in order if self.model.get(n).is_calculated]
        if any(v.repeating for v in calculated):
            repeating = Sheet(f"Model {self.model.dimension.name}", SheetKind.MODEL_REPEATING)
            repeating.set(1, 1, label(repeating.name))
            self.header(repeating, self.first_block_row)
            sheets.append(repeating)
            next_row[repeating.name] = self.first_block_row + 2

        for var in calculated:
            sheet = sheets[1] if var.repeating else scalar
            definition_row = self.block(sheet, next_row[sheet.name], var)
            next_row[sheet.name] = definition_row + 2
        return sheets


def generate(model: Model, first_block_row: int = DEFAULT_FIRST_BLOCK_ROW) -> Workbook:
    """
    Lay out `model` as a workbook. Blocks on the scalar Model sheet start at
    `first_block_row`; the repeating sheet puts its dimension header there
    and starts blocks two rows below.
    """
    if first_block_row < 3:
        raise LayoutOverflow("first_block_row must be at least 3")
    order = validate(model)
    layout = _Layout(model, first_block_row)

    interface = layout.interface()
    parameters = layout.parameters()
    sheets = [interface, parameters] + layout.model_sheets(order)

    wb = Workbook(sheets=sheets, names=sorted(layout.names, key=lambda n: n.name))
    wb.validate()
    logger.info(
        "generated %d sheet(s), %d block(s), %d name(s)",
        len(wb.sheets), len(layout.blocks), len(wb.names),
    )
    return wb
