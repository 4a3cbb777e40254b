"""
audit/checks.py
The conformance checks A1..A9. Each check reads the shared workbook state
and returns findings; none of them raise on a non-conforming workbook.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

from core.model import ENTRY_SUFFIX, Model, Severity, SsmiError, VariableKind
from engine.evaluator import evaluate
from workbook.cells import (
    CellRef, DefinitionBlock, SheetKind, Workbook, WorkbookError, address,
    column_letters, split_address,
)
from workbook.formula import (
    FormulaParseError, bare_names, cell_refs, has_absolute, is_single_reference,
    normalize_r1c1, operator_kinds, parse_formula,
)
from workbook.recompute import cell_key, recompute

logger = logging.getLogger(__name__)

RECOMPUTE_TOLERANCE = 1e-9

CHECKS = {
    "A1": "block structure",
    "A2": "name placement",
    "A3": "locality",
    "A4": "transitive and far references",
    "A5": "complexity",
    "A6": "absolute and mixed references",
    "A7": "copy consistency",
    "A8": "tier separation",
    "A9": "recompute equivalence",
}


@dataclass(frozen=True)
class Finding:
    check_id: str
    severity: Severity
    sheet: Optional[str]
    cell: Optional[str]
    message: str

    @property
    def location(self) -> str:
        if self.sheet is None:
            return "workbook"
        return f"{self.sheet}!{self.cell}" if self.cell else self.sheet

    def __str__(self):
        return f"{self.check_id} {self.severity.value} {self.location}: {self.message}"


# ── Workbook state ────────────────────────────────────────────────────────────

@dataclass
class SheetState:
    """One model sheet cut into definition blocks."""
    sheet: object
    rows: dict
    blocks: list
    role: dict          # row -> ("reference" | "definition", block)
    data_columns: list


def _is_data_row(cells: dict) -> bool:
    return any(col >= 2 and not content.is_label for col, content in cells.items())


def _segment(sheet, rows: dict) -> list:
    """Maximal runs of consecutive data rows; the last row of each run defines."""
    blocks, run = [], []
    for row in sorted(r for r, cells in rows.items() if _is_data_row(cells)):
        if run and row != run[-1] + 1:
            blocks.append(run)
            run = []
        run.append(row)
    if run:
        blocks.append(run)
    return [DefinitionBlock(sheet.name, tuple(run[:-1]), run[-1]) for run in blocks]


def _data_columns(sheet, rows: dict) -> list:
    """Data columns of a repeating sheet: the span of its dimension header."""
    for row, cells in rows.items():
        if not _is_data_row(cells) and cells.get(2) is not None and cells[2].is_label:
            return sorted(col for col in cells if col >= 2)
    used = {col for cells in rows.values() if _is_data_row(cells) for col in cells if col >= 2}
    return list(range(2, max(used) + 1)) if used else []


def read_workbook_state(wb: Workbook) -> dict:
    """Parse every formula once and segment the model sheets into blocks."""
    parsed = {}
    for sheet in wb.sheets:
        for addr, content in sheet.cells.items():
            if content.is_formula:
                try:
                    parsed[(sheet.name, addr)] = parse_formula(content.formula)
                except FormulaParseError as exc:
                    parsed[(sheet.name, addr)] = exc

    sheets = []
    for sheet in wb.model_sheets:
        rows = sheet.rows()
        blocks = _segment(sheet, rows)
        role = {}
        for block in blocks:
            for r in block.reference_rows:
                role[r] = ("reference", block)
            role[block.definition_row] = ("definition", block)
        columns = _data_columns(sheet, rows) if sheet.kind is SheetKind.MODEL_REPEATING else []
        sheets.append(SheetState(sheet, rows, blocks, role, columns))

    return {
        "parsed": parsed,
        "sheets": sheets,
        "by_name": {s.sheet.name: s for s in sheets},
    }


def _formulas(state: dict, st: SheetState, rows):
    """(col, address, node) of every parsed formula in the given rows."""
    for row in rows:
        for col, content in st.rows.get(row, {}).items():
            if content.is_formula:
                node = state["parsed"][(st.sheet.name, address(col, row))]
                if not isinstance(node, FormulaParseError):
                    yield col, address(col, row), node


def _error(check_id, sheet, cell, message) -> Finding:
    return Finding(check_id, Severity.ERROR, sheet, cell, message)


def _stray_formulas(state: dict, st: SheetState):
    """Parsed formulas on rows that belong to no definition block."""
    return _formulas(state, st, sorted(r for r in st.rows if r not in st.role))


def _row_anchor(cells: dict, row: int) -> str:
    return address(min(cells), row)


# ── Individual checks ─────────────────────────────────────────────────────────

def check_block_structure(wb: Workbook, state: dict) -> list:
    """A1: labelled rows, single-reference reference rows, parseable formulas, spacing."""
    findings = []
    for (sheet, addr), node in state["parsed"].items():
        if isinstance(node, FormulaParseError):
            findings.append(_error("A1", sheet, addr, f"formula does not parse: {node}"))

    for st in state["sheets"]:
        name = st.sheet.name
        previous = None
        for block in st.blocks:
            for row in block.rows:
                head = st.rows[row].get(1)
                if head is None or not head.is_label:
                    findings.append(_error("A1", name, _row_anchor(st.rows[row], row), f"row {row} has no label"))
            for row in block.reference_rows:
                for col, addr, node in _formulas(state, st, [row]):
                    if not is_single_reference(node):
                        findings.append(_error(
                            "A1", name, addr,
                            "reference-row cell must hold exactly one reference; "
                            "a computing formula here means two blocks run together",
                        ))
            head = st.rows[block.definition_row].get(1)
            if head is not None and head.is_label and not head.bold_italic:
                findings.append(Finding(
                    "A1", Severity.WARN, name, f"A{block.definition_row}",
                    f"definition label '{head.label}' is not bold italic",
                ))
            if previous is not None and block.rows.start - previous.definition_row > 2:
                findings.append(Finding(
                    "A1", Severity.WARN, name, _row_anchor(st.rows[block.rows.start], block.rows.start),
                    f"{block.rows.start - previous.definition_row - 1} blank rows before this block; expected one",
                ))
            previous = block
        for row in sorted(r for r in st.rows if r not in st.role):
            for col, content in sorted(st.rows[row].items()):
                if content.is_formula:
                    findings.append(_error(
                        "A1", name, address(col, row),
                        "formula outside every definition block",
                    ))
    return findings


def check_name_placement(wb: Workbook, state: dict) -> list:
    """A2: definition formulas use no names (aggregates excepted)."""
    findings = []
    for st in state["sheets"]:
        for block in st.blocks:
            for col, addr, node in _formulas(state, st, [block.definition_row]):
                for name in bare_names(node):
                    findings.append(_error(
                        "A2", st.sheet.name, addr,
                        f"definition formula uses name '{name}'; names belong in the reference rows",
                    ))
    return findings


def _inside(ref: CellRef, sheet: str, block: DefinitionBlock) -> bool:
    return (ref.sheet in (None, sheet)) and ref.row in block.rows


def check_locality(wb: Workbook, state: dict) -> list:
    """A3: definition formulas read their own reference rows, same column."""
    findings = []
    for st in state["sheets"]:
        for block in st.blocks:
            for col, addr, node in _formulas(state, st, [block.definition_row]):
                for ref in cell_refs(node):
                    if not _inside(ref, st.sheet.name, block):
                        continue
                    if ref.col != col:
                        findings.append(_error(
                            "A3", st.sheet.name, addr,
                            f"{ref.a1()} is in column {ref.column}, not {column_letters(col)}",
                        ))
                    elif ref.row not in block.reference_rows:
                        findings.append(_error(
                            "A3", st.sheet.name, addr,
                            f"{ref.a1()} is not one of the block's reference rows",
                        ))
    return findings


def _transitive_target(state: dict, sheet: str, row: int) -> bool:
    st = state["by_name"].get(sheet)
    return st is not None and st.role.get(row, (None,))[0] == "reference"


def _leaving_reference(state: dict, sheet: str, addr: str, ref: CellRef) -> Finding:
    if _transitive_target(state, ref.sheet or sheet, ref.row):
        return _error(
            "A4", sheet, addr,
            f"transitive reference: {ref.a1()} is where a variable is used, not where it is defined",
        )
    return _error("A4", sheet, addr, f"far reference to {ref.a1()}; refer to the variable by name")


def check_cross_references(wb: Workbook, state: dict) -> list:
    """A4: cell references that leave their block, or that point at a use."""
    findings = []
    for st in state["sheets"]:
        name = st.sheet.name
        for block in st.blocks:
            for row in block.rows:
                is_reference_row = row != block.definition_row
                for col, addr, node in _formulas(state, st, [row]):
                    for ref in cell_refs(node):
                        if not is_reference_row and _inside(ref, name, block):
                            continue
                        findings.append(_leaving_reference(state, name, addr, ref))
        for col, addr, node in _stray_formulas(state, st):
            for ref in cell_refs(node):
                findings.append(_leaving_reference(state, name, addr, ref))
    return findings


def check_complexity(wb: Workbook, state: dict, strict: bool = False) -> list:
    """A5: one operator or function kind per definition formula."""
    severity = Severity.ERROR if strict else Severity.WARN
    findings = []
    for st in state["sheets"]:
        for block in st.blocks:
            for col, addr, node in _formulas(state, st, [block.definition_row]):
                ops = operator_kinds(node)
                if len(ops) > 1:
                    findings.append(Finding(
                        "A5", severity, st.sheet.name, addr,
                        f"formula mixes {', '.join(ops)}",
                    ))
                    break
    return findings


def check_absolute_references(wb: Workbook, state: dict) -> list:
    """A6: no $ anywhere on the model sheets."""
    findings = []
    for st in state["sheets"]:
        for col, addr, node in _formulas(state, st, st.rows):
            if has_absolute(node):
                findings.append(_error("A6", st.sheet.name, addr, "absolute or mixed reference"))
    return findings


def check_copy_consistency(wb: Workbook, state: dict) -> list:
    """A7: every data column of a repeating row holds the same formula, up to position."""
    findings = []
    for st in state["sheets"]:
        if st.sheet.kind is not SheetKind.MODEL_REPEATING or len(st.data_columns) < 2:
            continue
        for row in sorted(st.role):
            cells = st.rows.get(row, {})
            forms = {}
            for col in st.data_columns:
                content = cells.get(col)
                node = state["parsed"].get((st.sheet.name, address(col, row)))
                if content is None:
                    forms[col] = "<blank>"
                elif content.is_literal:
                    forms[col] = "<literal>"
                elif content.is_label or isinstance(node, FormulaParseError):
                    forms[col] = f"<{content.label or content.formula}>"
                else:
                    forms[col] = normalize_r1c1(node, CellRef(None, column_letters(col), row))

            values = list(forms.values())
            expected = max(values, key=lambda v: (values.count(v), -values.index(v)))
            deviant = [col for col, form in forms.items() if form != expected]
            if deviant:
                letters = ", ".join(column_letters(c) for c in deviant)
                present = [c for c in deviant if c in cells]
                anchor = address(present[0], row) if present else _row_anchor(cells, row)
                findings.append(_error(
                    "A7", st.sheet.name, anchor,
                    f"row {row}: column(s) {letters} differ from the formula copied across the row",
                ))
    return findings


def check_tier_separation(wb: Workbook, state: dict) -> list:
    """A8: numbers typed into the model sheets are inputs in the wrong tier."""
    findings = []
    for st in state["sheets"]:
        for row, cells in st.rows.items():
            for col, content in cells.items():
                if content.is_literal:
                    findings.append(_error(
                        "A8", st.sheet.name, address(col, row),
                        f"literal {content.literal:g} on a model sheet; move it to Parameters or Interface",
                    ))
    return findings


def _entry_inputs(wb: Workbook, model: Model) -> dict:
    inputs = {}
    for var in model.of_kind(VariableKind.INPUT):
        entry = var.canonical_name + ENTRY_SUFFIX
        if not wb.has_name(entry):
            continue
        defined = wb.name(entry)
        sheet = wb.sheet(defined.sheet)
        values = [sheet.get(a).literal for a in defined.addresses() if sheet.get(a) and sheet.get(a).is_literal]
        if len(values) == len(defined.addresses()):
            inputs[var.canonical_name] = tuple(values) if var.repeating else values[0]
    return inputs


def check_recompute(wb: Workbook, state: dict, model: Model) -> list:
    """A9: the workbook computes what the model says, on every named definition cell."""
    try:
        expected = evaluate(model, _entry_inputs(wb, model))
    except SsmiError as exc:
        return [_error("A9", None, None, f"model does not evaluate: {exc}")]
    try:
        actual = recompute(wb)
    except (WorkbookError, RecursionError) as exc:
        return [_error("A9", None, None, f"workbook does not recompute: {exc}")]

    findings = []
    for var in model.calculated:
        if not wb.has_name(var.canonical_name):
            findings.append(_error("A9", None, None, f"no name defines '{var.canonical_name}'"))
            continue
        defined = wb.name(var.canonical_name)
        want = expected[var.canonical_name]
        cells = defined.addresses()
        wants = list(want) if var.repeating else [want] * len(cells)
        if len(wants) != len(cells):
            findings.append(_error(
                "A9", defined.sheet, cells[0],
                f"'{var.canonical_name}' spans {len(cells)} cell(s), model has {len(wants)} value(s)",
            ))
            continue
        for addr, w in zip(cells, wants):
            got = actual.get(cell_key(defined.sheet, addr), 0.0)
            if not math.isclose(got, w, rel_tol=RECOMPUTE_TOLERANCE, abs_tol=1e-12):
                findings.append(_error(
                    "A9", defined.sheet, addr,
                    f"{var.canonical_name}: workbook gives {got!r}, model gives {w!r}",
                ))
    return findings


def sort_key(wb: Workbook):
    order = {s.name: i for i, s in enumerate(wb.sheets)}

    def key(f: Finding):
        sheet = order.get(f.sheet, len(order))
        if f.cell is None:
            return sheet, math.inf, math.inf, f.check_id
        col, row = split_address(f.cell)
        return sheet, row, col, f.check_id

    return key
