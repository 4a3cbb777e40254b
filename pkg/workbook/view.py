"""
workbook/view.py
Plain-text grids of a sheet: the formula view (what each cell holds) and the
value view (what each cell shows after recompute).
"""

from typing import Optional

from workbook.cells import Workbook, column_letters
from workbook.recompute import cell_key, recompute


def display_number(value: float, whole: bool = False) -> str:
    """
    13062 -> '13,062'; 2351110.344 -> '2,351,110.34'; 0.48 -> '0.48'.
    With `whole`, magnitudes of 1 or more round to whole units: 13061.72 -> '13,062'.
    """
    if float(value).is_integer() or (whole and abs(value) >= 1):
        return f"{value:,.0f}"
    if abs(value) >= 1:
        return f"{value:,.2f}"
    return f"{value:.4g}"


def _grid(wb: Workbook, sheet_name: str, render) -> str:
    sheet = wb.sheet(sheet_name)
    rows = sheet.rows()
    n_cols = max(sheet.max_col, 1)
    table = [[""] + [column_letters(c) for c in range(1, n_cols + 1)]]
    for row in range(1, sheet.max_row + 1):
        cells = rows.get(row, {})
        table.append([str(row)] + [render(row, col, cells.get(col)) for col in range(1, n_cols + 1)])

    widths = [max(len(line[i]) for line in table) for i in range(n_cols + 1)]
    lines = [f"[{sheet.name}]"]
    for line in table:
        lines.append("  ".join(text.ljust(w) for text, w in zip(line, widths)).rstrip())
    return "\n".join(lines)


def formula_view(wb: Workbook, sheet_name: str) -> str:
    def render(row, col, content):
        if content is None:
            return ""
        if content.is_label:
            return content.label
        if content.is_formula:
            return content.formula
        return display_number(content.literal)

    return _grid(wb, sheet_name, render)


def value_view(wb: Workbook, sheet_name: str, values: Optional[dict] = None) -> str:
    """`values` is a recompute() result; label cells print as-is."""
    values = values if values is not None else recompute(wb)

    def render(row, col, content):
        if content is None:
            return ""
        if content.is_label:
            return content.label
        return display_number(values[cell_key(sheet_name, f"{column_letters(col)}{row}")])

    return _grid(wb, sheet_name, render)
