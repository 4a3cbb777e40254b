"""
workbook/cells.py
The workbook container: sheets of cells keyed by A1 address, and the
defined names that tie variables to cells.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Optional

from core.model import SsmiError

MAX_COLUMNS = 16384
MAX_ROWS = 1048576


# ── Errors ────────────────────────────────────────────────────────────────────

class WorkbookError(SsmiError):
    pass


class LayoutOverflow(WorkbookError):
    pass


class CellCycle(WorkbookError):
    def __init__(self, cells: list):
        self.cells = list(cells)
        super().__init__("circular cell references: " + " -> ".join(self.cells))


class NameIntersectionMiss(WorkbookError):
    def __init__(self, name: str, where: str):
        self.name = name
        super().__init__(f"{where}: column lies outside the range of name '{name}'")


class UnresolvedName(WorkbookError):
    def __init__(self, name: str, where: str = ""):
        self.name = name
        super().__init__(f"{where + ': ' if where else ''}undefined name '{name}'")


class SchemaError(WorkbookError):
    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer or '/'}: {message}")


# ── Addresses ─────────────────────────────────────────────────────────────────

_ADDRESS = re.compile(r"^([A-Z]{1,3})([1-9][0-9]*)$")


def column_number(letters: str) -> int:
    """'A' -> 1, 'AA' -> 27."""
    return reduce(lambda acc, c: acc * 26 + ord(c) - 64, letters.upper(), 0)


def column_letters(n: int) -> str:
    """1 -> 'A', 27 -> 'AA'."""
    if not 1 <= n <= MAX_COLUMNS:
        raise LayoutOverflow(f"column {n} is outside A..XFD")
    s = ""
    while n > 0:
        n, rem = divmod(n - 1, 26)
        s = chr(rem + 65) + s
    return s


def split_address(address: str) -> tuple:
    """'B12' -> (2, 12) as (column, row), both 1-based."""
    match = _ADDRESS.match(address)
    if not match:
        raise WorkbookError(f"bad cell address '{address}'")
    col, row = column_number(match.group(1)), int(match.group(2))
    if col > MAX_COLUMNS or row > MAX_ROWS:
        raise WorkbookError(f"cell address '{address}' is out of range")
    return col, row


def address(col: int, row: int) -> str:
    return f"{column_letters(col)}{row}"


def is_address(text: str) -> bool:
    try:
        split_address(text)
        return True
    except WorkbookError:
        return False


def quote_sheet(name: str) -> str:
    if re.match(r"^[A-Za-z_][A-Za-z0-9_.]*$", name) and not re.match(r"^[A-Za-z]{1,3}[0-9]+$", name):
        return name
    return "'" + name.replace("'", "''") + "'"


@dataclass(frozen=True)
class CellRef:
    sheet: Optional[str]
    column: str
    row: int
    col_absolute: bool = False
    row_absolute: bool = False

    @property
    def col(self) -> int:
        return column_number(self.column)

    @property
    def address(self) -> str:
        return f"{self.column}{self.row}"

    @property
    def is_relative(self) -> bool:
        return not (self.col_absolute or self.row_absolute)

    def a1(self) -> str:
        text = ("$" if self.col_absolute else "") + self.column + ("$" if self.row_absolute else "") + str(self.row)
        if self.sheet is not None:
            return quote_sheet(self.sheet) + "!" + text
        return text


# ── Cells ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class CellContent:
    literal: Optional[float] = None
    formula: Optional[str] = None
    label: Optional[str] = None
    bold_italic: bool = False

    @property
    def is_literal(self) -> bool:
        return self.literal is not None

    @property
    def is_formula(self) -> bool:
        return self.formula is not None

    @property
    def is_label(self) -> bool:
        return self.label is not None


def literal(value: float, bold_italic: bool = False) -> CellContent:
    return CellContent(literal=float(value), bold_italic=bold_italic)


def formula(text: str, bold_italic: bool = False) -> CellContent:
    if not text.startswith("="):
        text = "=" + text
    return CellContent(formula=text, bold_italic=bold_italic)


def label(text: str, bold_italic: bool = False) -> CellContent:
    return CellContent(label=text, bold_italic=bold_italic)


class SheetKind(str, Enum):
    INTERFACE = "interface"
    PARAMETERS = "parameters"
    MODEL = "model"
    MODEL_REPEATING = "model_repeating"

    @property
    def is_model(self) -> bool:
        return self in (SheetKind.MODEL, SheetKind.MODEL_REPEATING)


@dataclass
class Sheet:
    name: str
    kind: SheetKind
    cells: dict = field(default_factory=dict)

    def get(self, addr: str) -> Optional[CellContent]:
        return self.cells.get(addr)

    def set(self, col: int, row: int, content: CellContent):
        self.cells[address(col, row)] = content

    def rows(self) -> dict:
        """row -> {col: CellContent}, both sorted ascending."""
        grid = {}
        for addr, content in self.cells.items():
            col, row = split_address(addr)
            grid.setdefault(row, {})[col] = content
        return {r: dict(sorted(grid[r].items())) for r in sorted(grid)}

    @property
    def max_row(self) -> int:
        return max((split_address(a)[1] for a in self.cells), default=0)

    @property
    def max_col(self) -> int:
        return max((split_address(a)[0] for a in self.cells), default=0)


# ── Names ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class DefinedName:
    name: str
    sheet: str
    range: str

    @property
    def bounds(self) -> tuple:
        """(first_col, first_row, last_col, last_row)."""
        first, _, last = self.range.partition(":")
        c1, r1 = split_address(first)
        c2, r2 = split_address(last or first)
        return min(c1, c2), min(r1, r2), max(c1, c2), max(r1, r2)

    @property
    def is_single_cell(self) -> bool:
        c1, r1, c2, r2 = self.bounds
        return c1 == c2 and r1 == r2

    @property
    def is_row_run(self) -> bool:
        c1, r1, c2, r2 = self.bounds
        return r1 == r2

    def addresses(self) -> list:
        c1, r1, c2, r2 = self.bounds
        return [address(c, r) for r in range(r1, r2 + 1) for c in range(c1, c2 + 1)]

    def absolute_reference(self) -> str:
        c1, r1, c2, r2 = self.bounds
        start = f"${column_letters(c1)}${r1}"
        if self.is_single_cell:
            return f"{quote_sheet(self.sheet)}!{start}"
        return f"{quote_sheet(self.sheet)}!{start}:${column_letters(c2)}${r2}"


def range_text(first_col: int, last_col: int, row: int) -> str:
    if first_col == last_col:
        return address(first_col, row)
    return f"{address(first_col, row)}:{address(last_col, row)}"


# ── Workbook ──────────────────────────────────────────────────────────────────

@dataclass
class Workbook:
    sheets: list = field(default_factory=list)
    names: list = field(default_factory=list)

    def sheet(self, name: str) -> Sheet:
        for s in self.sheets:
            if s.name == name:
                return s
        raise WorkbookError(f"no sheet named '{name}'")

    def has_sheet(self, name: str) -> bool:
        return any(s.name == name for s in self.sheets)

    def sheets_of(self, *kinds: SheetKind) -> list:
        return [s for s in self.sheets if s.kind in kinds]

    @property
    def model_sheets(self) -> list:
        return [s for s in self.sheets if s.kind.is_model]

    def name(self, name: str) -> DefinedName:
        for n in self.names:
            if n.name == name:
                return n
        raise UnresolvedName(name)

    def has_name(self, name: str) -> bool:
        return any(n.name == name for n in self.names)

    def names_by_cell(self) -> dict:
        """(sheet, address) -> names covering that cell."""
        index = {}
        for n in self.names:
            for addr in n.addresses():
                index.setdefault((n.sheet, addr), []).append(n.name)
        return index

    def validate(self):
        """Structural invariants; raises WorkbookError on the first breach."""
        counts = {kind: len(self.sheets_of(kind)) for kind in SheetKind}
        if counts[SheetKind.PARAMETERS] != 1 or counts[SheetKind.INTERFACE] != 1:
            raise WorkbookError("a workbook needs exactly one parameters sheet and one interface sheet")
        if len({s.name for s in self.sheets}) != len(self.sheets):
            raise WorkbookError("duplicate sheet names")
        seen = set()
        for n in self.names:
            if n.name in seen:
                raise WorkbookError(f"name '{n.name}' is defined twice")
            seen.add(n.name)
            sheet = self.sheet(n.sheet)
            if not (n.is_single_cell or n.is_row_run):
                raise WorkbookError(f"name '{n.name}' must cover one cell or one row run")
            for addr in n.addresses():
                if addr not in sheet.cells:
                    raise WorkbookError(f"name '{n.name}' points at empty cell {n.sheet}!{addr}")


@dataclass(frozen=True)
class DefinitionBlock:
    """k reference rows followed by the definition row, on one sheet."""
    sheet: str
    reference_rows: tuple
    definition_row: int
    defined_variable: Optional[str] = None

    @property
    def rows(self) -> range:
        first = self.reference_rows[0] if self.reference_rows else self.definition_row
        return range(first, self.definition_row + 1)
