"""
workbook/formula.py
Cell formulas as the spreadsheet sees them: A1 text <-> WFormula AST, plus
the R1C1 normal form used to compare copied formulas.

Precedence follows the spreadsheet, not the DSL: negation binds tightest,
then ^ (left-associative), then * /, then + -. So "-B4^2" is (-B4)^2 and
"B3^B4^B5" is (B3^B4)^B5.
"""

import re
from dataclasses import dataclass
from typing import Iterator, Union

from workbook.cells import MAX_COLUMNS, CellRef, WorkbookError, column_number, quote_sheet


class FormulaParseError(WorkbookError):
    def __init__(self, text: str, position: int, message: str):
        self.text = text
        self.position = position
        super().__init__(f"cannot parse formula '{text}' at {position}: {message}")


# ── AST ───────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class WNumber:
    value: float


@dataclass(frozen=True)
class WCell:
    ref: CellRef


@dataclass(frozen=True)
class WName:
    name: str


@dataclass(frozen=True)
class WNeg:
    operand: "WFormula"


@dataclass(frozen=True)
class WBinOp:
    op: str
    left: "WFormula"
    right: "WFormula"


@dataclass(frozen=True)
class WSum:
    arg: Union[WName, WCell]


WFormula = Union[WNumber, WCell, WName, WNeg, WBinOp, WSum]

FUNCTIONS = ("SUM",)


# ── Lexer ─────────────────────────────────────────────────────────────────────

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<sheet>'(?:[^']|'')+'!|[A-Za-z_][A-Za-z0-9_.]*!)
  | (?P<word>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)
_CELL = re.compile(r"^(\$?)([A-Za-z]{1,3})(\$?)([1-9][0-9]*)$")
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _tokens(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match:
            raise FormulaParseError(text, pos + 1, f"unexpected character '{text[pos]}'")
        if match.lastgroup != "ws":
            out.append((match.lastgroup, match.group(), pos + 1))
        pos = match.end()
    out.append(("end", "", len(text) + 1))
    return out


# ── Parser ────────────────────────────────────────────────────────────────────

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, message: str, tok=None):
        tok = tok or self.peek()
        raise FormulaParseError(self.text, tok[2], message)

    def expect(self, text: str):
        tok = self.take()
        if tok[1] != text:
            self.fail(f"expected '{text}'", tok)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = WBinOp(op, node, self.term())
        return node

    def term(self):
        node = self.power()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = WBinOp(op, node, self.power())
        return node

    def power(self):
        node = self.unary()
        while self.peek()[1] == "^":
            self.take()
            node = WBinOp("^", node, self.unary())
        return node

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return WNeg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.primary()

    def primary(self):
        kind, text, pos = self.peek()
        if kind == "number":
            self.take()
            return WNumber(float(text))
        if text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        if kind in ("sheet", "word"):
            return self.reference(allow_function=True)
        self.fail("expected a number, reference or '('" if kind != "end" else "unexpected end of formula")

    def reference(self, allow_function: bool):
        sheet = None
        if self.peek()[0] == "sheet":
            raw = self.take()[1][:-1]
            sheet = raw[1:-1].replace("''", "'") if raw.startswith("'") else raw
            if self.peek()[0] != "word":
                self.fail("expected a cell address after the sheet name")
        tok = self.take()
        if tok[0] != "word":
            self.fail("expected a reference", tok)
        word = tok[1]

        if sheet is None and self.peek()[1] == "(":
            if not allow_function or word.upper() not in FUNCTIONS:
                self.fail(f"unsupported function '{word}'", tok)
            self.take()
            arg = self.reference(allow_function=False)
            self.expect(")")
            return WSum(arg)

        cell = _CELL.match(word)
        if cell and column_number(cell.group(2)) <= MAX_COLUMNS:
            return WCell(CellRef(
                sheet=sheet,
                column=cell.group(2).upper(),
                row=int(cell.group(4)),
                col_absolute=bool(cell.group(1)),
                row_absolute=bool(cell.group(3)),
            ))
        if sheet is not None or not _NAME.match(word):
            self.fail(f"'{word}' is neither a cell address nor a name", tok)
        return WName(word)


def parse_formula(text: str) -> WFormula:
    """Parse "=..." (the leading "=" is optional) into a WFormula."""
    body = text[1:] if text.startswith("=") else text
    parser = _Parser(body)
    node = parser.expr()
    if parser.peek()[0] != "end":
        parser.fail(f"unexpected '{parser.peek()[1]}'")
    return node


# ── Printing ──────────────────────────────────────────────────────────────────

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}
_NEG = 4
_ATOM = 5


def _prec(node) -> int:
    if isinstance(node, WBinOp):
        return _PREC[node.op]
    if isinstance(node, WNeg):
        return _NEG
    return _ATOM


def format_number(value: float) -> str:
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(float(value)).upper()


def _render(node, ref) -> str:
    if isinstance(node, WNumber):
        return format_number(node.value)
    if isinstance(node, WCell):
        return ref(node.ref)
    if isinstance(node, WName):
        return node.name
    if isinstance(node, WSum):
        inner = node.arg.name if isinstance(node.arg, WName) else ref(node.arg.ref)
        return f"SUM({inner})"
    if isinstance(node, WNeg):
        inner = _render(node.operand, ref)
        return "-" + (f"({inner})" if _prec(node.operand) < _NEG else inner)
    p = _PREC[node.op]
    left = _render(node.left, ref)
    right = _render(node.right, ref)
    if _prec(node.left) < p:
        left = f"({left})"
    if _prec(node.right) <= p:
        right = f"({right})"
    return f"{left}{node.op}{right}"


def to_text(node: WFormula) -> str:
    """A1 text with the leading "=", no spaces: "=B5*B6"."""
    return "=" + _render(node, CellRef.a1)


def normalize_r1c1(node: WFormula, at: CellRef) -> str:
    """
    Relative parts become R[dr]/C[dc] offsets from `at`, absolute parts
    R<n>/C<n>, names stay verbatim. Copies of one formula along a row give
    the same string.

        =B6*B7 at B8  -> "R[-2]C[0]*R[-1]C[0]"
        =$B$6  at C8  -> "R6C2"
    """
    here_col, here_row = at.col, at.row

    def ref(cell: CellRef) -> str:
        r = f"R{cell.row}" if cell.row_absolute else f"R[{cell.row - here_row}]"
        c = f"C{cell.col}" if cell.col_absolute else f"C[{cell.col - here_col}]"
        prefix = quote_sheet(cell.sheet) + "!" if cell.sheet is not None else ""
        return prefix + r + c

    return _render(node, ref)


# ── Queries ───────────────────────────────────────────────────────────────────

def walk(node: WFormula) -> Iterator[WFormula]:
    yield node
    if isinstance(node, WNeg):
        yield from walk(node.operand)
    elif isinstance(node, WBinOp):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, WSum):
        yield node.arg


def cell_refs(node: WFormula, include_sum: bool = True) -> list:
    """CellRefs in left-to-right order."""
    found = []

    def visit(n, inside_sum=False):
        if isinstance(n, WCell) and (include_sum or not inside_sum):
            found.append(n.ref)
        elif isinstance(n, WNeg):
            visit(n.operand)
        elif isinstance(n, WBinOp):
            visit(n.left)
            visit(n.right)
        elif isinstance(n, WSum):
            visit(n.arg, inside_sum=True)

    visit(node)
    return found


def bare_names(node: WFormula) -> list:
    """NameRefs outside any aggregate."""
    found = []

    def visit(n):
        if isinstance(n, WName):
            found.append(n.name)
        elif isinstance(n, WNeg):
            visit(n.operand)
        elif isinstance(n, WBinOp):
            visit(n.left)
            visit(n.right)

    visit(node)
    return found


def aggregate_names(node: WFormula) -> list:
    return [n.arg.name for n in walk(node) if isinstance(n, WSum) and isinstance(n.arg, WName)]


def operator_kinds(node: WFormula) -> list:
    kinds = []
    for n in walk(node):
        token = None
        if isinstance(n, WNeg):
            token = "neg"
        elif isinstance(n, WBinOp):
            token = n.op
        elif isinstance(n, WSum):
            token = "SUM"
        if token and token not in kinds:
            kinds.append(token)
    return kinds


def is_single_reference(node: WFormula) -> bool:
    return isinstance(node, (WName, WCell))


def has_absolute(node: WFormula) -> bool:
    return any(not ref.is_relative for ref in cell_refs(node))

