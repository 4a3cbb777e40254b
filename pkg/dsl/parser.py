"""
dsl/parser.py
Parser for the model DSL (.ssmi): the machine-readable Formula List.

    dimension Region = [South, East, North]
    input Price = 375
    param Distribution over Region = [48%, 23%, 29%]
    calc "Total Demand" = DemParA * DemParB ^ -Price
    calc out "Total Profit" = SUM(Profit)

One declaration per line, "#" starts a comment. Labels with spaces go in
double quotes. Numbers take "," or "_" digit separators, a "$" (or "\\$")
currency prefix and a "%" suffix. In literal lists, put a space after each
separating comma: "[1,234]" reads as one thousand two hundred thirty-four.
"""

import logging
import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Optional

from core.model import (
    AGGREGATES, ENTRY_SUFFIX, Agg, BinOp, Dimension, EmptyLabel, Model, Neg,
    Number, SsmiError, VarRef, VariableKind, looks_like_cell_reference,
    make_variable, mangle,
)

logger = logging.getLogger(__name__)

KEYWORDS = ("dimension", "input", "param", "calc", "out", "over")


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1


class ParseError(SsmiError):
    def __init__(self, span: SourceSpan, message: str):
        self.span = span
        self.message = message
        super().__init__(f"{span.line}:{span.column}: {message}")


# ── Lexer ─────────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Token:
    kind: str       # ident | string | number | op | ( | ) | [ | ] | , | = | eol
    text: str
    span: SourceSpan
    value: Optional[float] = None


_NUMBER = re.compile(
    r"(?P<body>(?:\d{1,3}(?:,\d{3})+(?!\d)|\d[\d_]*|(?=\.\d))(?:\.\d+)?(?:[eE][+-]?\d+)?)(?P<pct>%?)"
)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_DIGITS = "0123456789"
_PUNCT = {"(": "(", ")": ")", "[": "[", "]": "]", ",": ",", "=": "="}


def _number_value(body: str, percent: bool) -> float:
    value = Decimal(body.replace(",", "").replace("_", ""))
    if percent:
        value = value / 100
    return float(value)


def tokenize_line(text: str, line_no: int) -> list:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        col = i + 1
        if ch in " \t":
            i += 1
            continue
        if ch == "#":
            break
        if ch == '"':
            end = text.find('"', i + 1)
            if end < 0:
                raise ParseError(SourceSpan(line_no, col, len(text) - i), "unterminated quoted label")
            tokens.append(Token("string", text[i + 1:end], SourceSpan(line_no, col, end - i + 1)))
            i = end + 1
            continue
        start = i
        if ch == "\\" and text[i + 1:i + 2] == "$":
            i += 2
        elif ch == "$":
            i += 1
        if i > start or ch in _DIGITS or (ch == "." and text[i + 1:i + 2] in tuple(_DIGITS)):
            match = _NUMBER.match(text, i)
            if not match or not match.group("body"):
                raise ParseError(SourceSpan(line_no, col, i - start + 1), "expected a number after the currency sign")
            end = match.end()
            value = _number_value(match.group("body"), bool(match.group("pct")))
            tokens.append(Token("number", text[start:end], SourceSpan(line_no, col, end - start), value))
            i = end
            continue
        match = _IDENT.match(text, i)
        if match:
            tokens.append(Token("ident", match.group(), SourceSpan(line_no, col, match.end() - i)))
            i = match.end()
            continue
        if ch in "+-*/^":
            tokens.append(Token("op", ch, SourceSpan(line_no, col, 1)))
        elif ch in _PUNCT:
            tokens.append(Token(_PUNCT[ch], ch, SourceSpan(line_no, col, 1)))
        else:
            raise ParseError(SourceSpan(line_no, col, 1), f"unexpected character '{ch}'")
        i += 1
    tokens.append(Token("eol", "", SourceSpan(line_no, len(text) + 1, 1)))
    return tokens


# ── Line parser ───────────────────────────────────────────────────────────────

class _Line:
    """Cursor over one line's tokens."""

    def __init__(self, tokens: list):
        self.tokens = tokens
        self.pos = 0
        self.refs = []  # (canonical name, span) of every variable reference

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def at(self, kind: str, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: Optional[str] = None, what: str = "") -> Token:
        if not self.at(kind, text):
            tok = self.peek()
            found = tok.text or "end of line"
            raise ParseError(tok.span, f"expected {what or text or kind}, found '{found}'")
        return self.next()

    # labels and literals

    def label(self) -> Token:
        tok = self.peek()
        if tok.kind not in ("ident", "string"):
            raise ParseError(tok.span, "expected a label")
        return self.next()

    def literal(self) -> float:
        sign = 1.0
        if self.at("op", "-"):
            self.next()
            sign = -1.0
        tok = self.expect("number", what="a number")
        return sign * tok.value

    def literals(self) -> tuple:
        if self.at("["):
            self.next()
            values = [self.literal()]
            while self.at(","):
                self.next()
                values.append(self.literal())
            self.expect("]")
            return tuple(values), True
        return (self.literal(),), False

    # expressions: + -  <  * /  <  unary -  <  ^ (right-assoc, accepts a signed right operand)

    def expr(self):
        node = self.term()
        while self.at("op", "+") or self.at("op", "-"):
            op = self.next().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.at("op", "*") or self.at("op", "/"):
            op = self.next().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.at("op", "-"):
            self.next()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.at("op", "^"):
            self.next()
            return BinOp("^", base, self.power_rhs())
        return base

    def power_rhs(self):
        if self.at("op", "-"):
            self.next()
            return Neg(self.power_rhs())
        return self.power()

    def primary(self):
        tok = self.peek()
        if tok.kind == "number":
            self.next()
            return Number(tok.value)
        if tok.kind == "(":
            self.next()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "ident" and tok.text.upper() in AGGREGATES and self.peek(1).kind == "(":
            self.next()
            self.next()
            arg_tok = self.peek()
            if arg_tok.kind not in ("ident", "string") or self.peek(1).kind != ")":
                raise ParseError(arg_tok.span, f"{tok.text.upper()} takes a single variable name")
            arg = self.reference()
            self.expect(")")
            return Agg(tok.text.upper(), arg)
        if tok.kind in ("ident", "string"):
            return self.reference()
        raise ParseError(tok.span, f"expected a value, found '{tok.text or 'end of line'}'")

    def reference(self) -> VarRef:
        tok = self.next()
        try:
            name = tok.text if tok.kind == "ident" else mangle(tok.text)
        except EmptyLabel:
            raise ParseError(tok.span, "empty variable label")
        self.refs.append((name, tok.span))
        return VarRef(name)


# ── Model parser ──────────────────────────────────────────────────────────────

def _label_text(tok: Token) -> str:
    if tok.kind == "string" and not tok.text.strip():
        raise ParseError(tok.span, "empty variable label")
    return tok.text.strip() if tok.kind == "string" else tok.text


def _check_name(name: str, span: SourceSpan):
    if looks_like_cell_reference(name):
        raise ParseError(span, f"name '{name}' would read as a cell address")
    if name.endswith(ENTRY_SUFFIX):
        raise ParseError(span, f"names ending in '{ENTRY_SUFFIX}' are reserved")


def parse_model(source: str) -> Model:
    """Parse .ssmi text into a Model. Raises ParseError with a SourceSpan."""
    if source.startswith("﻿"):
        source = source[1:]

    dimension = None
    variables = []
    spans = {}
    refs = []

    for line_no, text in enumerate(source.splitlines(), 1):
        line = _Line(tokenize_line(text, line_no))
        if line.at("eol"):
            continue
        head = line.expect("ident", what="a declaration keyword")
        keyword = head.text

        if keyword == "dimension":
            if dimension is not None:
                raise ParseError(head.span, "only one dimension per model is supported")
            name_tok = line.expect("ident", what="a dimension name")
            line.expect("=")
            line.expect("[")
            instances = [_label_text(line.label())]
            while line.at(","):
                line.next()
                instances.append(_label_text(line.label()))
            line.expect("]")
            line.expect("eol", what="end of line")
            if len(set(instances)) != len(instances):
                raise ParseError(name_tok.span, f"dimension {name_tok.text} repeats an instance label")
            dimension = Dimension(name_tok.text, tuple(instances))
            continue

        if keyword not in ("input", "param", "calc"):
            raise ParseError(head.span, f"unknown declaration '{keyword}'")

        kind = {"input": VariableKind.INPUT, "param": VariableKind.PARAMETER,
                "calc": VariableKind.CALCULATED}[keyword]
        if keyword == "calc" and line.at("ident", "out") and line.peek(1).kind in ("ident", "string"):
            line.next()
            kind = VariableKind.OUTPUT

        label_tok = line.label()
        label = _label_text(label_tok)
        name = mangle(label)
        _check_name(name, label_tok.span)
        if name in spans:
            raise ParseError(label_tok.span, f"duplicate variable '{name}'")

        repeating = False
        if line.at("ident", "over"):
            line.next()
            dim_tok = line.expect("ident", what="a dimension name")
            if dimension is None or dim_tok.text != dimension.name:
                raise ParseError(dim_tok.span, f"undeclared dimension '{dim_tok.text}'")
            repeating = True

        formula = None
        literals = None
        if kind is VariableKind.INPUT and line.at("eol"):
            pass
        else:
            eq = line.expect("=")
            if kind.is_calculated:
                formula = line.expr()
            else:
                literals, bracketed = line.literals()
                expected = dimension.size if repeating else 1
                if len(literals) != expected or (repeating and not bracketed):
                    raise ParseError(eq.span, f"'{label}' needs {expected} value(s), found {len(literals)}")
        line.expect("eol", what="end of line")

        try:
            variables.append(make_variable(label, kind, repeating, formula, literals))
        except SsmiError as e:
            raise ParseError(label_tok.span, str(e))
        spans[name] = label_tok.span
        refs.extend(line.refs)

    # second pass: every reference must name a declared variable
    for name, span in refs:
        if name not in spans:
            raise ParseError(span, f"undeclared variable '{name}'")

    logger.info("parsed %d variable(s)%s", len(variables),
                f" over {dimension.name}" if dimension else "")
    return Model(dimension, tuple(variables))


def parse_file(path) -> Model:
    with open(path, encoding="utf-8") as f:
        return parse_model(f.read())
