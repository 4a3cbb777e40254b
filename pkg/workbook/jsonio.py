"""
workbook/jsonio.py
The canonical .wbjson interchange format. Keys are sorted and integral
numbers are written without a fraction, so write_json is byte-stable.

    {"sheets": [{"name": "Model", "kind": "model",
                 "cells": {"A8": {"l": "Sold", "s": "bi"}, "B8": {"f": "=B6-B7", "s": "bi"}}}],
     "names": [{"n": "Sold", "sheet": "Model", "range": "B8"}]}
"""

import json

from jsonschema import Draft202012Validator

from workbook.cells import (
    CellContent, DefinedName, Sheet, SheetKind, SchemaError, Workbook, WorkbookError,
)

_STYLE = {"s": {"const": "bi"}}

WORKBOOK_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["sheets", "names"],
    "additionalProperties": False,
    "properties": {
        "sheets": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "kind", "cells"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "kind": {"enum": [k.value for k in SheetKind]},
                    "cells": {
                        "type": "object",
                        "propertyNames": {"pattern": "^[A-Z]{1,3}[1-9][0-9]*$"},
                        "additionalProperties": {
                            "oneOf": [
                                {"type": "object", "required": ["f"], "additionalProperties": False,
                                 "properties": {"f": {"type": "string", "pattern": "^="}, **_STYLE}},
                                {"type": "object", "required": ["v"], "additionalProperties": False,
                                 "properties": {"v": {"type": "number"}, **_STYLE}},
                                {"type": "object", "required": ["l"], "additionalProperties": False,
                                 "properties": {"l": {"type": "string"}, **_STYLE}},
                            ],
                        },
                    },
                },
            },
        },
        "names": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["n", "sheet", "range"],
                "additionalProperties": False,
                "properties": {
                    "n": {"type": "string", "pattern": "^[A-Za-z_][A-Za-z0-9_]*$"},
                    "sheet": {"type": "string"},
                    "range": {"type": "string", "pattern": "^[A-Z]{1,3}[1-9][0-9]*(:[A-Z]{1,3}[1-9][0-9]*)?$"},
                },
            },
        },
    },
}


def _number(value: float):
    return int(value) if float(value).is_integer() and abs(value) < 1e16 else float(value)


def _cell_json(content: CellContent) -> dict:
    if content.is_formula:
        out = {"f": content.formula}
    elif content.is_literal:
        out = {"v": _number(content.literal)}
    else:
        out = {"l": content.label}
    if content.bold_italic:
        out["s"] = "bi"
    return out


def to_payload(wb: Workbook) -> dict:
    return {
        "sheets": [
            {
                "name": sheet.name,
                "kind": sheet.kind.value,
                "cells": {addr: _cell_json(content) for addr, content in sheet.cells.items()},
            }
            for sheet in wb.sheets
        ],
        "names": [{"n": n.name, "sheet": n.sheet, "range": n.range} for n in wb.names],
    }


def write_json(wb: Workbook) -> bytes:
    text = json.dumps(to_payload(wb), sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


def _pointer(path) -> str:
    return "".join(f"/{part}" for part in path)


def read_json(data: bytes) -> Workbook:
    """Parse and validate a .wbjson document; SchemaError carries a JSON pointer."""
    try:
        payload = json.loads(data.decode("utf-8-sig") if isinstance(data, bytes) else data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError("", f"not a JSON document: {exc}") from exc

    errors = sorted(
        Draft202012Validator(WORKBOOK_SCHEMA).iter_errors(payload),
        key=lambda e: [str(p) for p in e.absolute_path],
    )
    if errors:
        raise SchemaError(_pointer(errors[0].absolute_path), errors[0].message)

    sheets = []
    for entry in payload["sheets"]:
        cells = {}
        for addr, raw in entry["cells"].items():
            bold_italic = raw.get("s") == "bi"
            if "f" in raw:
                cells[addr] = CellContent(formula=raw["f"], bold_italic=bold_italic)
            elif "v" in raw:
                cells[addr] = CellContent(literal=float(raw["v"]), bold_italic=bold_italic)
            else:
                cells[addr] = CellContent(label=raw["l"], bold_italic=bold_italic)
        sheets.append(Sheet(entry["name"], SheetKind(entry["kind"]), cells))

    names = [DefinedName(n["n"], n["sheet"], n["range"]) for n in payload["names"]]
    sheet_names = {s.name for s in sheets}
    for i, n in enumerate(names):
        if n.sheet not in sheet_names:
            raise SchemaError(f"/names/{i}/sheet", f"no sheet named '{n.sheet}'")

    wb = Workbook(sheets=sheets, names=names)
    try:
        wb.validate()
    except WorkbookError as exc:
        raise SchemaError("", str(exc)) from exc
    return wb
