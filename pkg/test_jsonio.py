"""
test_jsonio.py
The .wbjson interchange format: stable bytes, schema errors with JSON
pointers, and workbook invariants on read.
Run with: pytest test_jsonio.py
"""

import json

import pytest

from conftest import fixture_path
from workbook.cells import SchemaError
from workbook.generator import generate
from workbook.jsonio import read_json, to_payload, write_json


def _payload(**changes) -> dict:
    with open(fixture_path("items_structured.wbjson"), encoding="utf-8") as fh:
        payload = json.load(fh)
    payload.update(changes)
    return payload


def _schema_error(payload) -> SchemaError:
    with pytest.raises(SchemaError) as info:
        read_json(json.dumps(payload).encode("utf-8"))
    return info.value


def test_write_is_byte_stable(pricing_model):
    first = write_json(generate(pricing_model))
    second = write_json(generate(pricing_model))
    assert first == second
    assert first.endswith(b"}\n")


def test_written_json_is_sorted_and_integral(items_model):
    text = write_json(generate(items_model)).decode("utf-8")
    payload = json.loads(text)
    assert list(payload) == ["names", "sheets"]
    assert '"v": 1000' in text
    assert '"v": 1000.0' not in text


def test_read_back_is_the_same_workbook(pricing_model):
    wb = generate(pricing_model)
    again = read_json(write_json(wb))
    assert to_payload(again) == to_payload(wb)
    assert write_json(again) == write_json(wb)


def test_bold_italic_survives(items_model):
    wb = read_json(write_json(generate(items_model)))
    assert wb.sheet("Model").get("A5").bold_italic
    assert wb.sheet("Model").get("B5").bold_italic


def test_read_accepts_text_and_bom():
    data = json.dumps(_payload()).encode("utf-8")
    assert read_json(b"\xef\xbb\xbf" + data).has_name("Unit_Price")
    assert read_json(data.decode("utf-8")).has_name("Unit_Price")


def test_not_json():
    with pytest.raises(SchemaError) as info:
        read_json(b"{not json")
    assert info.value.pointer == ""


def test_bad_sheet_kind_points_at_it():
    payload = _payload()
    payload["sheets"][0]["kind"] = "dashboard"
    assert _schema_error(payload).pointer == "/sheets/0/kind"


def test_bad_cell_address():
    payload = _payload()
    payload["sheets"][2]["cells"]["B0"] = {"v": 1}
    assert _schema_error(payload).pointer.startswith("/sheets/2/cells")


def test_formula_without_equals():
    payload = _payload()
    payload["sheets"][2]["cells"]["B8"] = {"f": "B6-B7"}
    assert _schema_error(payload).pointer == "/sheets/2/cells/B8"


def test_cell_with_two_contents():
    payload = _payload()
    payload["sheets"][2]["cells"]["B8"] = {"f": "=B6-B7", "v": 950}
    assert _schema_error(payload).pointer == "/sheets/2/cells/B8"


def test_missing_names_key():
    payload = _payload()
    del payload["names"]
    assert _schema_error(payload).pointer == ""


def test_name_on_unknown_sheet():
    payload = _payload()
    payload["names"][3]["sheet"] = "Elsewhere"
    assert _schema_error(payload).pointer == "/names/3/sheet"


def test_name_over_empty_cell():
    payload = _payload()
    payload["names"][0]["range"] = "B40"
    err = _schema_error(payload)
    assert "empty cell" in str(err)


def test_second_parameters_sheet():
    payload = _payload()
    payload["sheets"].append({"name": "More", "kind": "parameters", "cells": {}})
    _schema_error(payload)
