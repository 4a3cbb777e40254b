"""
test_workbook.py
Addresses, names and the 3-tier layout produced from a model.
Run with: pytest test_workbook.py
"""

import pytest

from conftest import fixture_path, random_model
from core.model import NameCollision
from dsl.parser import parse_model
from workbook.cells import (
    DefinedName, LayoutOverflow, Sheet, SheetKind, Workbook, WorkbookError,
    column_letters, column_number, label, literal, quote_sheet, split_address,
)
from workbook.formula import parse_formula, to_text
from workbook.generator import create_names_from_selection, generate
from workbook.jsonio import read_json, to_payload
from workbook.view import display_number, formula_view, value_view


# ── Addresses ─────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("n, letters", [(1, "A"), (26, "Z"), (27, "AA"), (52, "AZ"), (703, "AAA"), (16384, "XFD")])
def test_column_letters(n, letters):
    assert column_letters(n) == letters
    assert column_number(letters) == n


def test_column_out_of_range():
    with pytest.raises(LayoutOverflow):
        column_letters(16385)


def test_split_address():
    assert split_address("B12") == (2, 12)
    with pytest.raises(WorkbookError):
        split_address("B0")
    with pytest.raises(WorkbookError):
        split_address("XFE1")


def test_quote_sheet():
    assert quote_sheet("Model") == "Model"
    assert quote_sheet("Model Region") == "'Model Region'"
    assert quote_sheet("AB12") == "'AB12'"
    assert quote_sheet("Bob's") == "'Bob''s'"


def test_defined_name_geometry():
    run = DefinedName("Regional_Demand", "Model Region", "B7:D7")
    assert run.is_row_run and not run.is_single_cell
    assert run.addresses() == ["B7", "C7", "D7"]
    assert run.absolute_reference() == "'Model Region'!$B$7:$D$7"
    single = DefinedName("Price", "Parameters", "B3")
    assert single.is_single_cell
    assert single.absolute_reference() == "Parameters!$B$3"


def test_create_names_from_selection():
    sheet = Sheet("Parameters", SheetKind.PARAMETERS)
    sheet.set(1, 3, label("Unit Price"))
    sheet.set(2, 3, literal(12))
    sheet.set(1, 4, label("Share"))
    for col in (2, 3, 4):
        sheet.set(col, 4, literal(col))
    names = create_names_from_selection(sheet, [3], [2])
    names += create_names_from_selection(sheet, [4], [2, 3, 4])
    assert names == [
        DefinedName("Unit_Price", "Parameters", "B3"),
        DefinedName("Share", "Parameters", "B4:D4"),
    ]


def test_create_names_needs_labels():
    sheet = Sheet("Parameters", SheetKind.PARAMETERS)
    sheet.set(2, 3, literal(1))
    with pytest.raises(WorkbookError):
        create_names_from_selection(sheet, [3], [2])


def test_create_names_detects_collisions():
    sheet = Sheet("Parameters", SheetKind.PARAMETERS)
    sheet.set(1, 3, label("Unit Price"))
    sheet.set(1, 4, label("Unit-Price"))
    with pytest.raises(NameCollision):
        create_names_from_selection(sheet, [3, 4], [2])


def test_workbook_validate():
    interface = Sheet("Interface", SheetKind.INTERFACE, {"A1": label("Interface")})
    parameters = Sheet("Parameters", SheetKind.PARAMETERS, {"B3": literal(1)})
    Workbook([interface, parameters], [DefinedName("x", "Parameters", "B3")]).validate()
    with pytest.raises(WorkbookError):
        Workbook([interface, parameters], [DefinedName("x", "Parameters", "B4")]).validate()
    with pytest.raises(WorkbookError):
        Workbook([interface], []).validate()
    with pytest.raises(WorkbookError):
        Workbook([interface, parameters], [DefinedName("x", "Parameters", "B3:C4")]).validate()


# ── Layout ────────────────────────────────────────────────────────────────────

def _formula(wb, sheet, addr):
    return wb.sheet(sheet).get(addr).formula


def test_items_layout_matches_structured_fixture(items_model):
    wb = generate(items_model, first_block_row=6)
    with open(fixture_path("items_structured.wbjson"), "rb") as fh:
        golden = read_json(fh.read())
    assert to_payload(wb) == to_payload(golden)


def test_items_definition_formulas(items_model):
    wb = generate(items_model, first_block_row=6)
    assert _formula(wb, "Model", "B8") == "=B6-B7"
    assert _formula(wb, "Model", "B12") == "=B10*B11"
    assert _formula(wb, "Model", "B16") == "=B14*B15"
    assert wb.sheet("Model").get("A8").bold_italic
    assert wb.sheet("Model").get("B8").bold_italic
    assert not wb.sheet("Model").get("A6").bold_italic


def test_pricing_sheets(pricing_model):
    wb = generate(pricing_model)
    assert [s.name for s in wb.sheets] == ["Interface", "Parameters", "Model", "Model Region"]
    assert [s.kind for s in wb.sheets] == [
        SheetKind.INTERFACE, SheetKind.PARAMETERS, SheetKind.MODEL, SheetKind.MODEL_REPEATING,
    ]


def test_pricing_total_demand_block(pricing_model):
    wb = generate(pricing_model)
    model = wb.sheet("Model")
    assert [model.get(f"A{r}").label for r in (3, 4, 5, 6)] == ["DemParA", "DemParB", "Price", "Total Demand"]
    assert [model.get(f"B{r}").formula for r in (3, 4, 5)] == ["=DemParA", "=DemParB", "=Price"]
    assert model.get("B6").formula == "=B3*B4^-B5"
    assert model.get("B8").formula == "=SUM(Profit)"
    assert wb.name("Total_Demand").range == "B6"


def test_pricing_repeating_sheet(pricing_model):
    wb = generate(pricing_model)
    region = wb.sheet("Model Region")
    assert [region.get(a).label for a in ("A3", "B3", "C3", "D3")] == ["Region", "South", "East", "North"]
    assert region.get("A7").label == "Regional Demand"
    assert [region.get(f"{c}7").formula for c in "BCD"] == ["=B5*B6", "=C5*C6", "=D5*D6"]
    assert wb.name("Regional_Demand").range == "B7:D7"
    assert wb.name("Regional_Demand").sheet == "Model Region"


def test_pricing_interface_and_parameters(pricing_model):
    wb = generate(pricing_model)
    interface = wb.sheet("Interface")
    assert interface.get("A3").label == "Price"
    assert interface.get("B3").literal == 375
    assert wb.name("Price__entry").range == "B3"
    assert [interface.get(f"{c}5").formula for c in "BCD"] == ["=Profit"] * 3
    assert interface.get("B6").formula == "=Total_Profit"

    parameters = wb.sheet("Parameters")
    assert parameters.get("B3").formula == "=Price__entry"
    assert wb.name("Price").sheet == "Parameters"
    assert wb.name("Distribution").range == "B8:D8"
    assert [parameters.get(f"{c}8").literal for c in "BCD"] == [0.48, 0.23, 0.29]


def test_every_variable_has_one_name(pricing_model):
    wb = generate(pricing_model)
    names = {n.name for n in wb.names}
    for var in pricing_model.variables:
        assert var.canonical_name in names
    assert [n.name for n in wb.names] == sorted(names)


def test_blocks_are_separated_by_one_blank_row(pricing_model):
    wb = generate(pricing_model)
    rows = sorted(wb.sheet("Model Region").rows())
    used = [r for r in rows if r >= 5]
    gaps = {b - a for a, b in zip(used, used[1:])}
    assert gaps <= {1, 2}


def test_reference_rows_use_names_only(pricing_model):
    wb = generate(pricing_model)
    for sheet in wb.model_sheets:
        for addr, content in sheet.cells.items():
            if content.is_formula and not content.bold_italic:
                assert "!" not in content.formula
                assert "$" not in content.formula


def test_first_block_row_must_leave_room():
    model = parse_model("param a = 1\ncalc b = a\n")
    with pytest.raises(LayoutOverflow):
        generate(model, first_block_row=2)


def test_input_without_default_gets_zero_entry(caplog):
    model = parse_model("input Quantity\ncalc Twice = Quantity * 2\n")
    with caplog.at_level("WARNING"):
        wb = generate(model)
    assert wb.sheet("Interface").get("B3").literal == 0
    assert "no default" in caplog.text


def test_no_repeating_sheet_without_repeating_calcs():
    model = parse_model("dimension D = [p, q]\nparam s over D = [1, 2]\ncalc t = SUM(s)\n")
    wb = generate(model)
    assert [s.name for s in wb.sheets] == ["Interface", "Parameters", "Model"]


@pytest.mark.parametrize("seed", range(100))
def test_generated_formulas_reparse(seed):
    wb = generate(random_model(seed))
    for sheet in wb.sheets:
        for content in sheet.cells.values():
            if content.is_formula:
                assert to_text(parse_formula(content.formula)) == content.formula


# ── Views ─────────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("value, text", [
    (13062.0, "13,062"),
    (2351110.344, "2,351,110.34"),
    (0.48, "0.48"),
    (-49265.9, "-49,265.90"),
])
def test_display_number(value, text):
    assert display_number(value) == text


def test_formula_view(items_model):
    text = formula_view(generate(items_model), "Model")
    assert text.splitlines()[0] == "[Model]"
    assert "=B3-B4" in text
    assert "Number of Items Sold" in text


def test_value_view(items_model):
    text = value_view(generate(items_model), "Model")
    assert "950" in text
    assert "11,400" in text
    assert "8,000" in text
