"""
test_model.py
Naming discipline, expression queries and the dependency graph.
Run with: pytest test_model.py
"""

import pytest

from core.graph import check_shapes, toposort, validate
from core.model import (
    Agg, BinOp, CycleDetected, Dimension, EmptyLabel, Model, NameCollision,
    Neg, Number, ShapeError, SsmiError, VarRef, VariableKind, direct_references,
    looks_like_cell_reference, make_variable, mangle, operator_kinds, references,
)


# ── mangle ────────────────────────────────────────────────────────────────────

@pytest.mark.parametrize("label, name", [
    ("Price", "Price"),
    ("Total Demand", "Total_Demand"),
    ("Cost ($/unit)", "Cost____unit_"),
    ("2nd Quarter", "_2nd_Quarter"),
    ("  Padded  ", "Padded"),
    ("Gross-Margin %", "Gross_Margin__"),
])
def test_mangle(label, name):
    assert mangle(label) == name


@pytest.mark.parametrize("label", ["", "   ", None])
def test_mangle_rejects_empty_labels(label):
    with pytest.raises(EmptyLabel):
        mangle(label)


def test_mangle_is_idempotent_on_its_output():
    for label in ["Total Demand", "Cost ($/unit)", "2nd Quarter"]:
        once = mangle(label)
        assert mangle(once) == once


@pytest.mark.parametrize("name", ["A1", "AB12", "xfd1048576", "R1C1", "R", "C", "r2", "C12"])
def test_cell_like_names(name):
    assert looks_like_cell_reference(name)


@pytest.mark.parametrize("name", ["Price", "Total_Demand", "ABCD1", "Rate", "A1B", "DemParA"])
def test_ordinary_names(name):
    assert not looks_like_cell_reference(name)


# ── Expressions ───────────────────────────────────────────────────────────────

def test_references_keep_first_appearance_order():
    expr = BinOp("+", BinOp("*", VarRef("b"), VarRef("a")), BinOp("*", VarRef("b"), Agg("SUM", VarRef("c"))))
    assert references(expr) == ["b", "a", "c"]
    assert direct_references(expr) == ["b", "a"]


def test_operator_kinds():
    expr = BinOp("*", VarRef("DemParA"), BinOp("^", VarRef("DemParB"), Neg(VarRef("Price"))))
    assert operator_kinds(expr) == ["*", "^", "neg"]
    assert operator_kinds(BinOp("+", BinOp("+", VarRef("a"), VarRef("b")), Number(1))) == ["+"]
    assert operator_kinds(Agg("SUM", VarRef("x"))) == ["SUM"]
    assert operator_kinds(VarRef("x")) == []


# ── Model ─────────────────────────────────────────────────────────────────────

def test_mangled_labels_must_not_collide():
    with pytest.raises(NameCollision) as info:
        Model(None, (
            make_variable("Unit Cost", VariableKind.PARAMETER, literals=[1]),
            make_variable("Unit-Cost", VariableKind.PARAMETER, literals=[2]),
        ))
    assert info.value.name == "Unit_Cost"


def test_repeating_variable_needs_a_dimension():
    with pytest.raises(SsmiError):
        Model(None, (make_variable("Share", VariableKind.PARAMETER, repeating=True, literals=[1, 2]),))


def test_literal_count_matches_dimension():
    dim = Dimension("Region", ("South", "East", "North"))
    with pytest.raises(SsmiError):
        Model(dim, (make_variable("Share", VariableKind.PARAMETER, repeating=True, literals=[1, 2]),))


def test_dimension_rejects_repeated_instances():
    with pytest.raises(SsmiError):
        Dimension("Region", ("South", "South"))


def test_calculated_variable_needs_formula():
    with pytest.raises(SsmiError):
        make_variable("Total", VariableKind.CALCULATED)
    with pytest.raises(SsmiError):
        make_variable("Rate", VariableKind.PARAMETER, formula=Number(1))


def test_model_lookup(pricing_model):
    assert "Total_Demand" in pricing_model
    assert "Nope" not in pricing_model
    assert pricing_model.get("Total_Demand").display_label == "Total Demand"
    assert [v.canonical_name for v in pricing_model.of_kind(VariableKind.OUTPUT)] == ["Profit", "Total_Profit"]
    with pytest.raises(KeyError):
        pricing_model.get("Nope")


# ── Graph ─────────────────────────────────────────────────────────────────────

def _scalar_model(*calcs):
    variables = [make_variable("a", VariableKind.PARAMETER, literals=[1])]
    variables += [make_variable(label, VariableKind.CALCULATED, formula=expr) for label, expr in calcs]
    return Model(None, tuple(variables))


def test_toposort_puts_dependencies_first():
    model = _scalar_model(
        ("c", BinOp("+", VarRef("b"), VarRef("a"))),
        ("b", BinOp("*", VarRef("a"), Number(2))),
    )
    assert toposort(model) == ["a", "b", "c"]


def test_toposort_is_deterministic(pricing_model):
    assert toposort(pricing_model) == toposort(pricing_model)
    order = toposort(pricing_model)
    assert order[:7] == [
        "Price", "DemParA", "DemParB", "Fixed_Cost", "Manufacturing_Cost", "Distribution", "Delivery_Cost",
    ]
    for var in pricing_model.calculated:
        for ref in references(var.formula):
            assert order.index(ref) < order.index(var.canonical_name)


def test_cycle_is_reported_with_its_members():
    model = _scalar_model(
        ("x", BinOp("+", VarRef("y"), VarRef("a"))),
        ("y", BinOp("+", VarRef("x"), Number(1))),
    )
    with pytest.raises(CycleDetected) as info:
        validate(model)
    assert set(info.value.cycle) == {"x", "y"}


def test_self_reference_is_a_cycle():
    model = _scalar_model(("x", BinOp("+", VarRef("x"), Number(1))))
    with pytest.raises(CycleDetected):
        toposort(model)


def test_scalar_formula_must_aggregate_repeating_operands():
    dim = Dimension("Region", ("South", "East"))
    model = Model(dim, (
        make_variable("Share", VariableKind.PARAMETER, repeating=True, literals=[1, 2]),
        make_variable("Bad", VariableKind.CALCULATED, formula=BinOp("*", VarRef("Share"), Number(2))),
        make_variable("Good", VariableKind.CALCULATED, formula=Agg("SUM", VarRef("Share"))),
    ))
    violations = check_shapes(model)
    assert [v.variable for v in violations] == ["Bad"]
    with pytest.raises(ShapeError):
        validate(model)


def test_aggregate_over_scalar_is_a_shape_error():
    model = _scalar_model(("s", Agg("SUM", VarRef("a"))))
    violations = check_shapes(model)
    assert len(violations) == 1
    assert "aggregates a scalar" in violations[0].message


def test_repeating_formula_may_broadcast_scalars():
    dim = Dimension("Region", ("South", "East"))
    model = Model(dim, (
        make_variable("Rate", VariableKind.PARAMETER, literals=[3]),
        make_variable("Share", VariableKind.PARAMETER, repeating=True, literals=[1, 2]),
        make_variable("Scaled", VariableKind.CALCULATED, repeating=True,
                      formula=BinOp("*", VarRef("Share"), VarRef("Rate"))),
    ))
    assert check_shapes(model) == []
