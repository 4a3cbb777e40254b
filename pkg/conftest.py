"""
conftest.py
Shared fixtures: paths into fixtures/, the parsed sample models, and a
seeded generator of random valid models for the property-style tests.
"""

import os
import random
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pytest

from core.model import Agg, BinOp, Dimension, Model, Neg, Number, VarRef, VariableKind, make_variable
from dsl.parser import parse_file

FIXTURES = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def pricing_model():
    return parse_file(fixture_path("regional_pricing.ssmi"))


@pytest.fixture
def items_model():
    return parse_file(fixture_path("items.ssmi"))


@pytest.fixture
def total_cost_model():
    return parse_file(fixture_path("total_cost.ssmi"))


# ── Random models ─────────────────────────────────────────────────────────────
# Inputs and parameters are positive. Denominators and power bases are built
# from them only, and exponents are whole numbers no larger than 4.

SCALAR_BASES = ("Base", "Rate")
REPEATING_BASES = ("Share", "Extra")


def _small(rng: random.Random) -> Number:
    return Number(float(rng.randint(1, 9)))


def _base_leaf(rng: random.Random, want_repeating: bool) -> VarRef:
    names = SCALAR_BASES + REPEATING_BASES if want_repeating else SCALAR_BASES
    return VarRef(rng.choice(names))


def _leaf(rng: random.Random, scalars: list, repeating: list, want_repeating: bool):
    roll = rng.random()
    if roll < 0.15:
        return _small(rng)
    if want_repeating and repeating and roll < 0.6:
        return VarRef(rng.choice(repeating))
    if not want_repeating and repeating and roll < 0.3:
        return Agg("SUM", VarRef(rng.choice(repeating)))
    return VarRef(rng.choice(scalars))


def _power(rng: random.Random, want_repeating: bool) -> BinOp:
    base = _base_leaf(rng, want_repeating)
    if rng.random() < 0.3:
        base = Neg(base)
    if rng.random() < 0.3:
        base = BinOp("^", base, Number(2.0))
    if rng.random() < 0.3:
        exponent = BinOp("^", Number(float(rng.randint(1, 2))), Number(2.0))
    else:
        exponent = Number(float(rng.randint(1, 3)))
    return BinOp("^", base, exponent)


def _random_expr(rng: random.Random, scalars: list, repeating: list, want_repeating: bool, depth: int):
    """A small expression over the given names using every operator."""
    if depth == 0 or rng.random() < 0.3:
        return _leaf(rng, scalars, repeating, want_repeating)
    if rng.random() < 0.1:
        return Neg(_random_expr(rng, scalars, repeating, want_repeating, depth - 1))
    op = rng.choice(["+", "-", "*", "/", "^"])
    if op == "^":
        return _power(rng, want_repeating)
    left = _random_expr(rng, scalars, repeating, want_repeating, depth - 1)
    if op == "*":
        right = _small(rng) if rng.random() < 0.5 else _base_leaf(rng, want_repeating)
    elif op == "/":
        if rng.random() < 0.5:
            right = _small(rng)
        else:
            right = BinOp(rng.choice(["*", "+"]), _base_leaf(rng, want_repeating), _small(rng))
    else:
        right = _random_expr(rng, scalars, repeating, want_repeating, depth - 1)
    return BinOp(op, left, right)


def random_model(seed: int, n_calc: int = 6) -> Model:
    """A valid model with a 3-instance dimension, inputs, params and `n_calc` calcs."""
    rng = random.Random(seed)
    dim = Dimension("Area", ("North", "South", "West"))
    variables = [
        make_variable("Base", VariableKind.INPUT, literals=[rng.randint(1, 20)]),
        make_variable("Rate", VariableKind.PARAMETER, literals=[rng.randint(1, 5)]),
        make_variable("Share", VariableKind.PARAMETER, repeating=True,
                      literals=[rng.randint(1, 9) for _ in range(3)]),
        make_variable("Extra", VariableKind.INPUT, repeating=True,
                      literals=[rng.randint(1, 9) for _ in range(3)]),
    ]
    scalars, repeating = ["Base", "Rate"], ["Share", "Extra"]

    for i in range(n_calc):
        want_repeating = rng.random() < 0.5
        kind = VariableKind.OUTPUT if i == n_calc - 1 else VariableKind.CALCULATED
        expr = _random_expr(rng, scalars, repeating, want_repeating, depth=2)
        label = f"Calc {i}"
        variables.append(make_variable(label, kind, repeating=want_repeating, formula=expr))
        (repeating if want_repeating else scalars).append(f"Calc_{i}")

    return Model(dim, tuple(variables))


def random_inputs(seed: int) -> dict:
    """Positive values for the two inputs of `random_model`."""
    rng = random.Random(seed * 7919 + 1)
    return {
        "Base": round(rng.uniform(1, 50), 2),
        "Extra": tuple(round(rng.uniform(1, 50), 2) for _ in range(3)),
    }


@pytest.fixture
def make_random_model():
    return random_model
