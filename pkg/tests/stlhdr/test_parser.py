from __future__ import annotations

import pytest

from stlhdr.stl import (
    Always,
    And,
    Eventually,
    FormulaDimensionError,
    FormulaSyntaxError,
    IntervalError,
    Not,
    Or,
    Predicate,
    Until,
    parse_formula,
)


def _pred(formula):
    assert isinstance(formula, Predicate)
    return formula.predicate


@pytest.mark.parametrize(
    "text,a,b",
    [
        ("x1 >= 2", (1.0, 0.0), -2.0),
        ("x1 > 2", (1.0, 0.0), -2.0),
        ("x1 <= 3", (-1.0, 0.0), 3.0),
        ("x2 < -0.5", (0.0, -1.0), -0.5),
        ("-x1 >= 0", (-1.0, 0.0), 0.0),
        ("2*x1 - x2 + 1 >= 3*x2", (2.0, -4.0), 1.0),
        ("x1 - 5.4861 >= 0", (1.0, 0.0), -5.4861),
        ("0.5 * (x1 + x2) >= 1", (0.5, 0.5), -1.0),
    ],
)
def test_predicates_normalise_to_nonnegative_form(text, a, b):
    pred = _pred(parse_formula(text, 2))
    assert pred.a == pytest.approx(a)
    assert pred.b == pytest.approx(b)


def test_operator_precedence():
    formula = parse_formula("x1 >= 0 | x1 >= 1 & x1 >= 2", 1)
    assert isinstance(formula, Or)
    assert isinstance(formula.right, And)


def test_until_binds_tighter_than_and():
    formula = parse_formula("x1 >= 0 U[0,2] x2 >= 0 & x2 <= 4", 2)
    assert isinstance(formula, And)
    assert isinstance(formula.left, Until)
    assert (formula.left.interval.t1, formula.left.interval.t2) == (0, 2)


def test_nested_unary_prefixes():
    formula = parse_formula("G[0,20] !F[1,2] (x1 >= 0)", 1)
    assert isinstance(formula, Always)
    assert isinstance(formula.child, Not)
    assert isinstance(formula.child.child, Eventually)
    assert formula.horizon == 23


def test_whitespace_and_parentheses_are_optional():
    compact = parse_formula("F[0,3](x1>=1&x2<=2)", 2)
    spaced = parse_formula("F[0,3] ( x1 >= 1 & x2 <= 2 )", 2)
    assert compact == spaced


def test_syntax_error_reports_position():
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula("G[0,3 (x1 >= 0)", 1)
    assert info.value.line == 1
    assert info.value.column >= 1


@pytest.mark.parametrize("text", ["x1 * x2 >= 0", "x1 >= ", "G[0,1]", "x1 >= 0 &"])
def test_malformed_formulas(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text, 2)


def test_variable_out_of_range():
    with pytest.raises(FormulaDimensionError):
        parse_formula("x3 >= 0", 2)


def test_inverted_interval():
    with pytest.raises(IntervalError):
        parse_formula("F[3,1] (x1 >= 0)", 1)


def test_constant_predicate_rejected():
    with pytest.raises(FormulaDimensionError):
        parse_formula("1 >= 0", 1)


def test_dimension_errors_name_the_column():
    with pytest.raises(FormulaDimensionError, match="column 11"):
        parse_formula("x1 >= 0 & x3 >= 0", 2)
    with pytest.raises(FormulaDimensionError, match="column 11"):
        parse_formula("x1 >= 0 & 2 >= 1", 2)
