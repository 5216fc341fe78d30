"""Text front-end for STL formulas.

Grammar (whitespace insensitive)::

    formula   := unary* atom | formula "U[" t1 "," t2 "]" formula
               | formula "&" formula | formula "|" formula
    unary     := "G[" t1 "," t2 "]" | "F[" t1 "," t2 "]" | "!"
    atom      := affine (">=" | ">" | "<=" | "<") affine | "(" formula ")"
    affine    := sums and differences of numbers, ``x1..xn`` and ``number * x_i``

Binding from tight to loose: unary prefixes, ``U``, ``&``, ``|``. Strict
comparisons are read as non-strict; every predicate is normalised to
``a'x + b >= 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import pyparsing as pp

from .formula import (
    Always,
    And,
    Eventually,
    Formula,
    FormulaDimensionError,
    Interval,
    LinearPredicate,
    Not,
    Or,
    Predicate,
    Until,
)

pp.ParserElement.enable_packrat()


class FormulaSyntaxError(ValueError):
    """Raised when formula text does not match the grammar."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


@dataclass
class _Affine:
    coeffs: Dict[int, float] = field(default_factory=dict)
    const: float = 0.0

    @property
    def is_constant(self) -> bool:
        return not any(self.coeffs.values())

    def scaled(self, factor: float) -> "_Affine":
        return _Affine({k: factor * v for k, v in self.coeffs.items()}, factor * self.const)

    def plus(self, other: "_Affine", sign: float = 1.0) -> "_Affine":
        coeffs = dict(self.coeffs)
        for k, v in other.coeffs.items():
            coeffs[k] = coeffs.get(k, 0.0) + sign * v
        return _Affine(coeffs, self.const + sign * other.const)


@dataclass
class _RawPredicate:
    affine: _Affine
    loc: int


@dataclass
class _RawOp:
    symbol: str
    bounds: Optional[Tuple[int, int]] = None


@dataclass
class _RawNode:
    op: _RawOp
    operands: Tuple["_Raw", ...]


_Raw = Union[_RawPredicate, _RawNode]


def _neg_action(s: str, loc: int, toks: pp.ParseResults) -> _Affine:
    sign, operand = toks[0][0], toks[0][-1]
    # Repeated prefixes arrive nested, one sign per level.
    return operand.scaled(-1.0) if sign == "-" else operand


def _mul_action(s: str, loc: int, toks: pp.ParseResults) -> _Affine:
    items = toks[0]
    result: _Affine = items[0]
    for rhs in items[2::2]:
        if result.is_constant:
            result = rhs.scaled(result.const)
        elif rhs.is_constant:
            result = result.scaled(rhs.const)
        else:
            raise pp.ParseFatalException(s, loc, "Nonlinear term: predicates must be affine")
    return result


def _sum_action(s: str, loc: int, toks: pp.ParseResults) -> _Affine:
    items = toks[0]
    result: _Affine = items[0]
    for op, rhs in zip(items[1::2], items[2::2]):
        result = result.plus(rhs, -1.0 if op == "-" else 1.0)
    return result


def _comparison_action(s: str, loc: int, toks: pp.ParseResults) -> _RawPredicate:
    lhs, op, rhs = toks
    diff = lhs.plus(rhs, -1.0) if op in (">=", ">") else rhs.plus(lhs, -1.0)
    return _RawPredicate(diff, loc)


def _unary_action(s: str, loc: int, toks: pp.ParseResults) -> _RawNode:
    op, operand = toks[0]
    return _RawNode(op, (operand,))


def _left_fold_action(s: str, loc: int, toks: pp.ParseResults) -> _RawNode:
    items = toks[0]
    result = items[0]
    for op, rhs in zip(items[1::2], items[2::2]):
        result = _RawNode(op, (result, rhs))
    return result


def _build_grammar() -> pp.ParserElement:
    number = pp.Regex(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?").set_name("number")
    number.set_parse_action(lambda t: _Affine({}, float(t[0])))
    variable = pp.Regex(r"x(\d+)").set_name("variable")
    variable.set_parse_action(lambda t: _Affine({int(t[0][1:]): 1.0}, 0.0))

    affine = pp.infix_notation(
        variable | number,
        [
            (pp.one_of("+ -"), 1, pp.OpAssoc.RIGHT, _neg_action),
            (pp.Literal("*"), 2, pp.OpAssoc.LEFT, _mul_action),
            (pp.one_of("+ -"), 2, pp.OpAssoc.LEFT, _sum_action),
        ],
    )
    comparison = affine + pp.one_of(">= > <= <") + affine
    comparison.set_parse_action(_comparison_action)

    bound = pp.Regex(r"-?\d+").set_parse_action(lambda t: int(t[0]))
    interval = pp.Suppress("[") + bound + pp.Suppress(",") + bound + pp.Suppress("]")

    temporal = pp.one_of("G F") + interval
    temporal.set_parse_action(lambda t: _RawOp(t[0], (t[1], t[2])))
    negation = pp.Literal("!").set_parse_action(lambda t: _RawOp("!"))
    until = pp.Literal("U") + interval
    until.set_parse_action(lambda t: _RawOp("U", (t[1], t[2])))
    conj = pp.Literal("&").set_parse_action(lambda t: _RawOp("&"))
    disj = pp.Literal("|").set_parse_action(lambda t: _RawOp("|"))

    return pp.infix_notation(
        comparison,
        [
            (temporal | negation, 1, pp.OpAssoc.RIGHT, _unary_action),
            (until, 2, pp.OpAssoc.LEFT, _left_fold_action),
            (conj, 2, pp.OpAssoc.LEFT, _left_fold_action),
            (disj, 2, pp.OpAssoc.LEFT, _left_fold_action),
        ],
    )


_GRAMMAR = _build_grammar()


def _lower(raw: _Raw, state_dim: int, text: str) -> Formula:
    if isinstance(raw, _RawPredicate):
        column = pp.col(raw.loc, text)
        if raw.affine.is_constant:
            raise FormulaDimensionError(f"Comparison at column {column} mentions no state variable.")
        coeffs = [0.0] * state_dim
        for index, value in raw.affine.coeffs.items():
            if not 1 <= index <= state_dim:
                raise FormulaDimensionError(
                    f"Variable x{index} at column {column} is out of range for a {state_dim}-dimensional state."
                )
            coeffs[index - 1] = value
        return Predicate(LinearPredicate(tuple(coeffs), raw.affine.const))

    children = [_lower(child, state_dim, text) for child in raw.operands]
    symbol = raw.op.symbol
    interval = Interval(*raw.op.bounds) if raw.op.bounds is not None else None
    if symbol == "!":
        return Not(children[0])
    if symbol == "G":
        return Always(interval, children[0])
    if symbol == "F":
        return Eventually(interval, children[0])
    if symbol == "U":
        return Until(interval, children[0], children[1])
    if symbol == "&":
        return And(children[0], children[1])
    return Or(children[0], children[1])


def parse_formula(text: str, state_dim: int) -> Formula:
    """Parse ``text`` into a formula over ``state_dim``-dimensional states."""
    if state_dim <= 0:
        raise FormulaDimensionError(f"state_dim must be positive, got {state_dim}")
    try:
        raw = _GRAMMAR.parse_string(text, parse_all=True)[0]
    except pp.ParseBaseException as exc:
        raise FormulaSyntaxError(exc.msg, exc.lineno, exc.col) from exc
    return _lower(raw, state_dim, text)
