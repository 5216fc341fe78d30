from .formula import (
    Always,
    And,
    Eventually,
    Formula,
    FormulaDimensionError,
    HorizonError,
    Interval,
    IntervalError,
    LinearPredicate,
    Not,
    Or,
    Predicate,
    StackedSignal,
    Until,
    collect_predicates,
    horizon,
    in_level_set,
    negate,
    pretty_print,
    robustness,
    robustness_batch,
)
from .parser import FormulaSyntaxError, parse_formula

__all__ = [
    "Always",
    "And",
    "Eventually",
    "Formula",
    "FormulaDimensionError",
    "FormulaSyntaxError",
    "HorizonError",
    "Interval",
    "IntervalError",
    "LinearPredicate",
    "Not",
    "Or",
    "Predicate",
    "StackedSignal",
    "Until",
    "collect_predicates",
    "horizon",
    "in_level_set",
    "negate",
    "parse_formula",
    "pretty_print",
    "robustness",
    "robustness_batch",
]
