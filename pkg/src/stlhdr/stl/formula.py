"""Discrete-time STL formulas over linear predicates.

Formulas are immutable trees. Scores are computed as a *trace* per node: the
robustness at every start time the signal admits, so every (node, time) pair
is evaluated once and whole batches of signals are scored together.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterator, List, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


class FormulaDimensionError(ValueError):
    """Raised when predicate coefficients do not match the state dimension."""


class IntervalError(ValueError):
    """Raised for negative or inverted temporal bounds."""


class HorizonError(ValueError):
    """Raised when a signal is too short to be scored at the requested time."""


@dataclass(frozen=True)
class LinearPredicate:
    """Half-space predicate ``a'x + b >= 0`` over a single state."""

    a: Tuple[float, ...]
    b: float

    def __post_init__(self) -> None:
        coeffs = tuple(float(c) for c in self.a)
        if not coeffs:
            raise FormulaDimensionError("Predicate needs at least one coefficient.")
        if not any(c != 0.0 for c in coeffs):
            raise FormulaDimensionError("Predicate coefficients must not all be zero.")
        object.__setattr__(self, "a", coeffs)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return len(self.a)

    @cached_property
    def vector(self) -> np.ndarray:
        return np.asarray(self.a, dtype=float)

    def evaluate(self, states: np.ndarray) -> np.ndarray:
        """Predicate value for states stacked along the last axis."""
        return states @ self.vector + self.b

    def negated(self) -> "LinearPredicate":
        return LinearPredicate(tuple(-c for c in self.a), -self.b)


@dataclass(frozen=True)
class Interval:
    t1: int
    t2: int

    def __post_init__(self) -> None:
        if int(self.t1) != self.t1 or int(self.t2) != self.t2:
            raise IntervalError(f"Interval bounds must be integers, got [{self.t1},{self.t2}].")
        if self.t1 < 0 or self.t2 < 0:
            raise IntervalError(f"Interval bounds must be nonnegative, got [{self.t1},{self.t2}].")
        if self.t1 > self.t2:
            raise IntervalError(f"Inverted interval [{self.t1},{self.t2}]: t1 must be <= t2.")

    def __str__(self) -> str:
        return f"[{self.t1},{self.t2}]"


class Formula(ABC):
    """Base class of the formula AST."""

    @property
    @abstractmethod
    def horizon(self) -> int:
        """Minimum number of signal steps needed to score at t = 0."""

    @abstractmethod
    def children(self) -> Tuple["Formula", ...]:
        ...

    @abstractmethod
    def trace(self, states: np.ndarray) -> np.ndarray:
        """Scores at every admissible start time.

        ``states`` has shape (B, L, n); the result has shape (B, L - H + 1).
        """

    # Combinators
    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def always(self, t1: int, t2: int) -> "Formula":
        return Always(Interval(t1, t2), self)

    def eventually(self, t1: int, t2: int) -> "Formula":
        return Eventually(Interval(t1, t2), self)

    def until(self, other: "Formula", t1: int, t2: int) -> "Formula":
        return Until(Interval(t1, t2), self, other)

    def implies(self, other: "Formula") -> "Formula":
        return Or(Not(self), other)

    def walk(self) -> Iterator["Formula"]:
        yield self
        for child in self.children():
            yield from child.walk()

    @property
    def state_dim(self) -> int:
        dims = {node.predicate.dim for node in self.walk() if isinstance(node, Predicate)}
        if len(dims) != 1:
            raise FormulaDimensionError(f"Predicates disagree on state dimension: {sorted(dims)}")
        return dims.pop()

    def __str__(self) -> str:
        return pretty_print(self)


@dataclass(frozen=True)
class Predicate(Formula):
    predicate: LinearPredicate

    @property
    def horizon(self) -> int:
        return 1

    def children(self) -> Tuple[Formula, ...]:
        return ()

    def trace(self, states: np.ndarray) -> np.ndarray:
        return self.predicate.evaluate(states)


@dataclass(frozen=True)
class Not(Formula):
    child: Formula

    @property
    def horizon(self) -> int:
        return self.child.horizon

    def children(self) -> Tuple[Formula, ...]:
        return (self.child,)

    def trace(self, states: np.ndarray) -> np.ndarray:
        return -self.child.trace(states)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    @property
    def horizon(self) -> int:
        return max(self.left.horizon, self.right.horizon)

    def children(self) -> Tuple[Formula, ...]:
        return (self.left, self.right)

    def trace(self, states: np.ndarray) -> np.ndarray:
        width = states.shape[1] - self.horizon + 1
        return np.minimum(self.left.trace(states)[:, :width], self.right.trace(states)[:, :width])


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    @property
    def horizon(self) -> int:
        return max(self.left.horizon, self.right.horizon)

    def children(self) -> Tuple[Formula, ...]:
        return (self.left, self.right)

    def trace(self, states: np.ndarray) -> np.ndarray:
        width = states.shape[1] - self.horizon + 1
        return np.maximum(self.left.trace(states)[:, :width], self.right.trace(states)[:, :width])


def _window_reduce(child_trace: np.ndarray, interval: Interval, reducer) -> np.ndarray:
    windows = sliding_window_view(
        child_trace[:, interval.t1 :], interval.t2 - interval.t1 + 1, axis=1
    )
    return reducer(windows, axis=-1)


@dataclass(frozen=True)
class Always(Formula):
    interval: Interval
    child: Formula

    @property
    def horizon(self) -> int:
        return self.interval.t2 + self.child.horizon

    def children(self) -> Tuple[Formula, ...]:
        return (self.child,)

    def trace(self, states: np.ndarray) -> np.ndarray:
        return _window_reduce(self.child.trace(states), self.interval, np.min)


@dataclass(frozen=True)
class Eventually(Formula):
    interval: Interval
    child: Formula

    @property
    def horizon(self) -> int:
        return self.interval.t2 + self.child.horizon

    def children(self) -> Tuple[Formula, ...]:
        return (self.child,)

    def trace(self, states: np.ndarray) -> np.ndarray:
        return _window_reduce(self.child.trace(states), self.interval, np.max)


@dataclass(frozen=True)
class Until(Formula):
    """Non-strict bounded until: the left operand must hold up to and including tau."""

    interval: Interval
    left: Formula
    right: Formula

    @property
    def horizon(self) -> int:
        return self.interval.t2 + max(self.left.horizon, self.right.horizon)

    def children(self) -> Tuple[Formula, ...]:
        return (self.left, self.right)

    def trace(self, states: np.ndarray) -> np.ndarray:
        width = states.shape[1] - self.horizon + 1
        hold = self.left.trace(states)
        reach = self.right.trace(states)
        running = np.full((states.shape[0], width), np.inf)
        best = np.full((states.shape[0], width), -np.inf)
        for k in range(self.interval.t2 + 1):
            running = np.minimum(running, hold[:, k : k + width])
            if k >= self.interval.t1:
                best = np.maximum(best, np.minimum(reach[:, k : k + width], running))
        return best


StlFormula = Union[Predicate, Not, And, Or, Always, Eventually, Until]


@dataclass(frozen=True)
class StackedSignal:
    """Flat trajectory vector ``(x_0', ..., x_{H-1}')'``."""

    values: np.ndarray
    state_dim: int

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).reshape(-1)
        if self.state_dim <= 0 or values.size % self.state_dim != 0:
            raise FormulaDimensionError(
                f"Signal of length {values.size} is not a whole number of "
                f"{self.state_dim}-dimensional states."
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_states(cls, states: Sequence[Sequence[float]]) -> "StackedSignal":
        arr = np.atleast_2d(np.asarray(states, dtype=float))
        return cls(arr.reshape(-1), arr.shape[1])

    @property
    def steps(self) -> int:
        return self.values.size // self.state_dim

    @property
    def states(self) -> np.ndarray:
        return self.values.reshape(self.steps, self.state_dim)

    def __len__(self) -> int:
        return self.values.size


def _check_dim(formula: Formula, state_dim: int) -> None:
    for node in formula.walk():
        if isinstance(node, Predicate) and node.predicate.dim != state_dim:
            raise FormulaDimensionError(
                f"Predicate over {node.predicate.dim} states used with a "
                f"{state_dim}-dimensional signal."
            )


def horizon(formula: Formula) -> int:
    return formula.horizon


def robustness_batch(formula: Formula, signals: np.ndarray, state_dim: int, t: int = 0) -> np.ndarray:
    """Robustness of many stacked signals at time ``t``; shape (B,)."""
    signals = np.atleast_2d(np.asarray(signals, dtype=float))
    _check_dim(formula, state_dim)
    steps = signals.shape[1] // state_dim
    if steps < t + formula.horizon:
        raise HorizonError(
            f"Signal has {steps} steps; scoring at t={t} needs {t + formula.horizon}."
        )
    states = signals[:, : steps * state_dim].reshape(signals.shape[0], steps, state_dim)
    return formula.trace(states)[:, t]


def robustness(formula: Formula, signal: StackedSignal, t: int = 0) -> float:
    return float(robustness_batch(formula, signal.values[None, :], signal.state_dim, t)[0])


def in_level_set(signal: StackedSignal, formula: Formula, level: float) -> bool:
    return robustness(formula, signal, 0) >= level


def collect_predicates(formula: Formula) -> List[LinearPredicate]:
    """Distinct predicates in first-appearance order, negation contexts merged."""
    seen: Dict[LinearPredicate, None] = {}
    for node in formula.walk():
        if isinstance(node, Predicate):
            seen.setdefault(node.predicate, None)
    return list(seen)


def negate(formula: Formula) -> Formula:
    return Not(formula)


def _format_predicate(pred: LinearPredicate) -> str:
    parts: List[str] = []
    for idx, coeff in enumerate(pred.a, start=1):
        if coeff == 0.0:
            continue
        sign = "-" if coeff < 0 else "+"
        term = f"{abs(coeff)!r}*x{idx}"
        if not parts:
            parts.append(f"-{term}" if sign == "-" else term)
        else:
            parts.append(f"{sign} {term}")
    sign = "-" if pred.b < 0 else "+"
    parts.append(f"{sign} {abs(pred.b)!r}")
    return " ".join(parts) + " >= 0"


def pretty_print(formula: Formula) -> str:
    """Canonical, fully parenthesised text accepted by ``parse_formula``."""
    if isinstance(formula, Predicate):
        return f"({_format_predicate(formula.predicate)})"
    if isinstance(formula, Not):
        return f"!{pretty_print(formula.child)}"
    if isinstance(formula, And):
        return f"({pretty_print(formula.left)} & {pretty_print(formula.right)})"
    if isinstance(formula, Or):
        return f"({pretty_print(formula.left)} | {pretty_print(formula.right)})"
    if isinstance(formula, Always):
        return f"G{formula.interval}{pretty_print(formula.child)}"
    if isinstance(formula, Eventually):
        return f"F{formula.interval}{pretty_print(formula.child)}"
    if isinstance(formula, Until):
        return f"({pretty_print(formula.left)} U{formula.interval} {pretty_print(formula.right)})"
    raise TypeError(f"Unknown formula node {type(formula).__name__}")
