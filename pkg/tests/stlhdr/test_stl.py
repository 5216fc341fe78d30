from __future__ import annotations

import numpy as np
import pytest

from stlhdr.stl import (
    Always,
    And,
    Eventually,
    Formula,
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
    in_level_set,
    negate,
    parse_formula,
    pretty_print,
    robustness,
    robustness_batch,
)

EXAMPLE = "G[0,9] (x1 + x2 - 10 >= 0) | F[0,15] G[0,5] (-x1 >= 0)"


@pytest.fixture
def example_signal():
    # s_t = (t - 8, 2)
    return StackedSignal.from_states([[t - 8, 2] for t in range(21)])


def test_example_horizon():
    formula = parse_formula(EXAMPLE, 2)
    assert formula.horizon == 21


def test_example_robustness_components(example_signal):
    formula = parse_formula(EXAMPLE, 2)
    assert robustness(formula.left, example_signal) == -16.0
    assert robustness(formula.right, example_signal) == 3.0
    assert robustness(formula, example_signal) == 3.0


def test_signal_shorter_than_horizon_raises(example_signal):
    formula = parse_formula(EXAMPLE, 2)
    short = StackedSignal(example_signal.values[:40], 2)
    with pytest.raises(HorizonError):
        robustness(formula, short)


def test_horizon_rules():
    p = Predicate(LinearPredicate((1.0,), 0.0))
    assert p.horizon == 1
    assert Always(Interval(2, 4), p).horizon == 5
    assert Eventually(Interval(0, 3), Always(Interval(0, 1), p)).horizon == 5
    assert Until(Interval(1, 2), p, Eventually(Interval(0, 2), p)).horizon == 5
    assert (p & Always(Interval(0, 6), p)).horizon == 7


def test_until_is_non_strict():
    # x1 holds at steps 0..2, x2 first holds at step 2.
    signal = StackedSignal.from_states([[1, -1], [1, -1], [1, 2], [-1, 2]])
    formula = parse_formula("x1 >= 0 U[0,3] x2 >= 0", 2)
    assert robustness(formula, signal) == pytest.approx(1.0)
    late = parse_formula("x1 >= 0 U[3,3] x2 >= 0", 2)
    assert robustness(late, signal) == pytest.approx(-1.0)


def test_zero_robustness_counts_as_satisfied():
    formula = parse_formula("x1 >= 2", 1)
    assert in_level_set(StackedSignal(np.array([2.0]), 1), formula, 0.0)


def test_negation_flips_sign(rng):
    formula = parse_formula("F[0,2] (x1 >= 0.5) & G[0,1] (x2 <= 1)", 2)
    X = rng.normal(size=(50, 6))
    np.testing.assert_allclose(robustness_batch(negate(formula), X, 2), -robustness_batch(formula, X, 2))
    assert isinstance(~formula, Not)


def test_batch_matches_single_signal(rng):
    formula = parse_formula(EXAMPLE, 2)
    X = rng.normal(scale=5.0, size=(8, 42))
    batch = robustness_batch(formula, X, 2)
    single = [robustness(formula, StackedSignal(x, 2)) for x in X]
    np.testing.assert_allclose(batch, single)


def test_robustness_at_later_time(example_signal):
    formula = parse_formula("x1 >= 0", 2)
    assert robustness(formula, example_signal, t=10) == 2.0


def test_combinators_build_expected_nodes():
    a = Predicate(LinearPredicate((1.0, 0.0), -1.0))
    b = Predicate(LinearPredicate((0.0, 1.0), 0.0))
    implication = a.implies(b)
    assert isinstance(implication.left, Not)
    signal = StackedSignal.from_states([[0.0, -3.0]])
    # a is violated, so the implication holds.
    assert robustness(implication, signal) == pytest.approx(1.0)
    assert a.always(0, 2).eventually(1, 1).horizon == 4
    assert a.until(b, 0, 1).horizon == 2


def test_collect_predicates_deduplicates():
    formula = parse_formula("G[0,2] (x1 >= 1) & F[0,1] (x1 >= 1) | !(x2 <= 0)", 2)
    preds = collect_predicates(formula)
    assert len(preds) == 2


def test_pretty_print_round_trip(rng):
    text = "G[0,3] (2*x1 - x2 >= 1.5) | (x1 >= 0 U[1,2] !(x2 < -0.25)) & F[0,1] (x1 <= 1e-3)"
    formula = parse_formula(text, 2)
    again = parse_formula(pretty_print(formula), 2)
    assert again.horizon == formula.horizon
    X = rng.normal(size=(40, 2 * formula.horizon))
    np.testing.assert_allclose(robustness_batch(again, X, 2), robustness_batch(formula, X, 2))


@pytest.mark.parametrize("bounds", [(-1, 2), (3, 1)])
def test_invalid_interval(bounds):
    with pytest.raises(IntervalError):
        Interval(*bounds)


def test_signal_length_must_match_state_dim():
    with pytest.raises(ValueError):
        StackedSignal(np.zeros(5), 2)


def _holds(formula: Formula, states: np.ndarray, t: int) -> bool:
    """Boolean satisfaction by direct recursion, no scores involved."""
    if isinstance(formula, Predicate):
        return bool(formula.predicate.evaluate(states[t]) >= 0.0)
    if isinstance(formula, Not):
        return not _holds(formula.child, states, t)
    if isinstance(formula, And):
        return _holds(formula.left, states, t) and _holds(formula.right, states, t)
    if isinstance(formula, Or):
        return _holds(formula.left, states, t) or _holds(formula.right, states, t)
    window = range(formula.interval.t1, formula.interval.t2 + 1)
    if isinstance(formula, Always):
        return all(_holds(formula.child, states, t + k) for k in window)
    if isinstance(formula, Eventually):
        return any(_holds(formula.child, states, t + k) for k in window)
    return any(
        _holds(formula.right, states, t + k) and all(_holds(formula.left, states, t + j) for j in range(k + 1))
        for k in window
    )


def _random_formula(rng: np.random.Generator, depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.25:
        return Predicate(LinearPredicate(tuple(rng.normal(size=2)), float(rng.normal(scale=0.5))))
    kind = rng.integers(6)
    if kind == 0:
        return Not(_random_formula(rng, depth - 1))
    if kind in (1, 2):
        op = And if kind == 1 else Or
        return op(_random_formula(rng, depth - 1), _random_formula(rng, depth - 1))
    t1 = int(rng.integers(3))
    interval = Interval(t1, t1 + int(rng.integers(3)))
    if kind == 3:
        return Always(interval, _random_formula(rng, depth - 1))
    if kind == 4:
        return Eventually(interval, _random_formula(rng, depth - 1))
    return Until(interval, _random_formula(rng, depth - 1), _random_formula(rng, depth - 1))


class TestBooleanSemantics:
    """The sign of robustness agrees with plain boolean satisfaction."""

    def test_random_formulas(self):
        rng = np.random.default_rng(31)
        compared = 0
        for _ in range(200):
            formula = _random_formula(rng, depth=3)
            signals = rng.normal(size=(50, formula.horizon, 2))
            rho = robustness_batch(formula, signals.reshape(50, -1), 2)
            for states, value in zip(signals, rho):
                if abs(value) < 1e-12:
                    continue
                assert (value >= 0.0) == _holds(formula, states, 0), pretty_print(formula)
                compared += 1
        assert compared > 9_000

    def test_exact_tie_counts_as_satisfied(self):
        formula = Predicate(LinearPredicate((1.0,), -1.0))
        signal = StackedSignal.from_states([[1.0]])
        assert robustness(formula, signal) == 0.0
        assert in_level_set(signal, formula, 0.0)
        assert _holds(formula, signal.states, 0)
