"""Reach-avoid specifications as unions of trajectory-space polytopes.

A trajectory fails a reach-avoid task in one of two ways:

* it enters an obstacle at some step but still reaches every goal in its
  window (``fail_a``);
* it misses at least one goal window (``fail_b``), which is a union over
  goals of "one violated goal face at every window step".

Both unions are conjoined with the initial set. Their union is exactly
``init & !(avoid & reach)``; ``failure_formula`` builds that formula for
cross-checking and for the STL sampling path.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from stlhdr.core.config import settings
from stlhdr.stl.formula import Always, And, Eventually, Formula, Interval, LinearPredicate, Not, Predicate

from .polytope import GeometryError, Polytope, UnionOfPolytopes, lift_polytope

logger = logging.getLogger(__name__)

Window = Tuple[int, int]


class EnumerationCapError(RuntimeError):
    """Raised when a polytope enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class Goal:
    region: Polytope
    window: Window

    @property
    def steps(self) -> range:
        return range(self.window[0], self.window[1] + 1)


@dataclass(frozen=True)
class StlDelegation:
    """Placeholder for a domain too large to enumerate; sample it through the STL path."""

    reason: str
    size: int


@dataclass
class ReachAvoidDomains:
    fail_a: UnionOfPolytopes
    fail_b: UnionOfPolytopes
    satisfaction: Union[UnionOfPolytopes, StlDelegation]

    @property
    def failure(self) -> UnionOfPolytopes:
        return UnionOfPolytopes(self.fail_a.members + self.fail_b.members, dim=self.fail_a.dim)


def _validate(init: Optional[Polytope], unsafe: Sequence[Polytope], goals: Sequence[Goal], steps: int) -> int:
    regions = ([init] if init is not None else []) + list(unsafe) + [g.region for g in goals]
    if not regions:
        raise GeometryError("A reach-avoid task needs an initial set, an obstacle or a goal.")
    dims = {r.dim for r in regions}
    if len(dims) != 1:
        raise GeometryError(f"Reach-avoid regions disagree on state dimension: {sorted(dims)}")
    for goal in goals:
        t0, t1 = goal.window
        if not 0 <= t0 <= t1 < steps:
            raise GeometryError(f"Goal window [{t0},{t1}] does not fit a {steps}-step trajectory.")
    return dims.pop()


def _check_cap(kind: str, size: int, cap: int) -> None:
    if size > cap:
        raise EnumerationCapError(
            f"{kind} would enumerate {size} polytopes (cap {cap}); "
            "verify the reach-avoid formula through the STL-score path instead."
        )


def _conjoin(parts: Sequence[Polytope]) -> Polytope:
    return reduce(Polytope.intersect, parts)


def _hit_events(unsafe: Sequence[Polytope], steps: int, midpoints: bool) -> List[Tuple[Polytope, int, bool]]:
    events = [(obs, t, False) for obs in unsafe for t in range(steps)]
    if midpoints:
        events += [(obs, t, True) for obs in unsafe for t in range(steps - 1)]
    return events


def build_reach_avoid_domains(
    init: Optional[Polytope],
    unsafe: Sequence[Polytope],
    goals: Sequence[Goal],
    steps: int,
    midpoints: bool = False,
    cap: Optional[int] = None,
) -> ReachAvoidDomains:
    cap = settings.ENUMERATION_CAP if cap is None else cap
    n = _validate(init, unsafe, goals, steps)
    dim = n * steps
    base = [lift_polytope(init, 0, steps)] if init is not None else []

    hits = _hit_events(unsafe, steps, midpoints)
    reach_choices = list(itertools.product(*[goal.steps for goal in goals]))
    _check_cap("fail_a", len(hits) * len(reach_choices), cap)
    fail_a = []
    for obs, t, mid in hits:
        hit = lift_polytope(obs, t, steps, midpoint=mid)
        for times in reach_choices:
            reached = [lift_polytope(g.region, r, steps) for g, r in zip(goals, times)]
            fail_a.append(_conjoin(base + [hit] + reached))

    _check_cap("fail_b", sum(g.region.n_faces ** len(g.steps) for g in goals), cap)
    fail_b = []
    for goal in goals:
        complements = [Polytope(-goal.region.A[[i]], -goal.region.b[[i]]) for i in range(goal.region.n_faces)]
        for choice in itertools.product(complements, repeat=len(goal.steps)):
            missed = [lift_polytope(face, t, steps) for face, t in zip(choice, goal.steps)]
            fail_b.append(_conjoin(base + missed))

    satisfaction = _satisfaction_domain(base, unsafe, goals, steps, midpoints, cap, dim)
    logger.info(
        "[reach-avoid] steps=%d obstacles=%d goals=%d fail_a=%d fail_b=%d satisfaction=%s",
        steps, len(unsafe), len(goals), len(fail_a), len(fail_b),
        len(satisfaction) if isinstance(satisfaction, UnionOfPolytopes) else "delegated",
    )
    return ReachAvoidDomains(
        UnionOfPolytopes(fail_a, dim=dim),
        UnionOfPolytopes(fail_b, dim=dim),
        satisfaction,
    )


def _satisfaction_domain(
    base: List[Polytope],
    unsafe: Sequence[Polytope],
    goals: Sequence[Goal],
    steps: int,
    midpoints: bool,
    cap: int,
    dim: int,
) -> Union[UnionOfPolytopes, StlDelegation]:
    avoid_slots = _hit_events(unsafe, steps, midpoints)
    size = math.prod(obs.n_faces for obs, _, _ in avoid_slots) * math.prod(len(g.steps) for g in goals)
    if size > cap:
        return StlDelegation(f"satisfaction domain needs {size} polytopes (cap {cap})", size)

    avoid_options = [
        [
            lift_polytope(Polytope(-obs.A[[i]], -obs.b[[i]]), t, steps, midpoint=mid)
            for i in range(obs.n_faces)
        ]
        for obs, t, mid in avoid_slots
    ]
    reach_options = [[lift_polytope(g.region, r, steps) for r in g.steps] for g in goals]
    members = []
    for combo in itertools.product(*avoid_options, *reach_options):
        members.append(_conjoin(base + list(combo)))
    return UnionOfPolytopes(members, dim=dim)


def polytope_formula(poly: Polytope) -> Formula:
    """State-level conjunction of the polytope's faces."""
    preds = [Predicate(LinearPredicate(tuple(a), b)) for a, b in zip(poly.A, poly.b)]
    return reduce(And, preds)


def midpoint_lift(state_dim: int, steps: int) -> np.ndarray:
    """Map a stacked trajectory to stacked pairs ``(x_t, (x_t + x_{t+1}) / 2)``.

    The pair at the last step repeats the final state. Reach-avoid formulas
    built with ``midpoints=True`` are evaluated on this lifted signal, whose
    state dimension is ``2 * state_dim``.
    """
    n = state_dim
    lift = np.zeros((2 * n * steps, n * steps))
    eye = np.eye(n)
    for t in range(steps):
        nxt = min(t + 1, steps - 1)
        row = 2 * n * t
        lift[row : row + n, t * n : (t + 1) * n] = eye
        lift[row + n : row + 2 * n, t * n : (t + 1) * n] += 0.5 * eye
        lift[row + n : row + 2 * n, nxt * n : (nxt + 1) * n] += 0.5 * eye
    return lift


def _on_pair(poly: Polytope, midpoint: bool) -> Polytope:
    pad = np.zeros_like(poly.A)
    return Polytope(np.hstack([pad, poly.A] if midpoint else [poly.A, pad]), poly.b.copy())


def reach_avoid_formula(
    init: Optional[Polytope],
    unsafe: Sequence[Polytope],
    goals: Sequence[Goal],
    steps: int,
    midpoints: bool = False,
) -> Formula:
    """``init & G[0,steps-1](!obstacles) & F[window](goal) for every goal``.

    With ``midpoints`` the obstacles are also avoided between consecutive
    states and the formula reads the signal produced by ``midpoint_lift``.
    """
    return _conjoin_formulas(init, [_avoid_and_reach(unsafe, goals, steps, midpoints)], midpoints)


def failure_formula(
    init: Optional[Polytope],
    unsafe: Sequence[Polytope],
    goals: Sequence[Goal],
    steps: int,
    midpoints: bool = False,
) -> Formula:
    """``init & !(avoid & reach)``: the exact union of both failure types."""
    return _conjoin_formulas(init, [Not(_avoid_and_reach(unsafe, goals, steps, midpoints))], midpoints)


def _conjoin_formulas(init: Optional[Polytope], parts: List[Formula], midpoints: bool) -> Formula:
    if init is not None:
        parts = [polytope_formula(_on_pair(init, False) if midpoints else init)] + parts
    return reduce(And, parts)


def _avoid_and_reach(unsafe: Sequence[Polytope], goals: Sequence[Goal], steps: int, midpoints: bool) -> Formula:
    def state(poly: Polytope) -> Formula:
        return polytope_formula(_on_pair(poly, False) if midpoints else poly)

    parts: List[Formula] = [Always(Interval(0, steps - 1), Not(state(obs))) for obs in unsafe]
    if midpoints and steps > 1:
        parts += [
            Always(Interval(0, steps - 2), Not(polytope_formula(_on_pair(obs, True)))) for obs in unsafe
        ]
    parts += [Eventually(Interval(*g.window), state(g.region)) for g in goals]
    if not parts:
        raise GeometryError("A reach-avoid task needs at least one obstacle or goal.")
    return reduce(And, parts)
