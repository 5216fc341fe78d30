"""Slice targets for elliptical slice sampling.

A domain is a super-level set ``{x : score(x) >= level}`` of either the
polytope margin of a union of polytopes or the robustness of an STL
formula. Both expose the arcs of an ellipse that lie inside the set.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Optional

import numpy as np

from stlhdr.geometry.ellipse import EllipseArcs, _roots, active_arcs_union, arcs_from_candidates, points_on_ellipse
from stlhdr.geometry.polytope import UnionOfPolytopes
from stlhdr.stl.formula import Formula, collect_predicates, robustness_batch

logger = logging.getLogger(__name__)


class DomainOracle(ABC):
    level: float

    @abstractmethod
    def score(self, X: np.ndarray) -> np.ndarray:
        """Score of each stacked trajectory (rows of ``X``)."""

    @abstractmethod
    def active_arcs(self, mean: np.ndarray, u: np.ndarray, v: np.ndarray) -> EllipseArcs:
        ...

    @abstractmethod
    def at_level(self, level: float) -> "DomainOracle":
        """Same family, different cutoff."""

    @property
    def is_empty(self) -> bool:
        return False

    def contains(self, X: np.ndarray) -> np.ndarray:
        return self.score(X) >= self.level


class PolytopeDomain(DomainOracle):
    """Union of polytopes with every face relaxed outward by ``shift``."""

    def __init__(self, union: UnionOfPolytopes, shift: float = 0.0) -> None:
        self.union = union
        self.shift = float(shift)

    @property
    def level(self) -> float:
        return -self.shift

    @property
    def is_empty(self) -> bool:
        return self.union.is_empty

    def score(self, X: np.ndarray) -> np.ndarray:
        return self.union.score(X)

    def active_arcs(self, mean: np.ndarray, u: np.ndarray, v: np.ndarray) -> EllipseArcs:
        return active_arcs_union(mean, u, v, self.union, self.shift)

    def at_level(self, level: float) -> "PolytopeDomain":
        return PolytopeDomain(self.union, -level)

    def __repr__(self) -> str:
        return f"PolytopeDomain({self.union!r}, shift={self.shift:.4g})"


class StlDomain(DomainOracle):
    """Robustness super-level set of a formula over stacked trajectories.

    With ``lift`` the formula reads ``lift @ x`` instead of ``x``; ``state_dim``
    is then the state dimension of the lifted signal.
    """

    def __init__(
        self, formula: Formula, state_dim: int, level: float = 0.0, lift: Optional[np.ndarray] = None
    ) -> None:
        self.formula = formula
        self.state_dim = state_dim
        self.level = float(level)
        self.lift = None if lift is None else np.asarray(lift, dtype=float)
        preds = collect_predicates(formula)
        self._P = np.vstack([p.vector for p in preds])
        self._b = np.array([p.b for p in preds])
        self.horizon = formula.horizon

    def signal(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        return X if self.lift is None else X @ self.lift.T

    def score(self, X: np.ndarray) -> np.ndarray:
        return robustness_batch(self.formula, self.signal(X), self.state_dim)

    def active_arcs(self, mean: np.ndarray, u: np.ndarray, v: np.ndarray) -> EllipseArcs:
        return stl_active_arcs(mean, u, v, self)

    def at_level(self, level: float) -> "StlDomain":
        clone = StlDomain.__new__(StlDomain)
        clone.__dict__.update(self.__dict__)
        clone.level = float(level)
        return clone

    def __repr__(self) -> str:
        return f"StlDomain(horizon={self.horizon}, level={self.level:.4g})"


def stl_active_arcs(mean: np.ndarray, u: np.ndarray, v: np.ndarray, domain: StlDomain) -> EllipseArcs:
    """Arcs with robustness >= level, probing one angle per elementary arc.

    Robustness only changes sign relative to the level where some predicate
    at some step equals +level or -level, so those crossings are the only
    candidate arc boundaries.
    """
    if domain.lift is not None:
        mean, u, v = (domain.lift @ x for x in (mean, u, v))
    n, H = domain.state_dim, domain.horizon
    cut = n * H
    mean_t, u_t, v_t = (x[:cut].reshape(H, n) for x in (mean, u, v))
    alpha = (u_t @ domain._P.T).ravel()
    beta = (v_t @ domain._P.T).ravel()
    c = (mean_t @ domain._P.T + domain._b).ravel()
    level = domain.level
    candidates = np.concatenate([_roots(alpha, beta, c - level), _roots(alpha, beta, c + level)])

    def is_active(thetas: np.ndarray) -> np.ndarray:
        points = points_on_ellipse(mean[:cut], u[:cut], v[:cut], thetas)
        return robustness_batch(domain.formula, points, n) >= level

    return arcs_from_candidates(candidates, is_active)
