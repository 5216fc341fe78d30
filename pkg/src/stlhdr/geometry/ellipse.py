"""Closed-form intersection of an ellipse with half-spaces, and active arcs.

An ellipse through ``mean`` is parameterised as
``x(theta) = mean + u cos(theta) + v sin(theta)``. A shifted face
``a'x + b + shift`` restricted to it is ``c + alpha cos(theta) + beta sin(theta)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np

from .polytope import Halfspace, UnionOfPolytopes

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
_TANGENT_TOL = 1e-12


class DomainInvariantError(RuntimeError):
    """Raised when no arc of an ellipse lies in a domain that should contain it."""


@dataclass(frozen=True)
class EllipseRoots:
    angles: Tuple[float, ...]
    # Face is constant (zero) along the whole ellipse.
    degenerate: bool = False


def _face_coefficients(
    mean: np.ndarray, u: np.ndarray, v: np.ndarray, A: np.ndarray, b: np.ndarray, shift: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    return A @ u, A @ v, A @ mean + b + shift


def _roots(alpha: np.ndarray, beta: np.ndarray, c: np.ndarray) -> np.ndarray:
    r = np.hypot(alpha, beta)
    live = r > 0.0
    ratio = np.full_like(r, np.inf)
    ratio[live] = -c[live] / r[live]
    crossing = live & (np.abs(ratio) <= 1.0 + _TANGENT_TOL)
    if not np.any(crossing):
        return np.zeros(0)
    phi0 = np.arctan2(beta[crossing], alpha[crossing])
    delta = np.arccos(np.clip(ratio[crossing], -1.0, 1.0))
    return np.mod(np.concatenate([phi0 - delta, phi0 + delta]), TWO_PI)


def ellipse_halfspace_roots(
    mean: np.ndarray, u: np.ndarray, v: np.ndarray, hs: Halfspace, shift: float = 0.0
) -> EllipseRoots:
    """Angles where the ellipse meets ``a'x + b + shift = 0``."""
    alpha, beta, c = _face_coefficients(
        np.asarray(mean, float), np.asarray(u, float), np.asarray(v, float),
        hs.a[None, :], np.array([hs.b]), shift,
    )
    if np.hypot(alpha[0], beta[0]) == 0.0:
        return EllipseRoots((), degenerate=bool(c[0] == 0.0))
    angles = np.unique(_roots(alpha, beta, c))
    return EllipseRoots(tuple(float(a) for a in angles))


@dataclass(frozen=True)
class EllipseArcs:
    """Disjoint angular pieces ``[lo, hi)`` inside ``[0, 2*pi]``, sorted."""

    pieces: Tuple[Tuple[float, float], ...]

    @property
    def measure(self) -> float:
        return float(sum(hi - lo for lo, hi in self.pieces))

    @property
    def cyclic(self) -> Tuple[Tuple[float, float], ...]:
        """Pieces with the arc through angle 0 joined across the wrap."""
        pieces = list(self.pieces)
        if len(pieces) > 1 and pieces[0][0] == 0.0 and pieces[-1][1] == TWO_PI:
            lo, _ = pieces.pop()
            first = pieces.pop(0)
            pieces.append((lo, first[1] + TWO_PI))
        return tuple(pieces)

    def contains(self, theta: float) -> bool:
        theta = float(np.mod(theta, TWO_PI))
        return any(lo <= theta < hi for lo, hi in self.pieces)

    def angle_at(self, offset: float) -> float:
        """Angle reached after ``offset`` radians of arc length."""
        for lo, hi in self.pieces:
            width = hi - lo
            if offset < width:
                return lo + offset
            offset -= width
        return self.pieces[-1][1]

    def sample(self, rng: np.random.Generator) -> float:
        """Uniform angle by arc length; one draw, never rejects."""
        return self.angle_at(rng.uniform(0.0, self.measure))


def arcs_from_candidates(
    candidates: np.ndarray, is_active: Callable[[np.ndarray], np.ndarray]
) -> EllipseArcs:
    """Classify the elementary arcs between sorted candidate angles.

    ``is_active`` receives the midpoint angle of every elementary arc and
    returns a boolean per angle. Zero-width arcs are dropped; touching
    active arcs are merged.
    """
    cuts = np.unique(np.concatenate([[0.0, TWO_PI], np.mod(candidates, TWO_PI)]))
    lo, hi = cuts[:-1], cuts[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]
    active = np.asarray(is_active(0.5 * (lo + hi)), dtype=bool)
    pieces = []
    for a, b in zip(lo[active], hi[active]):
        if pieces and pieces[-1][1] == a:
            pieces[-1] = (pieces[-1][0], float(b))
        else:
            pieces.append((float(a), float(b)))
    if not pieces:
        raise DomainInvariantError(
            "No active arc on the ellipse: the current point is outside the domain."
        )
    return EllipseArcs(tuple(pieces))


def points_on_ellipse(
    mean: np.ndarray, u: np.ndarray, v: np.ndarray, thetas: Sequence[float]
) -> np.ndarray:
    thetas = np.asarray(thetas, dtype=float)
    return mean[None, :] + np.cos(thetas)[:, None] * u[None, :] + np.sin(thetas)[:, None] * v[None, :]


def active_arcs_union(
    mean: np.ndarray, u: np.ndarray, v: np.ndarray, domain: UnionOfPolytopes, shift: float = 0.0
) -> EllipseArcs:
    """Arcs of the ellipse inside ``domain`` with every face relaxed by ``shift``."""
    A, b, _ = domain.stacked
    alpha, beta, c = _face_coefficients(mean, u, v, A, b, shift)

    def is_active(thetas: np.ndarray) -> np.ndarray:
        values = c[:, None] + alpha[:, None] * np.cos(thetas) + beta[:, None] * np.sin(thetas)
        return domain.reduce_faces(values) >= 0.0

    candidates = _roots(alpha, beta, c)
    logger.debug("[arcs] faces=%d roots=%d", A.shape[0], candidates.size)
    return arcs_from_candidates(candidates, is_active)
