"""H-polytopes ``{x : A x + b >= 0}`` and finite unions of them."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, List, Optional, Sequence

import numpy as np

from stlhdr.stl.formula import LinearPredicate

logger = logging.getLogger(__name__)


class GeometryError(ValueError):
    """Raised for malformed half-spaces, polytopes or out-of-range lifts."""


@dataclass(frozen=True, eq=False)
class Halfspace:
    """``a'x + b >= 0``."""

    a: np.ndarray
    b: float

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float).reshape(-1)
        if a.size == 0 or not np.any(a):
            raise GeometryError("Half-space normal must be nonzero.")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.a.size

    def value(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.a + self.b

    def complement(self) -> "Halfspace":
        # The shared boundary has measure zero under any Gaussian.
        return Halfspace(-self.a, -self.b)


class Polytope:
    """Conjunction of half-spaces stored as ``A`` (faces x dim) and ``b``."""

    def __init__(self, A: np.ndarray, b: np.ndarray) -> None:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).reshape(-1)
        if A.shape[0] == 0:
            raise GeometryError("A polytope needs at least one face.")
        if A.shape[0] != b.size:
            raise GeometryError(f"A has {A.shape[0]} rows but b has {b.size} entries.")
        if not np.all(np.any(A != 0.0, axis=1)):
            raise GeometryError("Every face normal must be nonzero.")
        self.A = A
        self.b = b

    @classmethod
    def from_halfspaces(cls, faces: Iterable[Halfspace]) -> "Polytope":
        faces = list(faces)
        if not faces:
            raise GeometryError("A polytope needs at least one face.")
        dims = {f.dim for f in faces}
        if len(dims) != 1:
            raise GeometryError(f"Faces disagree on dimension: {sorted(dims)}")
        return cls(np.vstack([f.a for f in faces]), np.array([f.b for f in faces]))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def n_faces(self) -> int:
        return self.A.shape[0]

    @property
    def faces(self) -> List[Halfspace]:
        return [Halfspace(a, b) for a, b in zip(self.A, self.b)]

    def values(self, X: np.ndarray) -> np.ndarray:
        """Face values for points stacked in rows; shape (B, faces)."""
        return np.atleast_2d(X) @ self.A.T + self.b

    def margin(self, X: np.ndarray) -> np.ndarray:
        return self.values(X).min(axis=1)

    def contains(self, X: np.ndarray) -> np.ndarray:
        return self.margin(X) >= 0.0

    def intersect(self, other: "Polytope") -> "Polytope":
        if other.dim != self.dim:
            raise GeometryError(f"Cannot intersect {self.dim}-D and {other.dim}-D polytopes.")
        return Polytope(np.vstack([self.A, other.A]), np.concatenate([self.b, other.b]))

    def __repr__(self) -> str:
        return f"Polytope(dim={self.dim}, faces={self.n_faces})"


class UnionOfPolytopes:
    """Disjunction of polytopes; may be empty (the empty set)."""

    def __init__(self, members: Sequence[Polytope], dim: Optional[int] = None) -> None:
        members = list(members)
        dims = {p.dim for p in members}
        if dim is not None:
            dims.add(dim)
        if len(dims) > 1:
            raise GeometryError(f"Union members disagree on dimension: {sorted(dims)}")
        if not dims:
            raise GeometryError("An empty union needs an explicit dimension.")
        self.members = members
        self.dim = dims.pop()

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Polytope]:
        return iter(self.members)

    @property
    def is_empty(self) -> bool:
        return not self.members

    @cached_property
    def stacked(self) -> tuple:
        """All faces ``(A, b, starts)``; ``starts`` indexes each member's first row."""
        if self.is_empty:
            return np.zeros((0, self.dim)), np.zeros(0), np.zeros(0, dtype=int)
        A = np.vstack([p.A for p in self.members])
        b = np.concatenate([p.b for p in self.members])
        starts = np.cumsum([0] + [p.n_faces for p in self.members[:-1]])
        return A, b, starts

    def reduce_faces(self, face_values: np.ndarray) -> np.ndarray:
        """Max over members of the min over each member's faces (rows are faces)."""
        if self.is_empty:
            return np.full(face_values.shape[1:], -np.inf)
        _, _, starts = self.stacked
        return np.minimum.reduceat(face_values, starts, axis=0).max(axis=0)

    def score(self, X: np.ndarray) -> np.ndarray:
        """Polytope margin of each row of ``X``; nonnegative iff inside the union."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        A, b, _ = self.stacked
        return self.reduce_faces(A @ X.T + b[:, None])

    def contains(self, X: np.ndarray, shift: float = 0.0) -> np.ndarray:
        return self.score(X) + shift >= 0.0

    def __repr__(self) -> str:
        return f"UnionOfPolytopes(dim={self.dim}, members={len(self.members)})"


def _check_step(t: int, steps: int, span: int = 1) -> None:
    if t < 0 or t + span > steps:
        raise GeometryError(f"Time step {t} (span {span}) is outside a {steps}-step trajectory.")


def lift_predicate(pred: LinearPredicate, t: int, steps: int) -> Halfspace:
    """Embed a state predicate at step ``t`` into trajectory space."""
    _check_step(t, steps)
    n = pred.dim
    normal = np.zeros(n * steps)
    normal[t * n : (t + 1) * n] = pred.vector
    return Halfspace(normal, pred.b)


def midpoint_constraint(pred: LinearPredicate, t: int, steps: int) -> Halfspace:
    """``a'(x_t + x_{t+1})/2 + b >= 0`` in trajectory space."""
    _check_step(t, steps, span=2)
    n = pred.dim
    normal = np.zeros(n * steps)
    normal[t * n : (t + 1) * n] = 0.5 * pred.vector
    normal[(t + 1) * n : (t + 2) * n] = 0.5 * pred.vector
    return Halfspace(normal, pred.b)


def lift_polytope(poly: Polytope, t: int, steps: int, midpoint: bool = False) -> Polytope:
    """State-space polytope imposed on ``x_t`` (or on the midpoint of ``x_t, x_{t+1}``)."""
    _check_step(t, steps, span=2 if midpoint else 1)
    n = poly.dim
    A = np.zeros((poly.n_faces, n * steps))
    if midpoint:
        A[:, t * n : (t + 1) * n] = 0.5 * poly.A
        A[:, (t + 1) * n : (t + 2) * n] = 0.5 * poly.A
    else:
        A[:, t * n : (t + 1) * n] = poly.A
    return Polytope(A, poly.b.copy())


def box(
    lower: Sequence[float],
    upper: Sequence[float],
    indices: Optional[Sequence[int]] = None,
    state_dim: Optional[int] = None,
) -> Polytope:
    """Axis-aligned box ``lower <= x[indices] <= upper``."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if lower.shape != upper.shape or lower.ndim != 1:
        raise GeometryError("box bounds must be 1-D and of equal length.")
    if np.any(lower > upper):
        raise GeometryError(f"Empty box: lower {lower.tolist()} exceeds upper {upper.tolist()}.")
    indices = list(range(lower.size)) if indices is None else list(indices)
    state_dim = lower.size if state_dim is None else state_dim
    if len(indices) != lower.size or any(not 0 <= i < state_dim for i in indices):
        raise GeometryError(f"box indices {indices} invalid for state_dim={state_dim}.")
    rows, offsets = [], []
    for i, lo, hi in zip(indices, lower, upper):
        e = np.zeros(state_dim)
        e[i] = 1.0
        rows.extend([e, -e])
        offsets.extend([-lo, hi])
    return Polytope(np.vstack(rows), np.array(offsets))
