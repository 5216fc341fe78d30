"""Gaussian-mixture noise whose component is chosen per step.

The component sequence can be iid (static weights), a Markov chain, or
produced by an arbitrary callback on the mode history. Once a sequence is
fixed the noise is an ordinary per-step Gaussian.
"""
from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from stlhdr.system.noise import GaussianNoise, NoiseChannel, check_psd

logger = logging.getLogger(__name__)

ModeSequence = np.ndarray
ModeCallback = Callable[[Sequence[int]], Sequence[float]]


class MixtureModelError(ValueError):
    """Raised for malformed mixture models or invalid mode distributions."""


def _probabilities(values, size: int, what: str) -> np.ndarray:
    p = np.asarray(values, dtype=float).reshape(-1)
    if p.size != size:
        raise MixtureModelError(f"{what} has {p.size} entries, expected {size}")
    if np.any(p < 0) or not np.isclose(p.sum(), 1.0, atol=1e-12, rtol=0.0):
        raise MixtureModelError(f"{what} must be nonnegative and sum to 1, got {p.tolist()}")
    return p


@dataclass(frozen=True, eq=False)
class GaussianComponent:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = check_psd(np.atleast_2d(np.asarray(self.cov, dtype=float)), "component covariance")
        if cov.shape != (mean.size, mean.size):
            raise MixtureModelError(f"Component covariance {cov.shape} does not match mean {mean.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)


@dataclass(frozen=True, eq=False)
class StaticWeights:
    probs: np.ndarray


@dataclass(frozen=True, eq=False)
class MarkovWeights:
    transition: np.ndarray
    initial: np.ndarray


@dataclass(frozen=True, eq=False)
class BlackBoxWeights:
    callback: ModeCallback


WeightSource = Union[StaticWeights, MarkovWeights, BlackBoxWeights]


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    eig, vec = np.linalg.eigh(cov)
    return vec * np.sqrt(np.clip(eig, 0.0, None))


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """Left eigenvector of a row-stochastic matrix for eigenvalue 1."""
    P = np.asarray(transition, dtype=float)
    M = P.shape[0]
    system = np.vstack([P.T - np.eye(M), np.ones((1, M))])
    rhs = np.concatenate([np.zeros(M), [1.0]])
    pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    return np.clip(pi, 0.0, None) / np.clip(pi, 0.0, None).sum()


class MixtureNoiseModel(NoiseChannel):
    def __init__(self, components: Sequence[GaussianComponent], weights: WeightSource) -> None:
        if not components:
            raise MixtureModelError("A mixture needs at least one component")
        dims = {c.mean.size for c in components}
        if len(dims) != 1:
            raise MixtureModelError(f"Components disagree on dimension: {sorted(dims)}")
        self.components: List[GaussianComponent] = list(components)
        self.dim = dims.pop()
        M = len(self.components)
        if isinstance(weights, StaticWeights):
            weights = StaticWeights(_probabilities(weights.probs, M, "static weights"))
        elif isinstance(weights, MarkovWeights):
            P = np.atleast_2d(np.asarray(weights.transition, dtype=float))
            if P.shape != (M, M):
                raise MixtureModelError(f"Transition matrix must be {M}x{M}, got {P.shape}")
            for row, probs in enumerate(P):
                _probabilities(probs, M, f"transition row {row}")
            weights = MarkovWeights(P, _probabilities(weights.initial, M, "initial distribution"))
        elif not isinstance(weights, BlackBoxWeights):
            raise MixtureModelError(f"Unknown weight source {type(weights).__name__}")
        self.weights = weights

    @property
    def M(self) -> int:
        return len(self.components)

    def sample_modes(self, steps: int, rng: np.random.Generator) -> ModeSequence:
        M = self.M
        if M == 1:
            return np.zeros(steps, dtype=int)
        w = self.weights
        if isinstance(w, StaticWeights):
            return rng.choice(M, size=steps, p=w.probs)
        modes = np.empty(steps, dtype=int)
        if isinstance(w, MarkovWeights):
            u = rng.random(steps).tolist()
            cumulative = np.cumsum(w.transition, axis=1).tolist()
            prev = min(bisect.bisect_right(np.cumsum(w.initial).tolist(), u[0]), M - 1)
            modes[0] = prev
            for t in range(1, steps):
                prev = min(bisect.bisect_right(cumulative[prev], u[t]), M - 1)
                modes[t] = prev
            return modes
        for t in range(steps):
            p = _probabilities(w.callback(modes[:t].tolist()), M, f"callback distribution at step {t}")
            modes[t] = rng.choice(M, p=p)
        return modes

    def conditional(self, modes: ModeSequence) -> GaussianNoise:
        modes = np.asarray(modes, dtype=int)
        if modes.size and (modes.min() < 0 or modes.max() >= self.M):
            raise MixtureModelError(f"Mode indices must lie in [0, {self.M})")
        means = np.stack([self.components[m].mean for m in modes])
        covs = np.stack([self.components[m].cov for m in modes])
        return GaussianNoise(means, covs)

    def moments(self, steps: int) -> Tuple[np.ndarray, np.ndarray]:
        raise MixtureModelError("A mixture has no single Gaussian; condition on a mode sequence first")

    def mode_marginals(self, steps: int) -> np.ndarray:
        """Probability of each mode at each step, shape (steps, M)."""
        w = self.weights
        if isinstance(w, StaticWeights):
            return np.broadcast_to(w.probs, (steps, self.M)).copy()
        if isinstance(w, MarkovWeights):
            out = np.empty((steps, self.M))
            dist = w.initial
            for t in range(steps):
                out[t] = dist
                dist = dist @ w.transition
            return out
        raise MixtureModelError("Mode marginals of a black-box weight source are unknown")

    def expected(self, steps: int) -> np.ndarray:
        means = np.stack([c.mean for c in self.components])
        return self.mode_marginals(steps) @ means

    def draw(self, count: int, steps: int, rng: np.random.Generator) -> np.ndarray:
        modes = np.stack([self.sample_modes(steps, rng) for _ in range(count)]) if count else np.zeros((0, steps), int)
        means = np.stack([c.mean for c in self.components])
        factors = np.stack([_psd_factor(c.cov) for c in self.components])
        z = rng.standard_normal((count, steps, self.dim))
        return means[modes] + np.einsum("bsij,bsj->bsi", factors[modes], z)

    def __repr__(self) -> str:
        return f"MixtureNoiseModel(M={self.M}, dim={self.dim}, weights={type(self.weights).__name__})"


def sample_mode_sequence(model: MixtureNoiseModel, steps: int, rng: np.random.Generator) -> ModeSequence:
    return model.sample_modes(steps, rng)


def conditional_noise_spec(model: MixtureNoiseModel, modes: ModeSequence) -> GaussianNoise:
    """Per-step Gaussian selected by ``modes``; stacks to a block-diagonal law."""
    return model.conditional(modes)
