"""Rejection-free elliptical slice sampling from a Gaussian restricted to a domain.

Each step draws one auxiliary point from the prior, intersects the ellipse
through the current point and that draw with the domain in closed form, and
picks an angle uniformly by arc length over the active arcs.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from stlhdr.core.config import settings
from stlhdr.geometry.ellipse import DomainInvariantError
from stlhdr.system.gaussian import TrajectoryGaussian

from .domains import DomainOracle

logger = logging.getLogger(__name__)

_MEMBERSHIP_TOL = 1e-9


@dataclass(frozen=True)
class ChainConfig:
    thinning: int = field(default_factory=lambda: settings.THINNING)
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.thinning < 1:
            raise ValueError(f"thinning must be >= 1, got {self.thinning}")


def _check_member(current: np.ndarray, oracle: DomainOracle) -> None:
    level = oracle.level
    score = float(oracle.score(current[None, :])[0])
    if score < level - _MEMBERSHIP_TOL * (1.0 + abs(level)):
        raise DomainInvariantError(
            f"Chain state has score {score:.6g} below the domain level {level:.6g}"
        )


def ess_step(
    current: np.ndarray,
    gaussian: TrajectoryGaussian,
    oracle: DomainOracle,
    rng: np.random.Generator,
) -> np.ndarray:
    """One slice move; the returned trajectory is always inside ``oracle``."""
    current = np.asarray(current, dtype=float)
    _check_member(current, oracle)
    nu = gaussian.sample(1, rng)[0]
    if np.array_equal(nu, current):
        nu = gaussian.sample(1, rng)[0]
    u = current - gaussian.mean
    v = nu - gaussian.mean
    arcs = oracle.active_arcs(gaussian.mean, u, v)
    theta = arcs.sample(rng)
    return gaussian.mean + u * np.cos(theta) + v * np.sin(theta)


def sample_chain(
    start: np.ndarray,
    count: int,
    gaussian: TrajectoryGaussian,
    oracle: DomainOracle,
    config: ChainConfig = ChainConfig(),
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """``count`` thinned states of one chain; shape (count, dim)."""
    rng = np.random.default_rng(config.seed) if rng is None else rng
    out = np.empty((count, gaussian.dim))
    x = np.asarray(start, dtype=float)
    for i in range(count):
        for _ in range(config.thinning):
            x = ess_step(x, gaussian, oracle, rng)
        out[i] = x
    return out


def run_chains(
    seeds: np.ndarray,
    total: int,
    gaussian: TrajectoryGaussian,
    oracle: DomainOracle,
    config: ChainConfig,
    rng: np.random.Generator,
    threads: int = 1,
) -> np.ndarray:
    """Spread ``total`` samples over chains started at the rows of ``seeds``.

    Every chain gets its own generator spawned from ``rng``, so the output
    does not depend on ``threads``.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    S = seeds.shape[0]
    if S == 0:
        raise DomainInvariantError("No seed trajectories inside the domain")
    if total <= 0:
        return np.zeros((0, gaussian.dim))
    if S >= total:
        starts = seeds[rng.choice(S, size=total, replace=False)]
        counts = [1] * total
    else:
        starts = seeds
        counts = [total // S + (1 if i < total % S else 0) for i in range(S)]
    children = np.random.SeedSequence(int(rng.integers(2**63))).spawn(len(counts))
    jobs = [
        (start, count, np.random.default_rng(child))
        for start, count, child in zip(starts, counts, children)
    ]

    def _run(job) -> np.ndarray:
        start, count, gen = job
        return sample_chain(start, count, gaussian, oracle, config, gen)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts: List[np.ndarray] = list(pool.map(_run, jobs))
    else:
        parts = [_run(job) for job in jobs]
    logger.debug("[ess] chains=%d samples=%d thinning=%d", len(jobs), total, config.thinning)
    return np.vstack(parts)


def autocorrelation(chain: np.ndarray, lag: int) -> float:
    """Normalised sample autocorrelation of a scalar chain at ``lag``."""
    x = np.asarray(chain, dtype=float).reshape(-1)
    if not 0 <= lag < x.size:
        raise ValueError(f"lag must lie in [0, {x.size}), got {lag}")
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom == 0.0:
        return 0.0
    return float(np.dot(x[: x.size - lag], x[lag:]) / denom)
