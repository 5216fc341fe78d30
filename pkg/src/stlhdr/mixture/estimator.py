"""Outer loop for mixture noise: sample modes, solve a Gaussian problem, average."""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple, Union

import numpy as np

from stlhdr.sampling.domains import DomainOracle, StlDomain
from stlhdr.sampling.hdr import EstimationError, HdrConfig, confidence_interval, hdr_estimate
from stlhdr.sampling.models import MixtureResult, VerificationResult
from stlhdr.stl.formula import Formula
from stlhdr.system.model import LtvSystem, TrajectoryMaps, build_trajectory_gaussian, closed_loop_maps
from stlhdr.system.noise import NoiseChannel

from .models import MixtureModelError, MixtureNoiseModel

logger = logging.getLogger(__name__)

Moments = Tuple[np.ndarray, np.ndarray]


def _channel_moments(
    channel: Optional[NoiseChannel], steps: int, rng: np.random.Generator
) -> Optional[Moments]:
    if isinstance(channel, MixtureNoiseModel):
        modes = channel.sample_modes(steps, rng)
        return channel.conditional(modes).moments(steps)
    return None


def conditional_gaussian(
    sys: LtvSystem,
    steps: int,
    rng: np.random.Generator,
    maps: Optional[TrajectoryMaps] = None,
):
    """Trajectory Gaussian for one independent mode draw per mixture channel."""
    v_moments = _channel_moments(sys.measurement_noise, steps, rng)
    w_moments = _channel_moments(sys.process_noise, steps, rng)
    return build_trajectory_gaussian(sys, steps, v_moments, w_moments, maps)


def mixture_estimate(
    sys: LtvSystem,
    target: Union[Formula, DomainOracle],
    n_outer: int,
    config: Optional[HdrConfig] = None,
    rng: Optional[np.random.Generator] = None,
    threads: int = 1,
    steps: Optional[int] = None,
) -> MixtureResult:
    """Average of ``n_outer`` conditional estimates.

    The reported variance is the spread of the conditional estimates plus
    their mean reported variance, both divided by ``n_outer``.
    """
    if n_outer < 2:
        raise MixtureModelError(f"n_outer must be >= 2 to estimate a variance, got {n_outer}")
    config = config or HdrConfig()
    rng = np.random.default_rng(config.seed) if rng is None else rng
    if isinstance(target, Formula):
        oracle: DomainOracle = StlDomain(target, sys.n)
        steps = target.horizon if steps is None else steps
    else:
        if steps is None:
            raise ValueError("steps is required when the target is a domain")
        oracle = target
    started = time.perf_counter()
    maps = closed_loop_maps(sys, steps)
    children = np.random.SeedSequence(int(rng.integers(2**63))).spawn(n_outer)

    def _iteration(index: int) -> VerificationResult:
        gen = np.random.default_rng(children[index])
        gaussian = conditional_gaussian(sys, steps, gen, maps)
        try:
            result = hdr_estimate(gaussian, oracle, config, gen)
        except EstimationError as exc:
            raise EstimationError(f"Outer iteration {index} failed: {exc}", exc.records) from exc
        logger.info("[mixture] iteration=%d p=%.6g std=%.3g nestings=%d", index, result.probability, result.std, result.K)
        return result

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results: List[VerificationResult] = list(pool.map(_iteration, range(n_outer)))
    else:
        results = [_iteration(i) for i in range(n_outer)]

    p = np.array([r.probability for r in results])
    between = float(np.var(p, ddof=1) / n_outer)
    within = float(np.mean([r.variance for r in results]) / n_outer)
    variance = between + within
    std = math.sqrt(variance)
    mean = float(p.mean())
    low, high = confidence_interval(mean, std, config.ci_level)
    logger.info(
        "[mixture] p=%.6g std=%.3g between=%.3g within=%.3g outer=%d",
        mean, std, between, within, n_outer,
    )
    return MixtureResult(
        probability=mean,
        variance=variance,
        std=std,
        ci_low=low,
        ci_high=high,
        ci_level=config.ci_level,
        between_variance=between,
        within_variance=within,
        per_iteration=results,
        wall_time=time.perf_counter() - started,
    )
