"""Simple random sampling baseline: simulate, check, average."""
from __future__ import annotations

import logging
import math
import time
from typing import Optional, Union

import numpy as np

from stlhdr.stl.formula import Formula, robustness_batch
from stlhdr.system.model import LtvSystem, MeasurementFn, sample_trajectories

from .domains import DomainOracle
from .models import McResult

logger = logging.getLogger(__name__)

Target = Union[Formula, DomainOracle]


def _satisfied(target: Target, X: np.ndarray, state_dim: int) -> np.ndarray:
    if isinstance(target, DomainOracle):
        return target.contains(X)
    return robustness_batch(target, X, state_dim) >= 0.0


def srs_estimate(
    sys: LtvSystem,
    target: Target,
    n_mc: int,
    rng: np.random.Generator,
    steps: Optional[int] = None,
    measurement: Optional[MeasurementFn] = None,
    retain_flags: bool = False,
    chunk: int = 10_000,
) -> McResult:
    """Fraction of simulated closed-loop trajectories satisfying ``target``.

    ``steps`` defaults to the formula horizon; it is required for domains.
    """
    if n_mc < 1:
        raise ValueError(f"n_mc must be >= 1, got {n_mc}")
    if steps is None:
        if isinstance(target, DomainOracle):
            raise ValueError("steps is required when the target is a domain")
        steps = target.horizon
    started = time.perf_counter()
    flags = np.empty(n_mc, dtype=bool)
    for lo in range(0, n_mc, chunk):
        size = min(chunk, n_mc - lo)
        X = sample_trajectories(sys, size, steps, rng, measurement)
        flags[lo : lo + size] = _satisfied(target, X, sys.n)
    hits = int(flags.sum())
    p = hits / n_mc
    variance = p * (1.0 - p) / n_mc
    result = McResult(
        probability=p,
        variance=variance,
        std=math.sqrt(variance),
        n=n_mc,
        hits=hits,
        flags=flags if retain_flags else None,
        wall_time=time.perf_counter() - started,
    )
    logger.info("[mc] p=%.6g std=%.3g n=%d hits=%d wall=%.2fs", p, result.std, n_mc, hits, result.wall_time)
    return result
