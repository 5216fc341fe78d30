"""Multilevel splitting over elliptical slice sampling.

The target domain is reached through a sequence of enlarged domains whose
cutoffs are chosen so that about half of the samples of one level lie in
the next. The probability is the product of the observed conditionals.
"""
from __future__ import annotations

import logging
import math
import time
from typing import List, Literal, NamedTuple, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.stats import norm

from stlhdr.core.config import settings
from stlhdr.system.gaussian import TrajectoryGaussian

from .domains import DomainOracle
from .ess import ChainConfig, run_chains
from .models import NestingRecord, VerificationResult

logger = logging.getLogger(__name__)


class EstimationError(RuntimeError):
    """Raised when the nesting schedule cannot continue; keeps partial records."""

    def __init__(self, message: str, records: Sequence[NestingRecord] = ()) -> None:
        super().__init__(message)
        self.records = list(records)


class HdrConfig(BaseModel):
    samples_per_nesting: Union[int, Literal["auto"]] = Field(
        default_factory=lambda: settings.DEFAULT_SAMPLES_PER_NESTING
    )
    target_std: Optional[float] = Field(default=None, gt=0.0)
    p_guess: float = Field(default_factory=lambda: settings.DEFAULT_P_GUESS, gt=0.0, le=1.0)
    k_cap: int = Field(default_factory=lambda: settings.K_CAP, ge=1)
    ci_level: float = Field(default_factory=lambda: settings.CI_LEVEL, gt=0.0, lt=1.0)
    thinning: int = Field(default_factory=lambda: settings.THINNING, ge=1)
    threads: int = Field(default_factory=lambda: settings.THREADS, ge=1)
    seed: Optional[int] = None
    retain_samples: bool = True

    @model_validator(mode="after")
    def _check_samples(self) -> "HdrConfig":
        if self.samples_per_nesting == "auto":
            if self.target_std is None:
                raise ValueError("samples_per_nesting='auto' requires target_std")
        elif self.samples_per_nesting < settings.MIN_SAMPLES_PER_NESTING:
            raise ValueError(
                f"samples_per_nesting must be >= {settings.MIN_SAMPLES_PER_NESTING}, "
                f"got {self.samples_per_nesting}"
            )
        return self

    def resolve_samples(self) -> int:
        if self.samples_per_nesting != "auto":
            return int(self.samples_per_nesting)
        choice = adaptive_sample_count(self.target_std, estimate_nestings(self.p_guess))
        return choice.count


class SampleCount(NamedTuple):
    count: int
    attainable: bool


def variance_of_product(records: Sequence[NestingRecord]) -> float:
    """Variance of a product of independent binomial proportions."""
    if not records:
        return 0.0
    p = np.array([r.conditional for r in records], dtype=float)
    n = np.array([r.n_samples for r in records], dtype=float)
    value = np.prod(p * (1.0 - p) / n + p**2) - np.prod(p**2)
    return float(max(value, 0.0))


def nominal_variance(nestings: int, samples: int) -> float:
    """Product variance when every conditional is exactly one half."""
    return (0.25 / samples + 0.25) ** nestings - 0.25**nestings


def adaptive_sample_count(
    target_std: float,
    expected_nestings: int,
    cap: Optional[int] = None,
    floor: Optional[int] = None,
) -> SampleCount:
    """Smallest per-nesting sample count whose nominal std meets ``target_std``."""
    if target_std <= 0:
        raise ValueError(f"target_std must be positive, got {target_std}")
    cap = settings.MAX_SAMPLES_PER_NESTING if cap is None else cap
    floor = settings.MIN_SAMPLES_PER_NESTING if floor is None else floor

    def meets(n: int) -> bool:
        return math.sqrt(nominal_variance(expected_nestings, n)) <= target_std

    if meets(floor):
        return SampleCount(floor, True)
    if not meets(cap):
        logger.warning(
            "[hdr] target_std=%.3g unattainable with K=%d, using cap=%d", target_std, expected_nestings, cap
        )
        return SampleCount(cap, False)
    lo, hi = floor, cap
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if meets(mid):
            hi = mid
        else:
            lo = mid
    return SampleCount(hi, True)


def estimate_nestings(p_guess: float) -> int:
    if not 0.0 < p_guess <= 1.0:
        raise ValueError(f"p_guess must lie in (0, 1], got {p_guess}")
    return max(int(math.ceil(-math.log2(p_guess))), 0)


def confidence_interval(p: float, std: float, level: float) -> tuple:
    z = float(norm.ppf(0.5 + 0.5 * level))
    return max(p - z * std, 0.0), min(p + z * std, 1.0)


def _split_level(scores: np.ndarray) -> float:
    # Midpoint of the two middle order statistics, so no sample sits on it.
    s = np.sort(scores)[::-1]
    h = s.size // 2
    return float(0.5 * (s[h - 1] + s[h]))


def _result(
    p: float,
    records: List[NestingRecord],
    samples: Optional[np.ndarray],
    config: HdrConfig,
    started: float,
    upper_bound_only: bool = False,
) -> VerificationResult:
    variance = variance_of_product(records)
    std = math.sqrt(variance)
    low, high = confidence_interval(p, std, config.ci_level)
    return VerificationResult(
        probability=p,
        variance=variance,
        std=std,
        ci_low=low,
        ci_high=high,
        ci_level=config.ci_level,
        records=records,
        samples=samples if config.retain_samples else None,
        wall_time=time.perf_counter() - started,
        upper_bound_only=upper_bound_only,
    )


def hdr_estimate(
    gaussian: TrajectoryGaussian,
    oracle: DomainOracle,
    config: Optional[HdrConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> VerificationResult:
    """Probability that a trajectory drawn from ``gaussian`` lies in ``oracle``.

    ``oracle.level`` is the target cutoff; ``oracle.at_level`` supplies the
    enlarged intermediate domains.
    """
    config = config or HdrConfig()
    rng = np.random.default_rng(config.seed) if rng is None else rng
    started = time.perf_counter()
    n = config.resolve_samples()
    target = oracle.level

    if oracle.is_empty:
        logger.info("[hdr] empty domain, p=0")
        return _result(0.0, [], np.zeros((0, gaussian.dim)), config, started)

    chain = ChainConfig(thinning=config.thinning)
    X = gaussian.sample(n, rng)
    scores = oracle.score(X)
    if np.all(scores >= target):
        logger.info("[hdr] all %d unconstrained samples satisfy the target, p=1", n)
        return _result(1.0, [], X, config, started)

    records: List[NestingRecord] = []
    previous = -np.inf
    upper_bound_only = False
    while True:
        cutoff = min(_split_level(scores), target)
        if not cutoff > previous:
            raise EstimationError(
                f"Nesting {len(records) + 1} did not advance past cutoff {previous:.6g}", records
            )
        inside = scores >= cutoff
        n_inside = int(inside.sum())
        record = NestingRecord(
            k=len(records) + 1, cutoff=cutoff, n_samples=n, n_inside=n_inside, conditional=n_inside / n
        )
        records.append(record)
        logger.info(
            "[hdr] nesting=%d cutoff=%.4g samples=%d inside=%d p_k=%.4f",
            record.k, cutoff, n, n_inside, record.conditional,
        )
        if n_inside == 0:
            raise EstimationError(f"No samples reached cutoff {cutoff:.6g}", records)
        if cutoff >= target:
            break
        if len(records) >= config.k_cap:
            upper_bound_only = True
            break
        seeds = X[inside][rng.permutation(n_inside)]
        X = run_chains(seeds, n, gaussian, oracle.at_level(cutoff), chain, rng, config.threads)
        scores = oracle.score(X)
        previous = cutoff

    p = float(np.prod([r.conditional for r in records]))
    if upper_bound_only:
        logger.warning(
            "[hdr] nesting cap k_cap=%d reached at cutoff=%.4g; p<=%.3g is an upper bound",
            config.k_cap, records[-1].cutoff, p,
        )
    result = _result(p, records, X[scores >= records[-1].cutoff], config, started, upper_bound_only)
    logger.info(
        "[hdr] p=%.6g std=%.3g nestings=%d samples_per_nesting=%d wall=%.2fs",
        result.probability, result.std, result.K, n, result.wall_time,
    )
    return result


def sample_target(
    result: VerificationResult,
    count: int,
    gaussian: TrajectoryGaussian,
    oracle: DomainOracle,
    config: Optional[HdrConfig] = None,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Fresh trajectories from the target domain, seeded by retained samples."""
    config = config or HdrConfig()
    rng = np.random.default_rng(config.seed) if rng is None else rng
    if result.upper_bound_only:
        raise EstimationError("The estimate stopped at the nesting cap; no samples reach the target", result.records)
    if result.samples is None or len(result.samples) == 0:
        raise EstimationError("No retained samples inside the target domain", result.records)
    seeds = result.samples[rng.permutation(len(result.samples))]
    chain = ChainConfig(thinning=config.thinning)
    return run_chains(seeds, count, gaussian, oracle, chain, rng, config.threads)
