from __future__ import annotations

import math
from unittest.mock import patch

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import norm

from stlhdr.geometry import Polytope, UnionOfPolytopes
from stlhdr.sampling import (
    EstimationError,
    HdrConfig,
    NestingRecord,
    PolytopeDomain,
    StlDomain,
    adaptive_sample_count,
    confidence_interval,
    estimate_nestings,
    hdr_estimate,
    nominal_variance,
    sample_target,
    variance_of_product,
)
from stlhdr.stl import parse_formula
from stlhdr.system import TrajectoryGaussian


def _tail(level):
    return PolytopeDomain(UnionOfPolytopes([Polytope([[1.0]], [-level])]))


def test_gaussian_tail_probability(standard_normal, rng):
    result = hdr_estimate(standard_normal, _tail(3.0), HdrConfig(samples_per_nesting=256), rng)
    truth = norm.sf(3.0)
    assert truth / 3 < result.probability < truth * 3
    assert result.K >= 8
    assert not result.upper_bound_only
    assert result.ci_low <= result.probability <= result.ci_high


def test_non_final_conditionals_are_one_half(standard_normal, rng):
    result = hdr_estimate(standard_normal, _tail(2.5), HdrConfig(samples_per_nesting=64), rng)
    assert all(r.conditional == 0.5 for r in result.records[:-1])
    assert result.records[-1].cutoff == pytest.approx(0.0)
    cutoffs = [r.cutoff for r in result.records]
    assert cutoffs == sorted(cutoffs)


def test_retained_samples_satisfy_target(standard_normal, rng):
    result = hdr_estimate(standard_normal, _tail(2.0), HdrConfig(samples_per_nesting=64), rng)
    assert len(result.samples) == result.records[-1].n_inside
    assert np.all(result.samples[:, 0] >= 2.0)


def test_stl_target(rng):
    gaussian = TrajectoryGaussian(np.zeros(2), np.eye(2), state_dim=1, steps=2)
    oracle = StlDomain(parse_formula("G[0,1] (x1 >= 1)", 1), 1)
    result = hdr_estimate(gaussian, oracle, HdrConfig(samples_per_nesting=256), rng)
    truth = norm.sf(1.0) ** 2
    assert truth / 2 < result.probability < truth * 2


def test_nesting_cap_gives_upper_bound(standard_normal, rng):
    config = HdrConfig(samples_per_nesting=16, k_cap=24)
    result = hdr_estimate(standard_normal, _tail(7.0), config, rng)
    assert result.upper_bound_only
    assert result.K == 24
    assert result.probability == 2.0**-24
    with pytest.raises(EstimationError):
        sample_target(result, 5, standard_normal, _tail(7.0), config, rng)


def test_whole_space(standard_normal, rng):
    result = hdr_estimate(standard_normal, _tail(-100.0), HdrConfig(samples_per_nesting=16), rng)
    assert result.probability == 1.0
    assert result.K == 0
    assert result.variance == 0.0


def test_empty_domain(standard_normal, rng):
    empty = PolytopeDomain(UnionOfPolytopes([], dim=1))
    result = hdr_estimate(standard_normal, empty, HdrConfig(samples_per_nesting=16), rng)
    assert result.probability == 0.0
    assert result.K == 0


def test_stalled_cutoff_raises_with_records(standard_normal, rng):
    def stuck(seeds, total, gaussian, oracle, config, rng, threads=1):
        return np.full((total, 1), -1.0)

    with patch("stlhdr.sampling.hdr.run_chains", side_effect=stuck):
        with pytest.raises(EstimationError) as info:
            hdr_estimate(standard_normal, _tail(3.0), HdrConfig(samples_per_nesting=16), rng)
    assert len(info.value.records) == 1


def test_seed_makes_runs_reproducible(standard_normal):
    config = HdrConfig(samples_per_nesting=32, seed=4)
    first = hdr_estimate(standard_normal, _tail(2.0), config)
    second = hdr_estimate(standard_normal, _tail(2.0), config)
    assert first.probability == second.probability
    assert [r.cutoff for r in first.records] == [r.cutoff for r in second.records]


def test_sample_target(standard_normal, rng):
    config = HdrConfig(samples_per_nesting=64)
    result = hdr_estimate(standard_normal, _tail(1.5), config, rng)
    X = sample_target(result, 50, standard_normal, _tail(1.5), config, rng)
    assert X.shape == (50, 1)
    assert np.all(X >= 1.5)


class TestSampleSizing:
    def test_variance_of_product(self) -> None:
        record = NestingRecord(k=1, cutoff=0.0, n_samples=4, n_inside=2, conditional=0.5)
        assert variance_of_product([record]) == pytest.approx(0.0625)
        assert variance_of_product([]) == 0.0
        records = [record.model_copy(update={"k": k, "n_samples": 64}) for k in range(1, 6)]
        assert math.sqrt(variance_of_product(records)) == pytest.approx(0.00887219, abs=1e-7)

    def test_nominal_variance(self) -> None:
        assert math.sqrt(nominal_variance(5, 64)) == pytest.approx(0.00887219, abs=1e-7)
        assert nominal_variance(0, 64) == 0.0

    def test_adaptive_sample_count(self) -> None:
        assert adaptive_sample_count(0.0089, 5) == (64, True)
        assert adaptive_sample_count(1.0, 5) == (8, True)
        assert adaptive_sample_count(1e-9, 5) == (4096, False)
        with pytest.raises(ValueError):
            adaptive_sample_count(0.0, 5)

    @pytest.mark.parametrize("p_guess,expected", [(0.0743, 4), (2.0**-24, 24), (1.0, 0), (0.03125, 5)])
    def test_estimate_nestings(self, p_guess, expected) -> None:
        assert estimate_nestings(p_guess) == expected

    def test_auto_samples_resolution(self) -> None:
        config = HdrConfig(samples_per_nesting="auto", target_std=0.0089, p_guess=0.03125)
        assert config.resolve_samples() == 64

    @pytest.mark.parametrize(
        "kwargs", [{"samples_per_nesting": 4}, {"samples_per_nesting": "auto"}, {"k_cap": 0}]
    )
    def test_invalid_config(self, kwargs) -> None:
        with pytest.raises(ValidationError):
            HdrConfig(**kwargs)

    def test_confidence_interval_is_clipped(self) -> None:
        low, high = confidence_interval(0.5, 0.1, 0.95)
        assert (low, high) == pytest.approx((0.5 - 0.196, 0.5 + 0.196), abs=1e-3)
        assert confidence_interval(0.01, 0.1, 0.95)[0] == 0.0
        assert confidence_interval(0.99, 0.1, 0.95)[1] == 1.0
