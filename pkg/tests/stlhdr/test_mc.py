from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import norm

from stlhdr.geometry import UnionOfPolytopes, box
from stlhdr.sampling import PolytopeDomain, srs_estimate
from stlhdr.stl import parse_formula
from stlhdr.system import DirectFeedback, GaussianNoise, InitialState, LtvSystem


@pytest.fixture
def white_noise_system():
    """x_{t+1} = w_t with unit variance, so x_1 ~ N(0, 1)."""
    return LtvSystem(
        A=np.zeros((1, 1)),
        B=np.zeros((1, 1)),
        C=np.eye(1),
        feedback=DirectFeedback(np.zeros((1, 1))),
        x0=InitialState(np.zeros(1)),
        measurement_noise=GaussianNoise.zero(1),
        process_noise=GaussianNoise.isotropic([1.0]),
    )


def test_formula_probability(white_noise_system, rng):
    result = srs_estimate(white_noise_system, parse_formula("F[1,1] (x1 >= 2)", 1), 200_000, rng)
    assert result.probability == pytest.approx(norm.sf(2.0), abs=4 * result.std)
    assert result.hits == round(result.probability * result.n)
    assert result.variance == pytest.approx(result.probability * (1 - result.probability) / result.n)


def test_domain_target_needs_steps(white_noise_system, rng):
    domain = PolytopeDomain(UnionOfPolytopes([box([-10.0, 1.0], [10.0, 1e9])]))
    with pytest.raises(ValueError):
        srs_estimate(white_noise_system, domain, 100, rng)
    result = srs_estimate(white_noise_system, domain, 50_000, rng, steps=2, retain_flags=True)
    assert result.probability == pytest.approx(norm.sf(1.0), abs=4 * result.std)
    assert result.flags.shape == (50_000,)


def test_chunking_does_not_change_the_estimate(white_noise_system):
    formula = parse_formula("F[1,1] (x1 >= 0.5)", 1)
    whole = srs_estimate(white_noise_system, formula, 3000, np.random.default_rng(1), chunk=10_000)
    again = srs_estimate(white_noise_system, formula, 3000, np.random.default_rng(1), chunk=10_000)
    assert whole.hits == again.hits
    assert srs_estimate(white_noise_system, formula, 3000, np.random.default_rng(1), chunk=700).n == 3000


def test_rare_event_is_invisible_to_plain_sampling(white_noise_system, rng):
    result = srs_estimate(white_noise_system, parse_formula("F[1,1] (x1 >= 6)", 1), 10_000, rng)
    assert result.hits <= 1


def test_sample_count_must_be_positive(white_noise_system, rng):
    with pytest.raises(ValueError):
        srs_estimate(white_noise_system, parse_formula("x1 >= 0", 1), 0, rng)
