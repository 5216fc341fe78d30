from __future__ import annotations

import math

import numpy as np
import pytest

from stlhdr.mixture import MixtureNoiseModel
from stlhdr.sampling import PolytopeDomain, StlDomain
from stlhdr.scenarios import (
    ScenarioError,
    UnknownScenarioError,
    build_scenario,
    get_scenario,
    list_scenarios,
    load_scenario,
    scenario_digest,
    steps_from_seconds,
)
from stlhdr.scenarios.builder import step_at
from stlhdr.stl import FormulaSyntaxError

BUNDLED = ["adversarial", "data_based", "holonomic_reach_avoid", "holonomic_two_goals", "intersection", "rare_event"]


def _build(source):
    scenario, document, base = load_scenario(source)
    return build_scenario(scenario, document, base)


@pytest.mark.parametrize(
    "seconds,dt,expected",
    [(5.0, 1.0, 6), (5.0, 0.25, 21), (3.0, 0.1, 31), (0.0, 0.5, 1)],
)
def test_steps_from_seconds(seconds, dt, expected):
    assert steps_from_seconds(seconds, dt) == expected


def test_step_at():
    assert step_at(2.9, 0.1) == 29
    assert step_at(3.0, 0.1) == 30


def test_registry_lists_bundled_scenarios():
    assert list_scenarios() == BUNDLED
    with pytest.raises(UnknownScenarioError):
        get_scenario("nope")


@pytest.mark.parametrize("scenario_id", BUNDLED)
def test_bundled_scenarios_build(scenario_id):
    built = _build(scenario_id)
    assert built.scenario.id == scenario_id
    assert len(built.digest) == 64


def test_holonomic_mean_follows_reference():
    built = _build("holonomic_reach_avoid")
    assert built.steps == 6
    np.testing.assert_allclose(built.gaussian.mean_states()[5], [10.0, 0.0, 2.0, 0.0], atol=1e-9)
    assert built.mode == "reach-avoid"
    assert isinstance(built.failure_oracle(), PolytopeDomain)
    assert not built.domains.failure.is_empty


def test_two_goal_formula_fits_the_horizon():
    built = _build("holonomic_two_goals")
    assert built.steps == 21
    assert built.formula.horizon == 21
    assert isinstance(built.stl_oracle(negated=True), StlDomain)


def test_uniform_noise_is_moment_matched():
    built = _build("adversarial")
    means, covs = built.system.process_noise.moments(1)
    assert means[0, 0] == 0.0
    assert covs[0, 0, 0] == pytest.approx(0.4**2 / 12)
    _, v_covs = built.system.measurement_noise.moments(1)
    np.testing.assert_allclose(np.diag(v_covs[0]), [0.2**2 / 12] * 2)


def test_intersection_is_linearised_with_mixture_noise():
    built = _build("intersection")
    assert built.steps == 31
    assert built.has_mixture
    assert isinstance(built.system.measurement_noise, MixtureNoiseModel)
    C = np.asarray(built.system.C)
    assert C.shape == (31, 1, 4)
    np.testing.assert_allclose(C[0], [[-1 / math.sqrt(2), 1 / math.sqrt(2), 0.0, 0.0]])
    assert built.measurement is not None
    assert built.reach_avoid.goals[0].window == (29, 30)
    with pytest.raises(ScenarioError):
        built.gaussian


def test_data_based_scenario_reads_gaussian_file():
    built = _build("data_based")
    assert built.system is None
    assert (built.steps, built.state_dim) == (3, 2)
    assert built.reach_avoid.init is None


def test_formula_scenario_has_no_reach_avoid_task(write_scenario):
    built = _build(write_scenario())
    assert built.mode == "stl"
    with pytest.raises(ScenarioError):
        built.failure_oracle()


def test_digest_ignores_key_order():
    assert scenario_digest({"a": 1, "b": [1, 2]}) == scenario_digest({"b": [1, 2], "a": 1})


def test_malformed_json(write_scenario):
    with pytest.raises(ScenarioError):
        load_scenario(write_scenario('{"id": "x",'))


@pytest.mark.parametrize(
    "overrides",
    [
        {"reach_avoid": {"unsafe": []}},
        {"formula": "   "},
        {"gaussian_file": "g.json"},
    ],
)
def test_schema_violations(write_scenario, overrides):
    with pytest.raises(ScenarioError):
        load_scenario(write_scenario(**overrides))


def test_formula_longer_than_trajectory(write_scenario):
    with pytest.raises(ScenarioError):
        _build(write_scenario(formula="F[0,5] (x1 >= 1)"))


def test_formula_syntax_error_surfaces(write_scenario):
    with pytest.raises(FormulaSyntaxError):
        _build(write_scenario(formula="F[0,1] (x1 >=)"))


def test_reference_states_must_cover_the_horizon(write_scenario):
    path = write_scenario()
    scenario, document, base = load_scenario(path)
    document["system"]["reference_states"] = [[0.0]]
    scenario = scenario.model_validate(document)
    with pytest.raises(ScenarioError):
        build_scenario(scenario, document, base)


def test_missing_gaussian_file(write_scenario):
    document = {
        "gaussian_file": "missing.json",
        "formula": "x1 >= 0",
    }
    with pytest.raises(ScenarioError):
        _build(write_scenario(document))


def test_estimator_overrides():
    scenario, _, _ = load_scenario("rare_event")
    config = scenario.estimator.hdr_config(seed=99, threads=None)
    assert config.seed == 99
    assert config.samples_per_nesting == 128


def test_reach_avoid_satisfaction_carries_midpoints():
    built = _build("holonomic_reach_avoid")
    oracle = built.satisfaction_oracle()
    assert isinstance(oracle, StlDomain)
    assert oracle.state_dim == 8
    assert oracle.lift.shape == (2 * 4 * 6, 4 * 6)
    assert _build("intersection").satisfaction_oracle().lift is None
