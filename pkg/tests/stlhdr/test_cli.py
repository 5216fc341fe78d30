from __future__ import annotations

import json
from unittest.mock import patch

import numpy as np
import pandas as pd
import pytest
from scipy.stats import norm

from stlhdr.cli import cmd_compare, cmd_fit, cmd_mc, cmd_sample, cmd_verify, cmd_verify_ra, main
from stlhdr.cli.commands import _side_oracle
from stlhdr.sampling import EstimationError
from stlhdr.scenarios import build_scenario, load_scenario
from stlhdr.stl import parse_formula, robustness_batch
from stlhdr.system import GaussianDocument, TrajectoryGaussian, save_trajectory_csv

# x_2 ~ N(0, 1.25) in the tiny scenario.
TINY_P = norm.sf(1.0 / np.sqrt(1.25))


def test_list(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "rare_event" in out and "intersection" in out


def test_verify_writes_documents(write_scenario, tmp_path, capsys):
    out_dir = tmp_path / "out"
    path = write_scenario(estimator={"samples_per_nesting": 128, "seed": 3})
    code = main(["verify", "--scenario", str(path), "--out", str(out_dir)])
    assert code == 0
    printed = json.loads(capsys.readouterr().out)
    assert printed["command"] == "verify" and printed["mode"] == "stl"
    assert TINY_P / 2 < printed["probability"] < TINY_P * 2
    assert len(printed["scenario_digest"]) == 64
    written = json.loads((out_dir / "result.json").read_text())
    assert written["probability"] == printed["probability"]
    nestings = pd.read_csv(out_dir / "nestings.csv")
    assert list(nestings.columns) == ["iteration", "k", "cutoff", "n_samples", "n_inside", "conditional"]
    assert len(nestings) == len(printed["nestings"])


def test_verify_is_deterministic_for_a_seed(write_scenario):
    path = write_scenario()
    first = cmd_verify(path, seed=12)
    second = cmd_verify(path, seed=12)
    assert first.probability == second.probability
    assert first.seed == 12


def test_negated_formula(write_scenario):
    document = cmd_verify(write_scenario(), negated=True)
    assert document.negated
    assert 1 - 2 * TINY_P < document.probability <= 1.0


def test_whole_space_formula(write_scenario):
    document = cmd_verify(write_scenario(formula="x1 >= -100"))
    assert document.probability == 1.0
    assert document.nestings == []


def test_mc(write_scenario):
    document = cmd_mc(write_scenario(), n_mc=20_000)
    assert document.mode == "mc"
    assert document.mc_samples == 20_000
    assert document.probability == pytest.approx(TINY_P, abs=4 * document.std)


def test_verify_ra_on_fitted_gaussian(tmp_path):
    document = cmd_verify_ra("data_based", out=tmp_path, export_samples=True)
    assert document.mode == "reach-avoid"
    assert 0.0 < document.probability < 1.0
    assert (tmp_path / "samples.csv").exists()
    assert len(document.exports) == 2


def test_verify_ra_needs_reach_avoid_block(write_scenario, capsys):
    assert main(["verify-ra", "--scenario", str(write_scenario())]) == 2
    assert "reach_avoid" in capsys.readouterr().err


def test_mc_needs_a_system(capsys):
    assert main(["mc", "--scenario", "data_based"]) == 2


def test_malformed_json_exits_with_config_error(write_scenario, capsys):
    assert main(["verify", "--scenario", str(write_scenario('{"formula": '))]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_unknown_scenario(capsys):
    assert main(["verify", "--scenario", "no_such_scenario"]) == 2
    assert "Unknown scenario" in capsys.readouterr().err


def test_estimation_failure_exits_with_one(write_scenario):
    with patch("stlhdr.cli.commands.hdr_estimate", side_effect=EstimationError("stuck")):
        assert main(["verify", "--scenario", str(write_scenario())]) == 1


def test_sample_header_only(write_scenario, tmp_path):
    cmd_sample(write_scenario(), 0, out=tmp_path)
    lines = (tmp_path / "samples_satisfy.csv").read_text().splitlines()
    assert lines == ["x0_0,x1_0,x2_0"]


def test_sample_violating_side(write_scenario, tmp_path):
    document = cmd_sample(write_scenario(), 40, side="violate", out=tmp_path)
    assert document.negated
    X = pd.read_csv(tmp_path / "samples_violate.csv").to_numpy()
    assert X.shape == (40, 3)
    formula = parse_formula("F[2,2] (x1 >= 1)", 1)
    assert np.all(robustness_batch(formula, X, 1) <= 1e-9)


def test_sample_rejects_negative_count(write_scenario):
    with pytest.raises(ValueError):
        cmd_sample(write_scenario(), -1)


def test_sample_mixture_scenario_conditions_on_modes(tmp_path):
    code = main(["sample", "--scenario", "intersection", "--count", "3", "--out", str(tmp_path)])
    assert code == 0
    X = pd.read_csv(tmp_path / "samples_satisfy.csv").to_numpy()
    assert X.shape == (3, 31 * 4)


class TestReachAvoidSides:
    """The satisfying and failing sides of a reach-avoid scenario never overlap."""

    @pytest.fixture
    def built(self):
        return build_scenario(*load_scenario("holonomic_reach_avoid"))

    @staticmethod
    def corner_cut():
        # Clears both obstacles at every sample; the midpoint (5, 0.8) is inside the first one.
        xy = [(0, 0), (2, 0), (4, 0.8), (6, 0.8), (8, 0), (10, 0)]
        return np.array([[x, y, 2.0, 0.0] for x, y in xy]).reshape(1, -1)

    def test_corner_cut_only_fails(self, built):
        X = self.corner_cut()
        assert not _side_oracle(built, "satisfy").contains(X)[0]
        assert _side_oracle(built, "violate").contains(X)[0]

    def test_sides_partition_the_initial_set(self, built, rng):
        X = built.gaussian.sample(4000, rng)
        # Lift y at steps 2 and 3 so that many runs pass the obstacle between samples.
        shift = rng.uniform(0.0, 1.0, size=2000)
        X[::2, 9] += shift
        X[::2, 13] += shift
        satisfy = _side_oracle(built, "satisfy").contains(X)
        violate = _side_oracle(built, "violate").contains(X)
        in_init = built.reach_avoid.init.contains(X[:, :4])
        assert not np.any(satisfy & violate)
        np.testing.assert_array_equal(satisfy | violate, in_init)
        assert 0 < violate.sum() < len(X)

    def test_sampled_satisfying_runs_clear_the_midpoints(self, built, tmp_path):
        cmd_sample("holonomic_reach_avoid", 20, side="satisfy", out=tmp_path)
        X = pd.read_csv(tmp_path / "samples_satisfy.csv").to_numpy()
        assert not np.any(built.domains.failure.contains(X))


def test_fit(tmp_path, rng, capsys):
    source = TrajectoryGaussian(np.array([0.0, 1.0, 2.0]), np.diag([0.1, 0.2, 0.3]), state_dim=1, steps=3)
    csv = save_trajectory_csv(tmp_path / "runs.csv", source.sample(500, rng), state_dim=1)
    assert main(["fit", "--trajectories", str(csv), "--out", str(tmp_path / "fitted")]) == 0
    fitted = GaussianDocument.read(tmp_path / "fitted" / "gaussian.json")
    assert (fitted.state_dim, fitted.steps) == (1, 3)
    np.testing.assert_allclose(fitted.mean, source.mean, atol=0.1)
    assert cmd_fit(csv, tmp_path / "named.json").name == "named.json"


def test_fit_with_too_few_runs(tmp_path, rng):
    csv = save_trajectory_csv(tmp_path / "runs.csv", rng.normal(size=(3, 3)), state_dim=1)
    assert main(["fit", "--trajectories", str(csv), "--out", str(tmp_path)]) == 2


def test_compare(write_scenario, tmp_path):
    path = write_scenario(estimator={"samples_per_nesting": 16, "seed": 3, "n_mc": 500})
    summary = cmd_compare(path, runs=2, out=tmp_path, bins=5)
    assert summary.runs == 2
    runs = pd.read_csv(tmp_path / "compare_runs.csv")
    assert list(runs.columns) == ["run", "hdr_p", "hdr_std", "mc_p", "mc_std"]
    assert len(runs) == 2
    hist = pd.read_csv(tmp_path / "compare_hist.csv")
    assert hist.groupby("method")["count"].sum().to_dict() == {"hdr": 2, "mc": 2}


def test_compare_needs_two_runs(write_scenario):
    assert main(["compare", "--scenario", str(write_scenario()), "--runs", "1"]) == 2
