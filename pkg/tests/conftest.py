import json

import numpy as np
import pytest

from stlhdr.system import TrajectoryGaussian


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def standard_normal():
    """One-dimensional N(0, 1) as a one-step trajectory Gaussian."""
    return TrajectoryGaussian(np.zeros(1), np.eye(1), state_dim=1, steps=1)


def _tiny_document(**overrides):
    # x_{t+1} = 0.5 x_t + w_t, so x_2 ~ N(0, 1.25).
    document = {
        "id": "tiny",
        "system": {
            "A": [[0.5]],
            "B": [[0]],
            "C": [[1]],
            "K": [[0]],
            "x0": [0],
            "horizon_steps": 3,
            "process_noise": {"type": "gaussian", "variances": [1]},
        },
        "formula": "F[2,2] (x1 >= 1)",
        "estimator": {"samples_per_nesting": 32, "seed": 3, "n_mc": 4000},
    }
    document.update(overrides)
    return document


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario document (default: the tiny AR(1) chain) and return its path."""

    def _write(document=None, name="scenario.json", **overrides):
        payload = _tiny_document(**overrides) if document is None else document
        path = tmp_path / name
        path.write_text(payload if isinstance(payload, str) else json.dumps(payload), encoding="utf-8")
        return path

    return _write
