"""Data-based trajectory Gaussians and trajectory CSV files."""
from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator
from sklearn.covariance import EmpiricalCovariance

from stlhdr.stl.formula import StackedSignal

from .gaussian import TrajectoryGaussian

logger = logging.getLogger(__name__)

_COLUMN = re.compile(r"^x(\d+)_(\d+)$")


class InsufficientSamplesError(ValueError):
    """Raised when a fit has fewer than two samples per trajectory-space variable."""


def _as_matrix(trajectories: Union[np.ndarray, Sequence[StackedSignal]]) -> np.ndarray:
    if isinstance(trajectories, np.ndarray):
        return np.atleast_2d(trajectories.astype(float))
    lengths = {len(s) for s in trajectories}
    if len(lengths) > 1:
        raise InsufficientSamplesError(f"Trajectories have inconsistent lengths: {sorted(lengths)}")
    return np.vstack([s.values for s in trajectories]) if trajectories else np.zeros((0, 0))


def fit_gaussian(
    trajectories: Union[np.ndarray, Sequence[StackedSignal]],
    state_dim: int,
    ridge: float = 1e-9,
) -> TrajectoryGaussian:
    """Empirical mean and unbiased covariance (plus ``ridge * I``) of stacked trajectories."""
    X = _as_matrix(trajectories)
    count, dim = X.shape
    if dim == 0 or dim % state_dim:
        raise InsufficientSamplesError(f"Trajectory length {dim} is not a multiple of state_dim={state_dim}")
    if count < 2 * dim:
        raise InsufficientSamplesError(
            f"Need at least {2 * dim} trajectories to fit a {dim}-dimensional Gaussian, got {count}"
        )
    if ridge < 0:
        raise ValueError(f"ridge must be nonnegative, got {ridge}")
    estimator = EmpiricalCovariance(assume_centered=False).fit(X)
    # EmpiricalCovariance divides by N.
    cov = estimator.covariance_ * (count / (count - 1)) + ridge * np.eye(dim)
    logger.info("[fit] samples=%d dim=%d ridge=%.3g", count, dim, ridge)
    return TrajectoryGaussian(estimator.location_, cov, state_dim, dim // state_dim)


def trajectory_columns(state_dim: int, steps: int) -> List[str]:
    return [f"x{t}_{i}" for t in range(steps) for i in range(state_dim)]


def save_trajectory_csv(path: Union[str, Path], trajectories: np.ndarray, state_dim: int) -> Path:
    """One row per trajectory, header ``x{t}_{i}``."""
    trajectories = np.atleast_2d(np.asarray(trajectories, dtype=float))
    steps = trajectories.shape[1] // state_dim
    frame = pd.DataFrame(trajectories, columns=trajectory_columns(state_dim, steps))
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def load_trajectory_csv(path: Union[str, Path]) -> Tuple[np.ndarray, int]:
    """Read a trajectory CSV; returns the (N, n*T) matrix and the state dimension."""
    frame = pd.read_csv(path)
    parsed = [_COLUMN.match(c) for c in frame.columns]
    if not frame.columns.size or not all(parsed):
        raise InsufficientSamplesError(f"{path}: header must be x<t>_<i> columns, got {list(frame.columns)[:5]}")
    indices = [(int(m.group(1)), int(m.group(2))) for m in parsed]
    state_dim = max(i for _, i in indices) + 1
    steps = max(t for t, _ in indices) + 1
    if indices != [(t, i) for t in range(steps) for i in range(state_dim)]:
        raise InsufficientSamplesError(f"{path}: columns are not in x<t>_<i> stacking order")
    return frame.to_numpy(dtype=float), state_dim


class GaussianDocument(BaseModel):
    """JSON persistence of a fitted trajectory Gaussian."""

    state_dim: int = Field(..., gt=0)
    steps: int = Field(..., gt=0)
    mean: List[float]
    cov: List[List[float]]

    @model_validator(mode="after")
    def _check_shapes(self) -> "GaussianDocument":
        dim = self.state_dim * self.steps
        if len(self.mean) != dim or len(self.cov) != dim or any(len(row) != dim for row in self.cov):
            raise ValueError(f"mean/cov must have dimension state_dim*steps = {dim}")
        return self

    @classmethod
    def from_gaussian(cls, gaussian: TrajectoryGaussian) -> "GaussianDocument":
        return cls(
            state_dim=gaussian.state_dim,
            steps=gaussian.steps,
            mean=gaussian.mean.tolist(),
            cov=gaussian.cov.tolist(),
        )

    def to_gaussian(self) -> TrajectoryGaussian:
        return TrajectoryGaussian(np.array(self.mean), np.array(self.cov), self.state_dim, self.steps)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "GaussianDocument":
        return cls.model_validate(json.loads(Path(path).read_text(encoding="utf-8")))
