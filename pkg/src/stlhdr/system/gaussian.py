from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np
from scipy import linalg

from stlhdr.core.config import settings

from .noise import CovarianceError


@dataclass(frozen=True, eq=False)
class TrajectoryGaussian:
    """Normal distribution over stacked trajectories ``(x_0', ..., x_{T-1}')'``."""

    mean: np.ndarray
    cov: np.ndarray
    state_dim: int
    steps: int

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.asarray(self.cov, dtype=float)
        dim = self.state_dim * self.steps
        if mean.size != dim or cov.shape != (dim, dim):
            raise CovarianceError(
                f"Expected mean ({dim},) and covariance ({dim}, {dim}); "
                f"got {mean.shape} and {cov.shape}"
            )
        cov = 0.5 * (cov + cov.T)
        eig = np.linalg.eigvalsh(cov)
        if eig.min() < -1e-9 * max(eig.max(), 0.0):
            raise CovarianceError(f"Trajectory covariance is indefinite (min eigenvalue {eig.min():.3g})")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0.0, None))

    @cached_property
    def ridge(self) -> float:
        trace = float(np.trace(self.cov))
        return settings.RIDGE_SCALE * (trace / self.dim if trace > 0.0 else 1.0)

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Lower factor of the ridged covariance."""
        try:
            return linalg.cholesky(self.cov + self.ridge * np.eye(self.dim), lower=True)
        except linalg.LinAlgError as exc:
            raise CovarianceError("Cholesky factorisation failed after ridge regularisation") from exc

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """``count`` independent trajectories; shape (count, dim)."""
        z = rng.standard_normal((count, self.dim))
        return self.mean + z @ self.cholesky.T

    def marginal(self, t: int) -> Tuple[np.ndarray, np.ndarray]:
        if not 0 <= t < self.steps:
            raise IndexError(f"Step {t} outside a {self.steps}-step trajectory")
        block = slice(t * self.state_dim, (t + 1) * self.state_dim)
        return self.mean[block].copy(), self.cov[block, block].copy()

    def mean_states(self) -> np.ndarray:
        return self.mean.reshape(self.steps, self.state_dim)
