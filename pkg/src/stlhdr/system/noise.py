from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Tuple

import numpy as np


class CovarianceError(ValueError):
    """Raised for covariances that are not symmetric positive semidefinite."""


def check_psd(cov: np.ndarray, name: str = "covariance") -> np.ndarray:
    """Symmetrise ``cov`` and reject clearly indefinite matrices."""
    cov = np.asarray(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise CovarianceError(f"{name} must be square, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise CovarianceError(f"{name} has non-finite entries")
    cov = 0.5 * (cov + cov.T)
    if cov.size:
        eig = np.linalg.eigvalsh(cov)
        if eig.min() < -1e-9 * max(eig.max(), 0.0):
            raise CovarianceError(f"{name} is not positive semidefinite (min eigenvalue {eig.min():.3g})")
    return cov


class NoiseChannel(ABC):
    """Per-step noise entering a system channel of dimension ``dim``."""

    dim: int

    @abstractmethod
    def moments(self, steps: int) -> Tuple[np.ndarray, np.ndarray]:
        """Per-step means (steps, dim) and covariances (steps, dim, dim)."""

    @abstractmethod
    def draw(self, count: int, steps: int, rng: np.random.Generator) -> np.ndarray:
        """Noise samples of shape (count, steps, dim)."""

    def expected(self, steps: int) -> np.ndarray:
        """Per-step expected value, shape (steps, dim)."""
        return self.moments(steps)[0]


class GaussianNoise(NoiseChannel):
    """Independent Gaussian noise; mean and covariance may vary per step."""

    def __init__(self, mean, cov) -> None:
        mean = np.asarray(mean, dtype=float)
        cov = np.asarray(cov, dtype=float)
        if cov.ndim == 2:
            self.dim = cov.shape[0]
        elif cov.ndim == 3:
            self.dim = cov.shape[1]
        else:
            raise CovarianceError(f"Noise covariance must be 2-D or 3-D, got {cov.ndim}-D")
        if mean.shape[-1:] != (self.dim,) or mean.ndim > 2:
            raise CovarianceError(f"Noise mean shape {mean.shape} does not match dimension {self.dim}")
        self.mean = mean
        self.cov = (
            check_psd(cov, "noise covariance")
            if cov.ndim == 2
            else np.stack([check_psd(c, f"noise covariance at step {t}") for t, c in enumerate(cov)])
        )

    @classmethod
    def zero(cls, dim: int) -> "GaussianNoise":
        return cls(np.zeros(dim), np.zeros((dim, dim)))

    @classmethod
    def isotropic(cls, variances, mean=None) -> "GaussianNoise":
        variances = np.asarray(variances, dtype=float).reshape(-1)
        mean = np.zeros(variances.size) if mean is None else mean
        return cls(mean, np.diag(variances))

    def _per_step(self, array: np.ndarray, steps: int, rank: int) -> np.ndarray:
        if array.ndim == rank:
            return np.broadcast_to(array, (steps,) + array.shape).copy()
        if array.shape[0] < steps:
            raise CovarianceError(f"Noise given for {array.shape[0]} steps, {steps} required")
        return array[:steps].copy()

    def moments(self, steps: int) -> Tuple[np.ndarray, np.ndarray]:
        return self._per_step(self.mean, steps, 1), self._per_step(self.cov, steps, 2)

    def draw(self, count: int, steps: int, rng: np.random.Generator) -> np.ndarray:
        means, covs = self.moments(steps)
        out = np.empty((count, steps, self.dim))
        for t in range(steps):
            out[:, t, :] = rng.multivariate_normal(means[t], covs[t], size=count, method="eigh")
        return out

    def __repr__(self) -> str:
        return f"GaussianNoise(dim={self.dim})"
