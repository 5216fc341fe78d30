"""Closed-loop linear time-varying systems and their trajectory Gaussians.

Dynamics::

    x_{t+1} = A_t x_t + B_t u_t + E_t w_t
    y_t     = C_t x_t + v_t

with either direct measurement feedback ``u_t = r_t - K_t y_t`` or an
observer ``xh_{t+1} = A_t xh_t + B_t u_t + L_t (y_t - C_t xh_t)`` with
``u_t = r_t - K_t xh_t``. Every state is an affine function of the stacked
random vector ``(x_0, R, V, W)``, which is what ``closed_loop_maps`` tracks.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple, Union

import numpy as np
from scipy.linalg import block_diag

from stlhdr.stl.formula import StackedSignal

from .gaussian import TrajectoryGaussian
from .noise import GaussianNoise, NoiseChannel, check_psd

logger = logging.getLogger(__name__)

# Nonlinear measurement: (states (B, n), step) -> noiseless measurements (B, q).
MeasurementFn = Callable[[np.ndarray, int], np.ndarray]
Moments = Tuple[np.ndarray, np.ndarray]


class SystemDimensionError(ValueError):
    """Raised when system matrices, gains or draws have inconsistent shapes."""


@dataclass(frozen=True, eq=False)
class DirectFeedback:
    K: np.ndarray


@dataclass(frozen=True, eq=False)
class ObserverFeedback:
    K: np.ndarray
    L: np.ndarray
    xhat0: np.ndarray


Feedback = Union[DirectFeedback, ObserverFeedback]


@dataclass(frozen=True, eq=False)
class InitialState:
    mean: np.ndarray
    cov: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=float).reshape(-1)
        cov = np.zeros((mean.size, mean.size)) if self.cov is None else check_psd(self.cov, "x0 covariance")
        if cov.shape != (mean.size, mean.size):
            raise SystemDimensionError(f"x0 covariance shape {cov.shape} does not match mean {mean.shape}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def is_deterministic(self) -> bool:
        return not np.any(self.cov)


def _sequence(value, steps: int, shape: Tuple[int, ...], name: str) -> np.ndarray:
    """Broadcast a constant matrix, or check a per-step sequence, to (steps,) + shape."""
    arr = np.asarray(value, dtype=float)
    if arr.shape == shape:
        return np.broadcast_to(arr, (steps,) + shape).copy()
    if arr.ndim == len(shape) + 1 and arr.shape[1:] == shape:
        if arr.shape[0] < steps:
            raise SystemDimensionError(f"{name} given for {arr.shape[0]} steps, {steps} required")
        return arr[:steps].copy()
    raise SystemDimensionError(f"{name} has shape {arr.shape}, expected {shape} or (steps,) + {shape}")


@dataclass(eq=False)
class LtvSystem:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    feedback: Feedback
    x0: InitialState
    measurement_noise: NoiseChannel
    process_noise: Optional[NoiseChannel] = None
    E: Optional[np.ndarray] = None
    reference: Optional[np.ndarray] = None
    dt: float = 1.0
    name: str = field(default="system")

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise SystemDimensionError(f"dt must be positive, got {self.dt}")
        if self.x0.mean.size != self.n:
            raise SystemDimensionError(f"x0 has {self.x0.mean.size} entries, state dimension is {self.n}")
        if self.measurement_noise.dim != self.q:
            raise SystemDimensionError(
                f"Measurement noise has dimension {self.measurement_noise.dim}, expected {self.q}"
            )
        if self.process_noise is not None and self.process_noise.dim != self.e:
            raise SystemDimensionError(
                f"Process noise has dimension {self.process_noise.dim}, expected {self.e}"
            )

    @property
    def n(self) -> int:
        return np.asarray(self.A).shape[-1]

    @property
    def m(self) -> int:
        return np.asarray(self.B).shape[-1]

    @property
    def q(self) -> int:
        return np.asarray(self.C).shape[-2]

    @property
    def e(self) -> int:
        return self.n if self.E is None else np.asarray(self.E).shape[-1]

    @property
    def has_observer(self) -> bool:
        return isinstance(self.feedback, ObserverFeedback)

    def unrolled(self, steps: int) -> "UnrolledSystem":
        if steps < 1:
            raise SystemDimensionError(f"steps must be >= 1, got {steps}")
        n, m, q, e = self.n, self.m, self.q, self.e
        fb = self.feedback
        gain_shape = (m, n) if isinstance(fb, ObserverFeedback) else (m, q)
        reference = np.zeros(m) if self.reference is None else self.reference
        return UnrolledSystem(
            A=_sequence(self.A, steps, (n, n), "A"),
            B=_sequence(self.B, steps, (n, m), "B"),
            C=_sequence(self.C, steps, (q, n), "C"),
            E=_sequence(np.eye(n) if self.E is None else self.E, steps, (n, e), "E"),
            K=_sequence(fb.K, steps, gain_shape, "K"),
            L=_sequence(fb.L, steps, (n, q), "L") if isinstance(fb, ObserverFeedback) else None,
            xhat0=(
                np.asarray(fb.xhat0, dtype=float).reshape(n)
                if isinstance(fb, ObserverFeedback)
                else None
            ),
            R=_sequence(reference, steps, (m,), "reference"),
        )

    def with_measurement(self, C: np.ndarray) -> "LtvSystem":
        """Copy with a replaced (possibly time-varying) measurement matrix."""
        return replace(self, C=C)

    def with_noise(
        self, measurement_noise: NoiseChannel, process_noise: Optional[NoiseChannel]
    ) -> "LtvSystem":
        return replace(self, measurement_noise=measurement_noise, process_noise=process_noise)


@dataclass(frozen=True, eq=False)
class UnrolledSystem:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    E: np.ndarray
    K: np.ndarray
    L: Optional[np.ndarray]
    xhat0: Optional[np.ndarray]
    R: np.ndarray

    @property
    def steps(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class TrajectoryMaps:
    """``x_traj = phi0 x0 + phi_r R + phi_v V + phi_w W + offset``."""

    phi0: np.ndarray
    phi_r: np.ndarray
    phi_v: np.ndarray
    phi_w: np.ndarray
    offset: np.ndarray
    state_dim: int
    steps: int

    def apply(self, x0: np.ndarray, R: np.ndarray, V: np.ndarray, W: np.ndarray) -> np.ndarray:
        return self.phi0 @ x0 + self.phi_r @ R + self.phi_v @ V + self.phi_w @ W + self.offset

    def pushforward(
        self, x0: InitialState, R: np.ndarray, v_moments: Moments, w_moments: Moments
    ) -> TrajectoryGaussian:
        v_mean, v_cov = v_moments
        w_mean, w_cov = w_moments
        mean = self.apply(x0.mean, R.reshape(-1), v_mean.reshape(-1), w_mean.reshape(-1))
        cov = (
            self.phi0 @ x0.cov @ self.phi0.T
            + self.phi_v @ block_diag(*v_cov) @ self.phi_v.T
            + self.phi_w @ block_diag(*w_cov) @ self.phi_w.T
        )
        return TrajectoryGaussian(mean, cov, self.state_dim, self.steps)


def closed_loop_maps(sys: LtvSystem, steps: int) -> TrajectoryMaps:
    """Affine maps from ``(x0, R, V, W)`` to the stacked trajectory."""
    u = sys.unrolled(steps)
    n, m, q, e = sys.n, sys.m, sys.q, sys.e
    off_r = n
    off_v = off_r + m * steps
    off_w = off_v + q * steps
    width = off_w + e * steps

    Gx = np.zeros((n, width))
    Gx[:, :n] = np.eye(n)
    hx = np.zeros(n)
    Gh = np.zeros((n, width))
    hh = u.xhat0.copy() if u.xhat0 is not None else np.zeros(n)

    rows, consts = [Gx], [hx]
    for t in range(steps - 1):
        A, B, C, K = u.A[t], u.B[t], u.C[t], u.K[t]
        Gy = C @ Gx
        Gy[:, off_v + t * q : off_v + (t + 1) * q] += np.eye(q)
        hy = C @ hx
        source, source_h = (Gh, hh) if u.L is not None else (Gy, hy)
        Gu = -K @ source
        Gu[:, off_r + t * m : off_r + (t + 1) * m] += np.eye(m)
        hu = -K @ source_h
        if u.L is not None:
            L = u.L[t]
            Gh, hh = A @ Gh + B @ Gu + L @ (Gy - C @ Gh), A @ hh + B @ hu + L @ (hy - C @ hh)
        Gx = A @ Gx + B @ Gu
        Gx[:, off_w + t * e : off_w + (t + 1) * e] += u.E[t]
        hx = A @ hx + B @ hu
        rows.append(Gx)
        consts.append(hx)

    phi = np.vstack(rows)
    return TrajectoryMaps(
        phi0=phi[:, :off_r],
        phi_r=phi[:, off_r:off_v],
        phi_v=phi[:, off_v:off_w],
        phi_w=phi[:, off_w:],
        offset=np.concatenate(consts),
        state_dim=n,
        steps=steps,
    )


def _zero_moments(dim: int, steps: int) -> Moments:
    return np.zeros((steps, dim)), np.zeros((steps, dim, dim))


def build_trajectory_gaussian(
    sys: LtvSystem,
    steps: int,
    v_moments: Optional[Moments] = None,
    w_moments: Optional[Moments] = None,
    maps: Optional[TrajectoryMaps] = None,
) -> TrajectoryGaussian:
    """Exact Gaussian of the stacked closed-loop trajectory.

    ``v_moments``/``w_moments`` override the system's noise channels, which
    is how a mixture model is conditioned on a sampled mode sequence.
    """
    maps = closed_loop_maps(sys, steps) if maps is None else maps
    if v_moments is None:
        v_moments = sys.measurement_noise.moments(steps)
    if w_moments is None:
        w_moments = (
            sys.process_noise.moments(steps)
            if sys.process_noise is not None
            else _zero_moments(sys.e, steps)
        )
    gaussian = maps.pushforward(sys.x0, sys.unrolled(steps).R, v_moments, w_moments)
    logger.debug(
        "[system] name=%s steps=%d dim=%d trace=%.4g", sys.name, steps, gaussian.dim, np.trace(gaussian.cov)
    )
    return gaussian


def draw_noise(
    sys: LtvSystem, count: int, steps: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Independent ``(v, w, x0)`` draws of shapes (B, T, q), (B, T, e), (B, n)."""
    v = sys.measurement_noise.draw(count, steps, rng)
    w = (
        sys.process_noise.draw(count, steps, rng)
        if sys.process_noise is not None
        else np.zeros((count, steps, sys.e))
    )
    if sys.x0.is_deterministic:
        x0 = np.broadcast_to(sys.x0.mean, (count, sys.n)).copy()
    else:
        x0 = rng.multivariate_normal(sys.x0.mean, sys.x0.cov, size=count, method="eigh")
    return v, w, x0


def simulate_batch(
    sys: LtvSystem,
    v: np.ndarray,
    w: np.ndarray,
    x0: np.ndarray,
    measurement: Optional[MeasurementFn] = None,
) -> np.ndarray:
    """Roll out the closed loop for a batch of noise draws; shape (B, n*T)."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    count, steps = v.shape[0], v.shape[1]
    if v.shape[2] != sys.q or w.shape != (count, steps, sys.e) or x.shape != (count, sys.n):
        raise SystemDimensionError(
            f"Draw shapes v={v.shape}, w={w.shape}, x0={x.shape} do not match "
            f"(B, T, {sys.q}), (B, T, {sys.e}), (B, {sys.n})"
        )
    u = sys.unrolled(steps)
    xh = np.broadcast_to(u.xhat0, x.shape).copy() if u.xhat0 is not None else None
    out = np.empty((count, steps, sys.n))
    out[:, 0] = x
    for t in range(steps - 1):
        clean = measurement(x, t) if measurement is not None else x @ u.C[t].T
        y = clean + v[:, t]
        fed = xh if xh is not None else y
        ctrl = u.R[t] - fed @ u.K[t].T
        if xh is not None:
            xh = xh @ u.A[t].T + ctrl @ u.B[t].T + (y - xh @ u.C[t].T) @ u.L[t].T
        x = x @ u.A[t].T + ctrl @ u.B[t].T + w[:, t] @ u.E[t].T
        out[:, t + 1] = x
    return out.reshape(count, steps * sys.n)


def simulate_closed_loop(
    sys: LtvSystem,
    v: np.ndarray,
    w: np.ndarray,
    x0: np.ndarray,
    measurement: Optional[MeasurementFn] = None,
) -> StackedSignal:
    """Single deterministic rollout for draws of shapes (T, q), (T, e), (n,)."""
    traj = simulate_batch(sys, np.asarray(v)[None], np.asarray(w)[None], np.asarray(x0)[None], measurement)
    return StackedSignal(traj[0], sys.n)


def sample_trajectories(
    sys: LtvSystem, count: int, steps: int, rng: np.random.Generator, measurement: Optional[MeasurementFn] = None
) -> np.ndarray:
    v, w, x0 = draw_noise(sys, count, steps, rng)
    return simulate_batch(sys, v, w, x0, measurement)


__all__ = [
    "DirectFeedback",
    "GaussianNoise",
    "InitialState",
    "LtvSystem",
    "MeasurementFn",
    "ObserverFeedback",
    "SystemDimensionError",
    "TrajectoryMaps",
    "build_trajectory_gaussian",
    "closed_loop_maps",
    "draw_noise",
    "sample_trajectories",
    "simulate_batch",
    "simulate_closed_loop",
]
