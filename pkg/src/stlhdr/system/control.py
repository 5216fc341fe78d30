"""LQR synthesis and linearisation of nonlinear range measurements."""
from __future__ import annotations

import logging
from typing import Callable, List, Optional, Sequence

import numpy as np

from .model import DirectFeedback, LtvSystem, SystemDimensionError

logger = logging.getLogger(__name__)

JacobianFn = Callable[[np.ndarray], np.ndarray]


class RiccatiConvergenceError(RuntimeError):
    """Raised when the Riccati iteration does not reach a stabilising fixed point."""


class LinearizationError(RuntimeError):
    """Raised when a measurement cannot be linearised along the expected state."""


def lqr_gain(
    A: np.ndarray,
    B: np.ndarray,
    Q: np.ndarray,
    R: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Infinite-horizon discrete LQR gain ``K`` for ``u = -K x``.

    Iterates ``P <- Q + A'PA - A'PB (R + B'PB)^-1 B'PA`` from ``P = Q``.
    """
    A, B, Q, R = (np.atleast_2d(np.asarray(M, dtype=float)) for M in (A, B, Q, R))
    n, m = B.shape
    if A.shape != (n, n) or Q.shape != (n, n) or R.shape != (m, m):
        raise SystemDimensionError(
            f"LQR shapes A={A.shape}, B={B.shape}, Q={Q.shape}, R={R.shape} are inconsistent"
        )
    P = Q.copy()
    for iteration in range(1, max_iter + 1):
        BtP = B.T @ P
        K = np.linalg.solve(R + BtP @ B, BtP @ A)
        P_next = Q + A.T @ P @ A - A.T @ P @ B @ K
        P_next = 0.5 * (P_next + P_next.T)
        change = np.linalg.norm(P_next - P) / max(np.linalg.norm(P_next), 1e-300)
        P = P_next
        if change < tol:
            break
    else:
        raise RiccatiConvergenceError(f"Riccati iteration did not converge in {max_iter} iterations")

    BtP = B.T @ P
    K = np.linalg.solve(R + BtP @ B, BtP @ A)
    radius = float(np.max(np.abs(np.linalg.eigvals(A - B @ K))))
    if radius >= 1.0:
        raise RiccatiConvergenceError(f"LQR closed loop is not stable (spectral radius {radius:.6g})")
    logger.debug("[lqr] iterations=%d spectral_radius=%.6g", iteration, radius)
    return K


def distance_jacobian(indices: Sequence[int], state_dim: int) -> JacobianFn:
    """Jacobian of ``d(z) = ||z[indices]||`` as a (1, n) row."""
    indices = list(indices)

    def jacobian(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        d = float(np.linalg.norm(z[indices]))
        if d < 1e-9:
            raise LinearizationError(f"Distance {d:.3g} too small to linearise")
        row = np.zeros((1, state_dim))
        row[0, indices] = z[indices] / d
        return row

    return jacobian


def distance_measurement(indices: Sequence[int]) -> Callable[[np.ndarray, int], np.ndarray]:
    """Nonlinear range measurement ``||x[indices]||`` for batched rollouts."""
    indices = list(indices)

    def measure(x: np.ndarray, t: int) -> np.ndarray:
        return np.linalg.norm(x[:, indices], axis=1, keepdims=True)

    return measure


def propagate_expected_state(
    sys: LtvSystem, jacobian: JacobianFn, steps: int, start: Optional[np.ndarray] = None
) -> List[np.ndarray]:
    """Measurement matrices ``C_t`` linearised along the expected trajectory.

    Alternates ``C_t = J(E[x_t])`` with
    ``E[x_{t+1}] = (A - B K C_t) E[x_t] + B r_t + E mu_w - B K mu_v``.
    """
    if not isinstance(sys.feedback, DirectFeedback):
        raise LinearizationError("Expected-state linearisation needs direct measurement feedback")
    q = sys.q
    unrolled = sys.unrolled(steps)
    mu_v = sys.measurement_noise.expected(steps)
    mu_w = sys.process_noise.expected(steps) if sys.process_noise is not None else np.zeros((steps, sys.e))
    x = sys.x0.mean.copy() if start is None else np.asarray(start, dtype=float).copy()

    C_seq: List[np.ndarray] = []
    for t in range(steps):
        try:
            C = np.asarray(jacobian(x), dtype=float)
        except LinearizationError:
            raise
        except Exception as exc:
            raise LinearizationError(f"Jacobian callback failed at step {t}") from exc
        if C.shape != (q, sys.n):
            raise LinearizationError(f"Jacobian at step {t} has shape {C.shape}, expected {(q, sys.n)}")
        C_seq.append(C)
        A, B, K = unrolled.A[t], unrolled.B[t], unrolled.K[t]
        x = (A - B @ K @ C) @ x + B @ unrolled.R[t] + unrolled.E[t] @ mu_w[t] - B @ K @ mu_v[t]
    logger.debug("[linearize] steps=%d final_expected_state=%s", steps, np.round(x, 4).tolist())
    return C_seq
