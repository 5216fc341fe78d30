from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.linalg import solve_discrete_are

from stlhdr.system import (
    DirectFeedback,
    GaussianNoise,
    InitialState,
    LinearizationError,
    LtvSystem,
    ObserverFeedback,
    RiccatiConvergenceError,
    SystemDimensionError,
    distance_jacobian,
    distance_measurement,
    lqr_gain,
    propagate_expected_state,
)


def test_scalar_lqr_gain_is_golden_ratio_conjugate():
    K = lqr_gain(1.0, 1.0, 1.0, 1.0)
    assert K[0, 0] == pytest.approx((math.sqrt(5) - 1) / 2, rel=1e-8)


def test_lqr_matches_riccati_solver():
    A = np.array([[1.0, 1.0], [0.0, 1.0]])
    B = np.array([[0.5], [1.0]])
    Q = np.diag([1.0, 0.1])
    R = np.array([[0.5]])
    P = solve_discrete_are(A, B, Q, R)
    expected = np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)
    np.testing.assert_allclose(lqr_gain(A, B, Q, R), expected, rtol=1e-6)


def test_uncontrollable_unstable_plant_raises():
    with pytest.raises(RiccatiConvergenceError):
        lqr_gain(2.0, 0.0, 1.0, 1.0, max_iter=50)


def test_lqr_shape_mismatch():
    with pytest.raises(SystemDimensionError):
        lqr_gain(np.eye(2), np.ones((2, 1)), np.eye(3), np.eye(1))


def test_distance_jacobian():
    jac = distance_jacobian([0, 1], 4)
    row = jac(np.array([-5.0, 5.0, 2.0, -2.0]))
    np.testing.assert_allclose(row, np.array([[-5.0, 5.0, 0.0, 0.0]]) / math.sqrt(50.0))
    with pytest.raises(LinearizationError):
        jac(np.zeros(4))


def test_distance_measurement_is_batched():
    measure = distance_measurement([0, 1])
    y = measure(np.array([[3.0, 4.0, 9.0], [0.0, 1.0, 9.0]]), 0)
    np.testing.assert_allclose(y, [[5.0], [1.0]])


def _range_system(feedback=None):
    return LtvSystem(
        A=np.eye(2),
        B=np.eye(2)[:, :1],
        C=np.zeros((1, 2)),
        feedback=feedback or DirectFeedback(np.array([[0.5]])),
        x0=InitialState(np.array([-4.0, 3.0])),
        measurement_noise=GaussianNoise.zero(1),
    )


def test_linearisation_follows_expected_state():
    sys = _range_system()
    C_seq = propagate_expected_state(sys, distance_jacobian([0, 1], 2), steps=3)
    assert len(C_seq) == 3
    np.testing.assert_allclose(C_seq[0], [[-0.8, 0.6]])
    # u_0 = -0.5 * (-0.8*-4 + 0.6*3) = -2.5, so x_1 = (-6.5, 3).
    x1 = np.array([-6.5, 3.0])
    np.testing.assert_allclose(C_seq[1], (x1 / np.linalg.norm(x1))[None, :])


def test_linearisation_needs_direct_feedback():
    observer = _range_system(ObserverFeedback(np.zeros((1, 2)), np.zeros((2, 1)), np.zeros(2)))
    with pytest.raises(LinearizationError):
        propagate_expected_state(observer, distance_jacobian([0, 1], 2), steps=2)


def test_failing_jacobian_callback_is_wrapped():
    def broken(z):
        raise ZeroDivisionError("boom")

    with pytest.raises(LinearizationError):
        propagate_expected_state(_range_system(), broken, steps=2)


def test_jacobian_shape_is_checked():
    with pytest.raises(LinearizationError):
        propagate_expected_state(_range_system(), lambda z: np.ones((2, 2)), steps=2)
