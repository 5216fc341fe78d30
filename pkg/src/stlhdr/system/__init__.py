from .control import (
    LinearizationError,
    RiccatiConvergenceError,
    distance_jacobian,
    distance_measurement,
    lqr_gain,
    propagate_expected_state,
)
from .fit import (
    GaussianDocument,
    InsufficientSamplesError,
    fit_gaussian,
    load_trajectory_csv,
    save_trajectory_csv,
    trajectory_columns,
)
from .gaussian import TrajectoryGaussian
from .model import (
    DirectFeedback,
    InitialState,
    LtvSystem,
    ObserverFeedback,
    SystemDimensionError,
    TrajectoryMaps,
    build_trajectory_gaussian,
    closed_loop_maps,
    draw_noise,
    sample_trajectories,
    simulate_batch,
    simulate_closed_loop,
)
from .noise import CovarianceError, GaussianNoise, NoiseChannel, check_psd

__all__ = [
    "CovarianceError",
    "DirectFeedback",
    "GaussianDocument",
    "GaussianNoise",
    "InitialState",
    "InsufficientSamplesError",
    "LinearizationError",
    "LtvSystem",
    "NoiseChannel",
    "ObserverFeedback",
    "RiccatiConvergenceError",
    "SystemDimensionError",
    "TrajectoryGaussian",
    "TrajectoryMaps",
    "build_trajectory_gaussian",
    "check_psd",
    "closed_loop_maps",
    "distance_jacobian",
    "distance_measurement",
    "draw_noise",
    "fit_gaussian",
    "load_trajectory_csv",
    "lqr_gain",
    "propagate_expected_state",
    "sample_trajectories",
    "save_trajectory_csv",
    "simulate_batch",
    "simulate_closed_loop",
    "trajectory_columns",
]
