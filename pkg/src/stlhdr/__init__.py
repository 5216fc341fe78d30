"""Probabilistic STL verification of linear stochastic closed loops.

Trajectory Gaussians come from :mod:`stlhdr.system`; probabilities of STL
level sets or reach-avoid polytope unions come from :mod:`stlhdr.sampling`.
"""
from stlhdr.sampling import HdrConfig, hdr_estimate, srs_estimate
from stlhdr.stl import parse_formula, robustness, robustness_batch
from stlhdr.system import TrajectoryGaussian, build_trajectory_gaussian

__version__ = "1.0.0"

__all__ = [
    "HdrConfig",
    "TrajectoryGaussian",
    "build_trajectory_gaussian",
    "hdr_estimate",
    "parse_formula",
    "robustness",
    "robustness_batch",
    "srs_estimate",
]
