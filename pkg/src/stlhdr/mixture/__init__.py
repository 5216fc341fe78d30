from .estimator import conditional_gaussian, mixture_estimate
from .models import (
    BlackBoxWeights,
    GaussianComponent,
    MarkovWeights,
    MixtureModelError,
    MixtureNoiseModel,
    StaticWeights,
    conditional_noise_spec,
    sample_mode_sequence,
    stationary_distribution,
)

__all__ = [
    "BlackBoxWeights",
    "GaussianComponent",
    "MarkovWeights",
    "MixtureModelError",
    "MixtureNoiseModel",
    "StaticWeights",
    "conditional_gaussian",
    "conditional_noise_spec",
    "mixture_estimate",
    "sample_mode_sequence",
    "stationary_distribution",
]
