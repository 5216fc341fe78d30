from .domains import DomainOracle, PolytopeDomain, StlDomain, stl_active_arcs
from .ess import ChainConfig, autocorrelation, ess_step, run_chains, sample_chain
from .hdr import (
    EstimationError,
    HdrConfig,
    SampleCount,
    adaptive_sample_count,
    confidence_interval,
    estimate_nestings,
    hdr_estimate,
    nominal_variance,
    sample_target,
    variance_of_product,
)
from .mc import srs_estimate
from .models import McResult, MixtureResult, NestingRecord, VerificationResult

__all__ = [
    "ChainConfig",
    "DomainOracle",
    "EstimationError",
    "HdrConfig",
    "McResult",
    "MixtureResult",
    "NestingRecord",
    "PolytopeDomain",
    "SampleCount",
    "StlDomain",
    "VerificationResult",
    "adaptive_sample_count",
    "autocorrelation",
    "confidence_interval",
    "estimate_nestings",
    "ess_step",
    "hdr_estimate",
    "nominal_variance",
    "run_chains",
    "sample_chain",
    "sample_target",
    "srs_estimate",
    "stl_active_arcs",
]
