"""JSON scenario documents.

A scenario names a system (or a fitted trajectory Gaussian), the property
to verify (an STL formula or a reach-avoid block) and estimator settings.
Times in ``horizon_seconds`` and ``window_seconds`` are converted to steps
with the system's ``dt``; formula bounds are always in steps.
"""
from __future__ import annotations

from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, Field, PositiveInt, field_validator, model_validator

from stlhdr.sampling.hdr import HdrConfig

Vector = List[float]
Matrix = List[List[float]]


class GaussianNoiseSpec(BaseModel):
    """Gaussian noise given by a covariance, a diagonal, or uniform bounds.

    Uniform bounds ``[[lo, hi], ...]`` are replaced by the Gaussian with the
    same mean and variance.
    """

    type: Literal["gaussian"] = "gaussian"
    mean: Optional[Vector] = None
    cov: Optional[Matrix] = None
    variances: Optional[Vector] = None
    uniform: Optional[List[Annotated[List[float], Field(min_length=2, max_length=2)]]] = None

    @model_validator(mode="after")
    def _one_shape(self) -> "GaussianNoiseSpec":
        given = [name for name in ("cov", "variances", "uniform") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"Gaussian noise needs exactly one of cov/variances/uniform, got {given or 'none'}")
        if self.uniform is not None and any(lo > hi for lo, hi in self.uniform):
            raise ValueError("uniform bounds must satisfy lo <= hi")
        return self


class ComponentSpec(BaseModel):
    mu: Vector
    sigma: Matrix


class MarkovSpec(BaseModel):
    P: Matrix
    init: Vector


class WeightsSpec(BaseModel):
    static: Optional[Vector] = None
    markov: Optional[MarkovSpec] = None

    @model_validator(mode="after")
    def _one_source(self) -> "WeightsSpec":
        if (self.static is None) == (self.markov is None):
            raise ValueError("weights need exactly one of 'static' or 'markov'")
        return self


class MixtureNoiseSpec(BaseModel):
    type: Literal["mixture"]
    components: List[ComponentSpec] = Field(..., min_length=1)
    weights: WeightsSpec


NoiseSpec = Annotated[Union[GaussianNoiseSpec, MixtureNoiseSpec], Field(discriminator="type")]


class LqrSpec(BaseModel):
    Q: Matrix
    R: Matrix


class ObserverSpec(BaseModel):
    L: Matrix
    xhat0: Optional[Vector] = None


class LinearizationSpec(BaseModel):
    type: Literal["distance"] = "distance"
    indices: List[int] = Field(..., min_length=1)


class SystemSpec(BaseModel):
    A: Matrix
    B: Matrix
    C: Optional[Matrix] = None
    E: Optional[Matrix] = None
    dt: float = Field(default=1.0, gt=0.0)
    horizon_seconds: Optional[float] = Field(default=None, ge=0.0)
    horizon_steps: Optional[PositiveInt] = None
    K: Optional[Matrix] = None
    lqr: Optional[LqrSpec] = None
    observer: Optional[ObserverSpec] = None
    reference: Optional[Vector] = Field(default=None, description="Constant feed-forward input")
    reference_states: Optional[List[Vector]] = Field(
        default=None, description="Per-step state reference tracked through the feedback gain"
    )
    x0: Vector
    x0_cov: Optional[Matrix] = None
    measurement_noise: Optional[NoiseSpec] = None
    process_noise: Optional[NoiseSpec] = None
    linearization: Optional[LinearizationSpec] = None

    @model_validator(mode="after")
    def _check(self) -> "SystemSpec":
        if (self.horizon_seconds is None) == (self.horizon_steps is None):
            raise ValueError("system needs exactly one of horizon_seconds or horizon_steps")
        if (self.K is None) == (self.lqr is None):
            raise ValueError("system needs exactly one of K or lqr")
        if self.linearization is not None and self.C is not None:
            raise ValueError("C is computed by the linearization block; do not give both")
        if self.linearization is not None and self.observer is not None:
            raise ValueError("linearization supports direct measurement feedback only")
        return self


class RegionSpec(BaseModel):
    """Axis-aligned box (``lower``/``upper``/``indices``) or half-spaces ``A x + b >= 0``."""

    lower: Optional[Vector] = None
    upper: Optional[Vector] = None
    indices: Optional[List[int]] = None
    A: Optional[Matrix] = None
    b: Optional[Vector] = None

    @model_validator(mode="after")
    def _one_form(self) -> "RegionSpec":
        is_box = self.lower is not None or self.upper is not None
        is_h = self.A is not None or self.b is not None
        if is_box == is_h:
            raise ValueError("region needs either lower/upper or A/b")
        if is_box and (self.lower is None or self.upper is None):
            raise ValueError("box regions need both lower and upper")
        if is_h and (self.A is None or self.b is None):
            raise ValueError("half-space regions need both A and b")
        return self


class GoalSpec(BaseModel):
    region: RegionSpec
    window: Optional[Annotated[List[int], Field(min_length=2, max_length=2)]] = None
    window_seconds: Optional[Annotated[List[float], Field(min_length=2, max_length=2)]] = None

    @model_validator(mode="after")
    def _one_window(self) -> "GoalSpec":
        if (self.window is None) == (self.window_seconds is None):
            raise ValueError("goal needs exactly one of window or window_seconds")
        return self


class ReachAvoidSpec(BaseModel):
    init: Optional[RegionSpec] = None
    unsafe: List[RegionSpec] = []
    goals: List[GoalSpec] = []
    midpoints: bool = False


class EstimatorSpec(HdrConfig):
    n_outer: int = Field(default=10, ge=2, description="Outer iterations for mixture noise")
    n_mc: int = Field(default=2400, ge=1, description="Simulations for the Monte-Carlo baseline")

    def hdr_config(self, **overrides) -> HdrConfig:
        values = self.model_dump(include=set(HdrConfig.model_fields))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return HdrConfig(**values)


class OutputSpec(BaseModel):
    dir: Optional[str] = None
    export_samples: bool = False


class Scenario(BaseModel):
    id: Optional[str] = None
    description: str = ""
    system: Optional[SystemSpec] = None
    gaussian_file: Optional[str] = None
    formula: Optional[str] = None
    reach_avoid: Optional[ReachAvoidSpec] = None
    estimator: EstimatorSpec = Field(default_factory=EstimatorSpec)
    outputs: OutputSpec = Field(default_factory=OutputSpec)

    @field_validator("formula")
    @classmethod
    def _strip_formula(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return None
        value = value.strip()
        if not value:
            raise ValueError("formula must not be empty")
        return value

    @model_validator(mode="after")
    def _exactly_one(self) -> "Scenario":
        if (self.formula is None) == (self.reach_avoid is None):
            raise ValueError("scenario needs exactly one of 'formula' or 'reach_avoid'")
        if (self.system is None) == (self.gaussian_file is None):
            raise ValueError("scenario needs exactly one of 'system' or 'gaussian_file'")
        return self
