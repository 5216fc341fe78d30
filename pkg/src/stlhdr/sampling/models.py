from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class NestingRecord(BaseModel):
    k: int
    cutoff: float
    n_samples: int
    n_inside: int
    conditional: float


class VerificationResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    probability: float = Field(..., ge=0.0, le=1.0)
    variance: float = Field(..., ge=0.0)
    std: float
    ci_low: float
    ci_high: float
    ci_level: float
    records: List[NestingRecord] = []
    samples: Optional[np.ndarray] = Field(default=None, exclude=True)
    wall_time: float = 0.0
    upper_bound_only: bool = False

    @property
    def K(self) -> int:
        return len(self.records)


class McResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    probability: float = Field(..., ge=0.0, le=1.0)
    variance: float
    std: float
    n: int
    hits: int
    flags: Optional[np.ndarray] = Field(default=None, exclude=True)
    wall_time: float = 0.0


class MixtureResult(BaseModel):
    probability: float = Field(..., ge=0.0, le=1.0)
    variance: float
    std: float
    ci_low: float
    ci_high: float
    ci_level: float
    between_variance: float
    within_variance: float
    per_iteration: List[VerificationResult]
    wall_time: float = 0.0
