"""Result documents and the CSV series written next to them."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from stlhdr.sampling.hdr import confidence_interval
from stlhdr.sampling.models import McResult, MixtureResult, NestingRecord, VerificationResult

logger = logging.getLogger(__name__)

Mode = Literal["stl", "reach-avoid", "mc", "mixture"]

RESULT_FILE = "result.json"
NESTINGS_FILE = "nestings.csv"
COMPARE_RUNS_FILE = "compare_runs.csv"
COMPARE_HIST_FILE = "compare_hist.csv"


class ResultDocument(BaseModel):
    """What every estimating command reports (and writes as ``result.json``)."""

    command: str
    scenario_id: Optional[str] = None
    scenario_digest: str
    mode: Mode
    negated: bool = False
    probability: float = Field(..., ge=0.0, le=1.0)
    variance: float = Field(..., ge=0.0)
    std: float = Field(..., ge=0.0)
    ci_low: float
    ci_high: float
    ci_level: float
    upper_bound_only: bool = False
    samples_per_nesting: Optional[int] = None
    nestings: List[NestingRecord] = []
    mc_samples: Optional[int] = None
    mc_hits: Optional[int] = None
    between_variance: Optional[float] = None
    within_variance: Optional[float] = None
    per_iteration: List[float] = []
    seed: Optional[int] = None
    wall_time: float = 0.0
    exports: List[str] = []

    @classmethod
    def from_verification(
        cls, result: VerificationResult, mode: Mode, samples_per_nesting: int, **fields
    ) -> "ResultDocument":
        return cls(
            mode=mode,
            probability=result.probability,
            variance=result.variance,
            std=result.std,
            ci_low=result.ci_low,
            ci_high=result.ci_high,
            ci_level=result.ci_level,
            upper_bound_only=result.upper_bound_only,
            samples_per_nesting=samples_per_nesting,
            nestings=result.records,
            wall_time=result.wall_time,
            **fields,
        )

    @classmethod
    def from_mixture(cls, result: MixtureResult, samples_per_nesting: int, **fields) -> "ResultDocument":
        return cls(
            mode="mixture",
            probability=result.probability,
            variance=result.variance,
            std=result.std,
            ci_low=result.ci_low,
            ci_high=result.ci_high,
            ci_level=result.ci_level,
            upper_bound_only=any(r.upper_bound_only for r in result.per_iteration),
            samples_per_nesting=samples_per_nesting,
            between_variance=result.between_variance,
            within_variance=result.within_variance,
            per_iteration=[r.probability for r in result.per_iteration],
            wall_time=result.wall_time,
            **fields,
        )

    @classmethod
    def from_mc(cls, result: McResult, ci_level: float, **fields) -> "ResultDocument":
        low, high = confidence_interval(result.probability, result.std, ci_level)
        return cls(
            mode="mc",
            probability=result.probability,
            variance=result.variance,
            std=result.std,
            ci_low=low,
            ci_high=high,
            ci_level=ci_level,
            mc_samples=result.n,
            mc_hits=result.hits,
            wall_time=result.wall_time,
            **fields,
        )

    def write(self, out_dir: Union[str, Path]) -> Path:
        path = Path(out_dir) / RESULT_FILE
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        logger.info("[cli] wrote %s", path)
        return path


def nestings_frame(results: Sequence[VerificationResult]) -> pd.DataFrame:
    """Cutoff and conditional per nesting; one iteration per result."""
    rows = [
        {"iteration": i, **record.model_dump()}
        for i, result in enumerate(results)
        for record in result.records
    ]
    columns = ["iteration", *NestingRecord.model_fields]
    return pd.DataFrame(rows, columns=columns)


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    logger.info("[cli] wrote %s rows=%d", path, len(frame))
    return path


def histogram_frame(series: dict, bins: int = 20) -> pd.DataFrame:
    """Counts per method over shared bin edges."""
    values = np.concatenate([np.asarray(v, dtype=float) for v in series.values()])
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        lo, hi = lo - 0.5 * max(abs(lo), 1e-12), hi + 0.5 * max(abs(hi), 1e-12)
    edges = np.linspace(lo, hi, bins + 1)
    rows = []
    for method, data in series.items():
        counts, _ = np.histogram(data, bins=edges)
        rows.extend(
            {"method": method, "bin_low": edges[i], "bin_high": edges[i + 1], "count": int(c)}
            for i, c in enumerate(counts)
        )
    return pd.DataFrame(rows, columns=["method", "bin_low", "bin_high", "count"])


class CompareSummary(BaseModel):
    scenario_id: Optional[str] = None
    scenario_digest: str
    runs: int
    hdr_mean: float
    hdr_spread: float
    hdr_mean_reported_std: float
    mc_mean: float
    mc_spread: float
    mc_mean_reported_std: float
    mc_zero_hit_runs: int
    exports: List[str] = []
