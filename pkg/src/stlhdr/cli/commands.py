"""Command implementations; argument parsing lives in ``main``."""
from __future__ import annotations

import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
import pandas as pd

from stlhdr.mixture import conditional_gaussian, mixture_estimate
from stlhdr.sampling import (
    DomainOracle,
    HdrConfig,
    VerificationResult,
    autocorrelation,
    hdr_estimate,
    sample_target,
    srs_estimate,
)
from stlhdr.scenarios import (
    BuiltScenario,
    ScenarioError,
    build_scenario,
    get_scenario,
    list_scenarios,
    load_scenario,
)
from stlhdr.stl.formula import negate
from stlhdr.system.fit import GaussianDocument, fit_gaussian, load_trajectory_csv, save_trajectory_csv

from .documents import (
    COMPARE_HIST_FILE,
    COMPARE_RUNS_FILE,
    NESTINGS_FILE,
    CompareSummary,
    ResultDocument,
    histogram_frame,
    nestings_frame,
    write_csv,
)

logger = logging.getLogger(__name__)

Source = Union[str, Path]
Side = Literal["satisfy", "violate"]


def _load(source: Source) -> BuiltScenario:
    scenario, document, base_dir = load_scenario(source)
    return build_scenario(scenario, document, base_dir)


def _out_dir(built: BuiltScenario, out: Optional[Source]) -> Optional[Path]:
    target = out if out is not None else built.scenario.outputs.dir
    if target is None:
        return None
    path = Path(target)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _config(built: BuiltScenario, seed: Optional[int], threads: Optional[int]) -> HdrConfig:
    return built.scenario.estimator.hdr_config(seed=seed, threads=threads)


def _require_reach_avoid(built: BuiltScenario) -> None:
    if built.reach_avoid is None:
        raise ScenarioError("verify-ra needs a scenario with a reach_avoid block; use verify for formulas")


def _estimate(
    built: BuiltScenario, oracle: DomainOracle, config: HdrConfig, mode: str, rng: np.random.Generator, **fields
) -> Tuple[ResultDocument, List[VerificationResult]]:
    n = config.resolve_samples()
    if built.has_mixture:
        result = mixture_estimate(
            built.system, oracle, built.scenario.estimator.n_outer, config, rng, config.threads, built.steps
        )
        return ResultDocument.from_mixture(result, n, **fields), list(result.per_iteration)
    result = hdr_estimate(built.gaussian, oracle, config, rng)
    return ResultDocument.from_verification(result, mode, n, **fields), [result]


def _finish(
    document: ResultDocument,
    results: List[VerificationResult],
    built: BuiltScenario,
    out_dir: Optional[Path],
    export_samples: bool,
) -> ResultDocument:
    if out_dir is None:
        return document
    exports = [str(write_csv(nestings_frame(results), out_dir / NESTINGS_FILE))]
    if export_samples and len(results) == 1 and results[0].samples is not None:
        exports.append(str(save_trajectory_csv(out_dir / "samples.csv", results[0].samples, built.state_dim)))
    document = document.model_copy(update={"exports": exports})
    document.write(out_dir)
    return document


def cmd_verify(
    source: Source,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    negated: bool = False,
    out: Optional[Source] = None,
    export_samples: bool = False,
) -> ResultDocument:
    """Probability of the scenario formula (or of its negation)."""
    built = _load(source)
    config = _config(built, seed, threads)
    rng = np.random.default_rng(config.seed)
    oracle = built.stl_oracle(negated=negated)
    document, results = _estimate(
        built, oracle, config, "stl", rng,
        command="verify", scenario_id=built.scenario.id, scenario_digest=built.digest,
        negated=negated, seed=config.seed,
    )
    export = export_samples or built.scenario.outputs.export_samples
    return _finish(document, results, built, _out_dir(built, out), export)


def cmd_verify_ra(
    source: Source,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    out: Optional[Source] = None,
    export_samples: bool = False,
) -> ResultDocument:
    """Failure probability of a reach-avoid task over the union of polytopes."""
    built = _load(source)
    _require_reach_avoid(built)
    config = _config(built, seed, threads)
    rng = np.random.default_rng(config.seed)
    document, results = _estimate(
        built, built.failure_oracle(), config, "reach-avoid", rng,
        command="verify-ra", scenario_id=built.scenario.id, scenario_digest=built.digest, seed=config.seed,
    )
    export = export_samples or built.scenario.outputs.export_samples
    return _finish(document, results, built, _out_dir(built, out), export)


def _mc_target(built: BuiltScenario, negated: bool):
    if built.formula is not None:
        return negate(built.formula) if negated else built.formula
    return built.failure_oracle()


def cmd_mc(
    source: Source,
    seed: Optional[int] = None,
    n_mc: Optional[int] = None,
    negated: bool = False,
    out: Optional[Source] = None,
) -> ResultDocument:
    """Simple random sampling of the closed loop.

    Formula scenarios count satisfying runs (``negated`` flips the formula);
    reach-avoid scenarios count failing runs, as ``verify-ra`` does.
    """
    built = _load(source)
    if built.system is None:
        raise ScenarioError("mc simulates the closed loop and needs a system block")
    estimator = built.scenario.estimator
    seed = estimator.seed if seed is None else seed
    result = srs_estimate(
        built.system,
        _mc_target(built, negated),
        estimator.n_mc if n_mc is None else n_mc,
        np.random.default_rng(seed),
        steps=built.steps,
        measurement=built.measurement,
    )
    document = ResultDocument.from_mc(
        result, estimator.ci_level,
        command="mc", scenario_id=built.scenario.id, scenario_digest=built.digest,
        negated=negated and built.formula is not None, seed=seed,
    )
    out_dir = _out_dir(built, out)
    if out_dir is not None:
        document.write(out_dir)
    return document


def _side_oracle(built: BuiltScenario, side: Side) -> DomainOracle:
    if side not in ("satisfy", "violate"):
        raise ValueError(f"side must be 'satisfy' or 'violate', got {side!r}")
    if built.formula is None:
        return built.satisfaction_oracle() if side == "satisfy" else built.failure_oracle()
    return built.stl_oracle(negated=side == "violate")


def cmd_sample(
    source: Source,
    count: int,
    side: Side = "satisfy",
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    out: Optional[Source] = None,
) -> ResultDocument:
    """Fresh trajectories from the satisfying or violating set, as CSV.

    Mixture-noise scenarios are sampled conditionally on one mode draw per
    noise channel.
    """
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    built = _load(source)
    config = _config(built, seed, threads).model_copy(update={"retain_samples": True})
    rng = np.random.default_rng(config.seed)
    if built.has_mixture:
        gaussian = conditional_gaussian(built.system, built.steps, rng)
        logger.info("[sample] mixture noise: sampling conditionally on one mode draw")
    else:
        gaussian = built.gaussian
    oracle = _side_oracle(built, side)
    out_dir = _out_dir(built, out) or Path(".")
    path = out_dir / f"samples_{side}.csv"

    result = hdr_estimate(gaussian, oracle, config, rng)
    X = sample_target(result, count, gaussian, oracle, config, rng) if count else np.zeros((0, gaussian.dim))
    save_trajectory_csv(path, X, built.state_dim)
    if count > 1:
        logger.info("[sample] side=%s count=%d score_lag1_autocorr=%.3f", side, count, autocorrelation(oracle.score(X), 1))
    document = ResultDocument.from_verification(
        result, "stl" if built.formula is not None else "reach-avoid", config.resolve_samples(),
        command="sample", scenario_id=built.scenario.id, scenario_digest=built.digest,
        negated=side == "violate", seed=config.seed, exports=[str(path)],
    )
    document.write(out_dir)
    return document


def cmd_fit(trajectories: Source, out: Source, ridge: float = 1e-9) -> Path:
    """Fit a trajectory Gaussian to recorded runs and write it as JSON."""
    X, state_dim = load_trajectory_csv(trajectories)
    gaussian = fit_gaussian(X, state_dim, ridge=ridge)
    path = Path(out)
    if path.suffix != ".json":
        path.mkdir(parents=True, exist_ok=True)
        path = path / "gaussian.json"
    GaussianDocument.from_gaussian(gaussian).write(path)
    logger.info("[fit] wrote %s state_dim=%d steps=%d", path, gaussian.state_dim, gaussian.steps)
    return path


def cmd_compare(
    source: Source,
    runs: int,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    negated: bool = False,
    out: Optional[Source] = None,
    bins: int = 20,
) -> CompareSummary:
    """Repeated HDR and Monte-Carlo runs on the same target, for spread plots."""
    if runs < 2:
        raise ValueError(f"runs must be >= 2, got {runs}")
    built = _load(source)
    if built.system is None:
        raise ScenarioError("compare runs the Monte-Carlo baseline and needs a system block")
    config = _config(built, seed, threads).model_copy(update={"retain_samples": False})
    if built.formula is not None:
        oracle = built.stl_oracle(negated=negated)
    else:
        oracle = built.failure_oracle()
    mc_target = _mc_target(built, negated)
    n_mc = built.scenario.estimator.n_mc
    streams = np.random.SeedSequence(config.seed).spawn(2 * runs)

    rows = []
    for i in range(runs):
        hdr_rng = np.random.default_rng(streams[2 * i])
        mc_rng = np.random.default_rng(streams[2 * i + 1])
        document, _ = _estimate(
            built, oracle, config, built.mode, hdr_rng,
            command="compare", scenario_digest=built.digest,
        )
        mc = srs_estimate(built.system, mc_target, n_mc, mc_rng, steps=built.steps, measurement=built.measurement)
        rows.append(
            {"run": i, "hdr_p": document.probability, "hdr_std": document.std, "mc_p": mc.probability, "mc_std": mc.std}
        )
        logger.info("[compare] run=%d hdr_p=%.6g mc_p=%.6g", i, document.probability, mc.probability)

    frame = pd.DataFrame(rows, columns=["run", "hdr_p", "hdr_std", "mc_p", "mc_std"])
    summary = CompareSummary(
        scenario_id=built.scenario.id,
        scenario_digest=built.digest,
        runs=runs,
        hdr_mean=float(frame["hdr_p"].mean()),
        hdr_spread=float(frame["hdr_p"].std(ddof=1)),
        hdr_mean_reported_std=float(frame["hdr_std"].mean()),
        mc_mean=float(frame["mc_p"].mean()),
        mc_spread=float(frame["mc_p"].std(ddof=1)),
        mc_mean_reported_std=float(frame["mc_std"].mean()),
        mc_zero_hit_runs=int((frame["mc_p"] == 0).sum()),
    )
    out_dir = _out_dir(built, out)
    if out_dir is not None:
        exports = [
            write_csv(frame, out_dir / COMPARE_RUNS_FILE),
            write_csv(histogram_frame({"hdr": frame["hdr_p"], "mc": frame["mc_p"]}, bins), out_dir / COMPARE_HIST_FILE),
        ]
        summary.exports = [str(p) for p in exports]
    return summary


def cmd_list() -> List[Tuple[str, str]]:
    return [(scenario_id, get_scenario(scenario_id).description) for scenario_id in list_scenarios()]
