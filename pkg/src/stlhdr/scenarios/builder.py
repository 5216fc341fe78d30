"""Turn validated scenario documents into systems, Gaussians and targets."""
from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import ValidationError

from stlhdr.geometry.polytope import Polytope, box
from stlhdr.geometry.reach_avoid import (
    EnumerationCapError,
    Goal,
    ReachAvoidDomains,
    StlDelegation,
    build_reach_avoid_domains,
    failure_formula,
    midpoint_lift,
    reach_avoid_formula,
)
from stlhdr.mixture.models import GaussianComponent, MarkovWeights, MixtureNoiseModel, StaticWeights
from stlhdr.sampling.domains import DomainOracle, PolytopeDomain, StlDomain
from stlhdr.stl.formula import Formula, negate
from stlhdr.stl.parser import parse_formula
from stlhdr.system.control import distance_jacobian, distance_measurement, lqr_gain, propagate_expected_state
from stlhdr.system.fit import GaussianDocument
from stlhdr.system.gaussian import TrajectoryGaussian
from stlhdr.system.model import (
    DirectFeedback,
    InitialState,
    LtvSystem,
    MeasurementFn,
    ObserverFeedback,
    build_trajectory_gaussian,
)
from stlhdr.system.noise import GaussianNoise, NoiseChannel

from .registry import get_scenario
from .schemas import GaussianNoiseSpec, RegionSpec, Scenario, SystemSpec

logger = logging.getLogger(__name__)


class ScenarioError(ValueError):
    """Raised for unreadable, invalid or inconsistent scenario documents."""


def steps_from_seconds(seconds: float, dt: float) -> int:
    """Number of sampled states covering ``[0, seconds]``: ``ceil(T / dt) + 1``."""
    return int(math.ceil(seconds / dt - 1e-9)) + 1


def step_at(seconds: float, dt: float) -> int:
    return int(round(seconds / dt))


def scenario_digest(document: Dict[str, Any]) -> str:
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_scenario(source: Union[str, Path]) -> Tuple[Scenario, Dict[str, Any], Path]:
    """Read a scenario from a path or a bundled id; returns (model, raw document, base dir)."""
    path = Path(source)
    if not path.exists():
        path = get_scenario(str(source)).path
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: malformed JSON at line {exc.lineno}: {exc.msg}") from exc
    try:
        scenario = Scenario.model_validate(document)
    except ValidationError as exc:
        raise ScenarioError(f"{path}: invalid scenario\n{exc}") from exc
    return scenario, document, path.parent


def _array(value, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != ndim:
        raise ScenarioError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    return arr


def gaussian_noise(spec: GaussianNoiseSpec) -> GaussianNoise:
    if spec.uniform is not None:
        bounds = np.asarray(spec.uniform, dtype=float)
        mean = bounds.mean(axis=1)
        return GaussianNoise(mean, np.diag((bounds[:, 1] - bounds[:, 0]) ** 2 / 12.0))
    if spec.variances is not None:
        cov = np.diag(spec.variances)
    else:
        cov = _array(spec.cov, "noise cov", 2)
    mean = np.zeros(cov.shape[0]) if spec.mean is None else np.asarray(spec.mean, dtype=float)
    return GaussianNoise(mean, cov)


def noise_channel(spec) -> NoiseChannel:
    if isinstance(spec, GaussianNoiseSpec):
        return gaussian_noise(spec)
    components = [GaussianComponent(np.asarray(c.mu), np.asarray(c.sigma)) for c in spec.components]
    if spec.weights.static is not None:
        weights = StaticWeights(np.asarray(spec.weights.static))
    else:
        markov = spec.weights.markov
        weights = MarkovWeights(np.asarray(markov.P), np.asarray(markov.init))
    return MixtureNoiseModel(components, weights)


def region(spec: RegionSpec, state_dim: int) -> Polytope:
    if spec.lower is not None:
        return box(spec.lower, spec.upper, spec.indices, state_dim)
    return Polytope(_array(spec.A, "region A", 2), np.asarray(spec.b, dtype=float))


def horizon_steps(spec: SystemSpec) -> int:
    if spec.horizon_steps is not None:
        return spec.horizon_steps
    return steps_from_seconds(spec.horizon_seconds, spec.dt)


def build_system(spec: SystemSpec) -> Tuple[LtvSystem, int, Optional[MeasurementFn]]:
    """Closed-loop system, number of steps and the nonlinear measurement (if any)."""
    A = _array(spec.A, "A", 2)
    B = _array(spec.B, "B", 2)
    n, m = B.shape
    steps = horizon_steps(spec)
    x0 = InitialState(np.asarray(spec.x0, dtype=float), spec.x0_cov)

    jacobian = None
    if spec.linearization is not None:
        jacobian = distance_jacobian(spec.linearization.indices, n)
        C = jacobian(x0.mean)
    elif spec.C is not None:
        C = _array(spec.C, "C", 2)
    else:
        C = np.eye(n)

    K = _array(spec.K, "K", 2) if spec.K is not None else lqr_gain(A, B, spec.lqr.Q, spec.lqr.R)
    if spec.observer is not None:
        xhat0 = spec.observer.xhat0 if spec.observer.xhat0 is not None else x0.mean
        feedback = ObserverFeedback(K, _array(spec.observer.L, "L", 2), np.asarray(xhat0, dtype=float))
        state_gain = K
    else:
        feedback = DirectFeedback(K)
        state_gain = K @ C

    feed_forward = np.zeros(m) if spec.reference is None else np.asarray(spec.reference, dtype=float)
    reference = feed_forward
    if spec.reference_states is not None:
        if jacobian is not None:
            raise ScenarioError("reference_states cannot be combined with a linearized measurement")
        states = _array(spec.reference_states, "reference_states", 2)
        if states.shape[0] < steps or states.shape[1] != n:
            raise ScenarioError(f"reference_states must have shape (>= {steps}, {n}), got {states.shape}")
        reference = states[:steps] @ state_gain.T + feed_forward

    q = C.shape[0]
    measurement_noise = (
        noise_channel(spec.measurement_noise) if spec.measurement_noise is not None else GaussianNoise.zero(q)
    )
    process_noise = noise_channel(spec.process_noise) if spec.process_noise is not None else None
    sys = LtvSystem(
        A=A,
        B=B,
        C=C,
        feedback=feedback,
        x0=x0,
        measurement_noise=measurement_noise,
        process_noise=process_noise,
        E=None if spec.E is None else _array(spec.E, "E", 2),
        reference=reference,
        dt=spec.dt,
    )
    measurement = None
    if jacobian is not None:
        sys = sys.with_measurement(np.stack(propagate_expected_state(sys, jacobian, steps)))
        measurement = distance_measurement(spec.linearization.indices)
    return sys, steps, measurement


@dataclass
class ReachAvoidTask:
    init: Optional[Polytope]
    unsafe: List[Polytope]
    goals: List[Goal]
    midpoints: bool


@dataclass
class BuiltScenario:
    scenario: Scenario
    digest: str
    steps: int
    state_dim: int
    system: Optional[LtvSystem] = None
    fitted: Optional[TrajectoryGaussian] = None
    measurement: Optional[MeasurementFn] = None
    formula: Optional[Formula] = None
    reach_avoid: Optional[ReachAvoidTask] = None

    @property
    def mode(self) -> str:
        return "stl" if self.formula is not None else "reach-avoid"

    @property
    def has_mixture(self) -> bool:
        sys = self.system
        return sys is not None and any(
            isinstance(channel, MixtureNoiseModel) for channel in (sys.measurement_noise, sys.process_noise)
        )

    @cached_property
    def gaussian(self) -> TrajectoryGaussian:
        if self.fitted is not None:
            return self.fitted
        if self.has_mixture:
            raise ScenarioError("A mixture-noise system has no single trajectory Gaussian")
        return build_trajectory_gaussian(self.system, self.steps)

    @cached_property
    def domains(self) -> ReachAvoidDomains:
        task = self._task()
        return build_reach_avoid_domains(task.init, task.unsafe, task.goals, self.steps, task.midpoints)

    def _task(self) -> ReachAvoidTask:
        if self.reach_avoid is None:
            raise ScenarioError("Scenario has no reach_avoid block")
        return self.reach_avoid

    def task_formula(self, failure: bool = True) -> Formula:
        """Reach-avoid property (or its failure) as an STL formula.

        With midpoints enabled the formula reads the signal of ``midpoint_lift``.
        """
        task = self._task()
        build = failure_formula if failure else reach_avoid_formula
        return build(task.init, task.unsafe, task.goals, self.steps, task.midpoints)

    def stl_oracle(self, negated: bool = False) -> StlDomain:
        if self.formula is not None:
            return StlDomain(negate(self.formula) if negated else self.formula, self.state_dim)
        formula = self.task_formula(failure=False)
        formula = negate(formula) if negated else formula
        if not self._task().midpoints:
            return StlDomain(formula, self.state_dim)
        return StlDomain(formula, 2 * self.state_dim, lift=midpoint_lift(self.state_dim, self.steps))

    def satisfaction_oracle(self) -> DomainOracle:
        """Satisfying set of the reach-avoid task; the STL path when it is too large to enumerate."""
        try:
            satisfaction = self.domains.satisfaction
        except EnumerationCapError as exc:
            logger.info("[scenario] satisfaction via STL path: %s", exc)
            return self.stl_oracle()
        if isinstance(satisfaction, StlDelegation):
            logger.info("[scenario] satisfaction via STL path: %s", satisfaction.reason)
            return self.stl_oracle()
        return PolytopeDomain(satisfaction)

    def failure_oracle(self) -> DomainOracle:
        return PolytopeDomain(self.domains.failure)


def build_scenario(scenario: Scenario, document: Dict[str, Any], base_dir: Path = Path(".")) -> BuiltScenario:
    if scenario.system is not None:
        sys, steps, measurement = build_system(scenario.system)
        built = BuiltScenario(scenario, scenario_digest(document), steps, sys.n, system=sys, measurement=measurement)
        dt = scenario.system.dt
    else:
        path = Path(scenario.gaussian_file)
        path = path if path.is_absolute() else base_dir / path
        try:
            fitted = GaussianDocument.read(path).to_gaussian()
        except (OSError, ValidationError) as exc:
            raise ScenarioError(f"Cannot read gaussian_file {path}: {exc}") from exc
        built = BuiltScenario(scenario, scenario_digest(document), fitted.steps, fitted.state_dim, fitted=fitted)
        dt = None

    if scenario.formula is not None:
        formula = parse_formula(scenario.formula, built.state_dim)
        if formula.horizon > built.steps:
            raise ScenarioError(
                f"Formula horizon {formula.horizon} exceeds the {built.steps}-step trajectory"
            )
        built.formula = formula
    else:
        ra = scenario.reach_avoid
        goals = []
        for goal in ra.goals:
            if goal.window is not None:
                window = tuple(goal.window)
            elif dt is None:
                raise ScenarioError("window_seconds needs a system block with dt; use window in steps")
            else:
                window = (step_at(goal.window_seconds[0], dt), step_at(goal.window_seconds[1], dt))
            goals.append(Goal(region(goal.region, built.state_dim), window))
        built.reach_avoid = ReachAvoidTask(
            init=region(ra.init, built.state_dim) if ra.init is not None else None,
            unsafe=[region(r, built.state_dim) for r in ra.unsafe],
            goals=goals,
            midpoints=ra.midpoints,
        )
    logger.info(
        "[scenario] id=%s mode=%s steps=%d state_dim=%d mixture=%s",
        scenario.id, built.mode, built.steps, built.state_dim, built.has_mixture,
    )
    return built
