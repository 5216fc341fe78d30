# Ensure bundled scenarios register on import
from . import bundled  # noqa: F401
from .builder import (
    BuiltScenario,
    ReachAvoidTask,
    ScenarioError,
    build_scenario,
    build_system,
    load_scenario,
    scenario_digest,
    steps_from_seconds,
)
from .registry import BundledScenario, UnknownScenarioError, get_scenario, list_scenarios, register_scenario
from .schemas import EstimatorSpec, Scenario

__all__ = [
    "BuiltScenario",
    "BundledScenario",
    "EstimatorSpec",
    "ReachAvoidTask",
    "Scenario",
    "ScenarioError",
    "UnknownScenarioError",
    "build_scenario",
    "build_system",
    "get_scenario",
    "list_scenarios",
    "load_scenario",
    "register_scenario",
    "scenario_digest",
    "steps_from_seconds",
]
