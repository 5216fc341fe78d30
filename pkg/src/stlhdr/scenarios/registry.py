from __future__ import annotations

from pathlib import Path
from typing import Callable, Dict, List, Type

DATA_DIR = Path(__file__).resolve().parent / "data"


class UnknownScenarioError(KeyError):
    """Raised when a scenario id is neither a file nor a bundled scenario."""


class BundledScenario:
    """A scenario document shipped with the package."""

    id: str
    filename: str
    description: str

    @property
    def path(self) -> Path:
        return DATA_DIR / self.filename


_SCENARIO_REGISTRY: Dict[str, Type[BundledScenario]] = {}


def register_scenario(
    scenario_id: str,
) -> Callable[[Type[BundledScenario]], Type[BundledScenario]]:
    """Class decorator to register a bundled scenario by id."""

    def _decorator(cls: Type[BundledScenario]) -> Type[BundledScenario]:
        if scenario_id in _SCENARIO_REGISTRY:
            raise KeyError(f"Scenario id '{scenario_id}' already registered")
        _SCENARIO_REGISTRY[scenario_id] = cls
        cls.id = scenario_id
        return cls

    return _decorator


def get_scenario(scenario_id: str) -> BundledScenario:
    try:
        cls = _SCENARIO_REGISTRY[scenario_id]
    except KeyError as exc:
        raise UnknownScenarioError(
            f"Unknown scenario '{scenario_id}'. Available: {sorted(_SCENARIO_REGISTRY.keys())}"
        ) from exc
    return cls()


def list_scenarios() -> List[str]:
    return sorted(_SCENARIO_REGISTRY.keys())
