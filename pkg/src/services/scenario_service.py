"""
Scenario Service

Loading, validating and serializing scenario documents (JSON), and the two
built-in presets:

- scenario-1: two loops, schedulable under rate-monotonic analysis
- scenario-2: four loops, requested utilization above 100%

Both presets use a 25 kb/s bus, 10-byte frames (c = 3.2 ms) and the default
scheduler parameters.
"""
from pathlib import Path
from typing import Callable

from pydantic import ValidationError

from src.core.errors import SimulationError
from src.models.scenario import LoopConfig, ReferenceConfig, ScenarioConfig, SchedulerParams
from src.utils.observability import logger


class ScenarioValidationError(SimulationError):
    """Scenario document is malformed or violates an invariant."""

    def __init__(self, message: str, errors: list[str] | None = None):
        self.errors = errors or []
        detail = "\n  ".join(self.errors)
        super().__init__(f"{message}\n  {detail}" if detail else message)


class UnknownPresetError(SimulationError):
    pass


def _field_errors(error: ValidationError) -> list[str]:
    messages = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<document>"
        messages.append(f"{path}: {item['msg']}")
    return messages


def parse_scenario(text: str) -> ScenarioConfig:
    """
    Parse and validate a JSON scenario document.

    Raises:
        ScenarioValidationError: with one 'field.path: message' line per problem
    """
    try:
        return ScenarioConfig.model_validate_json(text)
    except ValidationError as e:
        raise ScenarioValidationError("invalid scenario document", _field_errors(e)) from e


def serialize_scenario(config: ScenarioConfig) -> str:
    return config.model_dump_json(indent=2)


def load_scenario_file(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioValidationError(f"cannot read scenario file {path}: {e.strerror}") from e
    config = parse_scenario(text)
    logger.debug(f"Loaded scenario {config.name!r} from {path} ({config.n_loops} loops)")
    return config


def _preset_loop(h_ms: float, priority: int, reference_period_s: float) -> LoopConfig:
    return LoopConfig(
        h_initial_s=h_ms / 1000,
        priority=priority,
        reference=ReferenceConfig(period_s=reference_period_s, amplitude=1.0),
    )


def _scenario_1() -> ScenarioConfig:
    return ScenarioConfig(
        name="scenario-1",
        data_rate_bps=25_000.0,
        loops=(
            _preset_loop(10, priority=2, reference_period_s=4.0),
            _preset_loop(12, priority=1, reference_period_s=2.0),
        ),
        scheduler=SchedulerParams(),
        duration_s=10.0,
        log_grid_s=1e-4,
    )


def _scenario_2() -> ScenarioConfig:
    return ScenarioConfig(
        name="scenario-2",
        data_rate_bps=25_000.0,
        loops=(
            _preset_loop(10, priority=4, reference_period_s=4.0),
            _preset_loop(10, priority=3, reference_period_s=4.0),
            _preset_loop(12, priority=2, reference_period_s=2.0),
            _preset_loop(12, priority=1, reference_period_s=2.0),
        ),
        scheduler=SchedulerParams(),
        duration_s=10.0,
        log_grid_s=1e-4,
    )


PRESETS: dict[str, Callable[[], ScenarioConfig]] = {
    "scenario-1": _scenario_1,
    "scenario-2": _scenario_2,
}


def preset(name: str) -> ScenarioConfig:
    """
    Raises:
        UnknownPresetError: name is not a built-in preset
    """
    try:
        return PRESETS[name]()
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; choose one of {', '.join(sorted(PRESETS))}"
        ) from None
