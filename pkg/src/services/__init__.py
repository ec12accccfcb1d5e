"""Services package: feedback scheduling, priority modification and scenario loading."""
from src.services.feedback_scheduler import (
    AllocationError,
    FeedbackScheduler,
    FixedPeriodScheduler,
    IntegratedFeedbackScheduler,
    SchedulerState,
    build_scheduler,
)
from src.services.priority_modification import modify_priorities
from src.services.scenario_service import (
    PRESETS,
    ScenarioValidationError,
    UnknownPresetError,
    load_scenario_file,
    parse_scenario,
    preset,
)

__all__ = [
    "AllocationError",
    "FeedbackScheduler",
    "FixedPeriodScheduler",
    "IntegratedFeedbackScheduler",
    "SchedulerState",
    "build_scheduler",
    "modify_priorities",
    "PRESETS",
    "ScenarioValidationError",
    "UnknownPresetError",
    "load_scenario_file",
    "parse_scenario",
    "preset",
]
