import os

import pytest
from dotenv import load_dotenv

os.environ["ENVIRONMENT"] = "test"

load_dotenv()

from src.models.scenario import LoopConfig, PlantModel, ReferenceConfig, ScenarioConfig  # noqa: E402
from src.services.scenario_service import preset  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def load_env():
    """Ensure env vars are loaded for the entire session."""
    load_dotenv()


@pytest.fixture
def dc_motor() -> PlantModel:
    return PlantModel.dc_motor()


@pytest.fixture
def scenario_1() -> ScenarioConfig:
    return preset("scenario-1")


@pytest.fixture
def scenario_2() -> ScenarioConfig:
    return preset("scenario-2")


@pytest.fixture
def short_scenario_1(scenario_1) -> ScenarioConfig:
    """Scenario I cut to one second on a 1 ms log grid."""
    return scenario_1.with_overrides(duration_s=1.0, log_grid_s=1e-3)


@pytest.fixture
def short_scenario_2(scenario_2) -> ScenarioConfig:
    """Scenario II cut to two seconds on a 1 ms log grid."""
    return scenario_2.with_overrides(duration_s=2.0, log_grid_s=1e-3)


@pytest.fixture
def single_loop() -> LoopConfig:
    return LoopConfig(h_initial_s=0.01, priority=1, reference=ReferenceConfig(period_s=4.0))


def pytest_configure(config):
    load_dotenv()

    # Register custom markers
    config.addinivalue_line("markers", "slow: full-length scenario runs")
