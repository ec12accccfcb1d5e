"""
Centralized Configuration System
Environment-aware settings for the simulator, its CLI and its writers.
"""
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache
from typing import Literal


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )
    """
    Runtime settings for simulation runs.
    Loads from environment variables with sensible defaults.

    Scenario documents (loops, plants, scheduler parameters) are not settings;
    they are validated ScenarioConfig models.
    """

    # ============================================
    # LOGGING
    # ============================================
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR"] = "INFO"
    enable_structured_logging: bool = False  # Set to True for JSON logs

    # ============================================
    # ENVIRONMENT
    # ============================================
    environment: Literal["development", "production", "test"] = "development"

    # ============================================
    # SIMULATION DEFAULTS
    # ============================================
    default_duration_s: float = Field(
        default=10.0,
        gt=0,
        description="Simulated horizon used when a scenario does not set one"
    )
    default_log_grid_s: float = Field(
        default=1e-4,
        gt=0,
        description="State logging and IAE integration grid"
    )
    time_decimals: int = Field(
        default=12,
        ge=6,
        le=15,
        description="Simulation instants are rounded to this many decimals of a second"
    )
    propagator_cache_size: int = Field(
        default=4096,
        ge=1,
        description="Distinct step lengths cached per loop before the ZOH cache is flushed"
    )

    # ============================================
    # OUTPUT
    # ============================================
    output_dir: str = Field(
        default="results",
        description="Directory the CLI writes CSV files to when --out is not given"
    )
    csv_significant_digits: int = Field(default=9, ge=1, le=17)

    # ============================================
    # EXECUTION
    # ============================================
    parallel_runs: bool = Field(
        default=False,
        description="Run the modes of a paired comparison in separate processes"
    )


@lru_cache()
def get_settings() -> Settings:
    """
    Singleton pattern for settings.
    Uses LRU cache to ensure only one Settings instance exists.
    """
    return Settings()


# Convenience accessor for common use
settings = get_settings()
