"""
Structured Logging & Observability
Human-readable or JSON logging for simulation runs and scheduler decisions.
"""
import sys
from loguru import logger
from typing import Any, Sequence
from src.config import get_settings


def configure_logging():
    """
    Configure loguru for the simulator.

    In development: Human-readable colorized output
    With enable_structured_logging: JSON records (one per line) for batch sweeps
    """
    settings = get_settings()

    # Remove default handler
    logger.remove()
    logger.configure(extra={"environment": settings.environment})

    if not settings.enable_structured_logging:
        logger.add(
            sys.stderr,
            format=(
                "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
                "<level>{level: <8}</level> | "
                "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
                "{message}"
            ),
            level=settings.log_level,
            colorize=True,
        )
    else:
        logger.add(
            sys.stderr,
            format="{message}",
            level=settings.log_level,
            serialize=True,  # Output as JSON
        )

    logger.debug(f"Logging configured: level={settings.log_level}, structured={settings.enable_structured_logging}")


def log_simulation_event(
    event_type: str,
    scenario: str,
    **details: Any
):
    """
    Log run-level events: run start/finish, controller redesigns, aborts.

    Args:
        event_type: Type of event (e.g., "run_started", "run_finished", "numerical_abort")
        scenario: Scenario name
        **details: Event-specific data (mode, duration_s, loop_id, ...)

    Example:
        >>> log_simulation_event(
        ...     "run_finished",
        ...     scenario="scenario-1",
        ...     mode="ifs",
        ...     total_iae=0.41,
        ...     wall_ms=820.3,
        ... )
    """
    log_data = {
        "event_type": event_type,
        "scenario": scenario,
        **details
    }

    if event_type.endswith("abort"):
        level = "ERROR"
    elif event_type == "period_redesign":
        level = "DEBUG"
    else:
        level = "INFO"
    logger.bind(**log_data).log(level, f"Simulation | {event_type} | {scenario}")


def log_scheduler_invocation(
    time_s: float,
    miss_ratio: float,
    err: float,
    utilization: float,
    periods_s: Sequence[float],
    priorities: Sequence[int],
):
    """
    One DEBUG record per feedback-scheduler invocation.

    Args:
        time_s: Invocation instant
        miss_ratio: Measured deadline miss ratio of the closing window
        err: Deadzone error fed to the PI controller
        utilization: Utilization command after the PI update
        periods_s: Allocated sampling periods
        priorities: Assigned priority levels (greater wins)
    """
    log_data = {
        "event_type": "scheduler_invocation",
        "time_s": round(time_s, 6),
        "miss_ratio": round(miss_ratio, 6),
        "err": round(err, 6),
        "utilization": round(utilization, 6),
        "periods_ms": [round(h * 1000, 4) for h in periods_s],
        "priorities": list(priorities),
    }

    logger.bind(**log_data).debug(
        f"Scheduler | t={time_s:.3f}s | rho={miss_ratio:.3f} | U={utilization:.3f}"
    )
