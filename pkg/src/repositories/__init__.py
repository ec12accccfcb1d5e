"""
Repositories Layer
CSV persistence of simulation results.
"""
from .results import ResultRepository, load_summary, load_timeseries, scheduler_columns

__all__ = [
    "ResultRepository",
    "load_summary",
    "load_timeseries",
    "scheduler_columns",
]
