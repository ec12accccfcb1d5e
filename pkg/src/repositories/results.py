"""
Result Repository
CSV persistence for simulation results: timeseries, scheduler trace and summary.
"""
import csv
from pathlib import Path
from typing import Optional

import numpy as np

from src.config import get_settings
from src.models.results import SimulationResult
from src.utils.observability import logger

TIMESERIES_FILE = "timeseries.csv"
SCHEDULER_FILE = "scheduler.csv"
SUMMARY_FILE = "summary.csv"


def scheduler_columns(n_loops: int) -> tuple[str, ...]:
    columns = ["time_s", "miss_ratio", "err", "U_total"]
    for i in range(1, n_loops + 1):
        columns += [f"J_{i}", f"Jp_{i}", f"h_{i}_ms", f"prio_{i}"]
    return tuple(columns)


class ResultRepository:
    """
    Writes and reads the three CSV files of a run.

    Usage:
        repository = ResultRepository("results")
        directory = repository.save(result, "ifs")   # results/ifs/*.csv
    """

    def __init__(self, base_dir: str | Path | None = None, significant_digits: Optional[int] = None):
        settings = get_settings()
        self.base_dir = Path(base_dir if base_dir is not None else settings.output_dir)
        digits = significant_digits or settings.csv_significant_digits
        self._float_fmt = f"%.{digits}g"

    def save(self, result: SimulationResult, subdir: Optional[str] = None) -> Path:
        """
        Write timeseries.csv, scheduler.csv and summary.csv.

        Args:
            result: Run to persist
            subdir: Optional sub-directory of base_dir (e.g. the mode name)

        Returns:
            Directory the files were written to
        """
        directory = self.base_dir / subdir if subdir else self.base_dir
        directory.mkdir(parents=True, exist_ok=True)

        self._write_timeseries(result, directory / TIMESERIES_FILE)
        self._write_scheduler(result, directory / SCHEDULER_FILE)
        self._write_summary(result, directory / SUMMARY_FILE)

        logger.info(f"Wrote {result.mode} results for {result.scenario!r} to {directory}")
        return directory

    def _write_timeseries(self, result: SimulationResult, path: Path) -> None:
        fmt = [self._float_fmt] + [
            "%d" if name.startswith("prio_") else self._float_fmt for name in result.columns[1:]
        ]
        np.savetxt(path, result.timeseries, fmt=fmt, delimiter=",",
                   header=",".join(result.columns), comments="")

    def _write_scheduler(self, result: SimulationResult, path: Path) -> None:
        columns = scheduler_columns(result.n_loops)
        rows = []
        for row in result.scheduler_trace:
            values = [row.time_s, row.miss_ratio, row.err, row.utilization]
            for j, jp, h, prio in zip(row.costs, row.weighted_costs, row.periods_s, row.display_priorities):
                values += [j, jp, h * 1000, prio]
            rows.append(values)
        data = np.array(rows, dtype=float).reshape(len(rows), len(columns))
        fmt = ["%d" if name.startswith("prio_") else self._float_fmt for name in columns]
        np.savetxt(path, data, fmt=fmt, delimiter=",", header=",".join(columns), comments="")

    def _write_summary(self, result: SimulationResult, path: Path) -> None:
        summary = result.summary
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["scope", "metric", "value"])
            for loop in summary.loops:
                scope = f"loop{loop.loop}"
                for metric, value in loop.model_dump(exclude={"loop"}).items():
                    writer.writerow([scope, metric, self._format(value)])
            writer.writerow(["global", "total_iae", self._format(summary.total_iae)])
            for metric in (
                "mean_requested_utilization",
                "final_half_requested_utilization",
                "bus_busy_fraction",
                "run_miss_ratio",
                "final_window_miss_ratio",
            ):
                writer.writerow(["global", metric, self._format(getattr(summary, metric))])

    def _format(self, value: float | int) -> str:
        if isinstance(value, int):
            return str(value)
        return self._float_fmt % value


def load_timeseries(path: str | Path) -> tuple[tuple[str, ...], np.ndarray]:
    """Read a timeseries or scheduler CSV back as (columns, array)."""
    path = Path(path)
    with path.open(encoding="utf-8") as handle:
        columns = tuple(handle.readline().strip().split(","))
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return columns, data.reshape(-1, len(columns))


def load_summary(path: str | Path) -> dict[tuple[str, str], float]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        return {(row["scope"], row["metric"]): float(row["value"]) for row in reader}
