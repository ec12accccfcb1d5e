"""
CLI Runner for Scenario Simulations
Runs a preset or a JSON scenario under one or more scheduling modes, writes the
CSV results and prints a summary table.

    python -m src.core.cli_runner --preset scenario-1 --mode both --out results/
"""
import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

from loguru import logger
from pydantic import ValidationError

from src.config import get_settings
from src.core.engine import run
from src.core.errors import SimulationError
from src.models.results import SimulationResult
from src.models.scenario import ScenarioConfig, SchedulingMode
from src.repositories.results import ResultRepository
from src.services.scenario_service import (
    PRESETS,
    ScenarioValidationError,
    UnknownPresetError,
    load_scenario_file,
    preset,
)
from src.utils.metrics import iae_improvement
from src.utils.observability import configure_logging
from src.utils.schedulability import TaskSetSpec, rm_schedulability_report

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SIMULATION = 3

MODE_GROUPS: dict[str, tuple[SchedulingMode, ...]] = {
    "ifs": (SchedulingMode.IFS,),
    "nonfs": (SchedulingMode.NON_FS,),
    "period-only": (SchedulingMode.PERIOD_ONLY,),
    "both": (SchedulingMode.NON_FS, SchedulingMode.IFS),
    "all": (SchedulingMode.NON_FS, SchedulingMode.PERIOD_ONLY, SchedulingMode.IFS),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncs-sim",
        description="Simulate control loops sharing a priority bus with and without feedback scheduling.",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")
    source.add_argument("--config", metavar="PATH", help="JSON scenario document")
    parser.add_argument("--mode", choices=list(MODE_GROUPS), default="ifs",
                        help="scheduling mode(s) to run (default: ifs)")
    parser.add_argument("--out", metavar="DIR", default=None,
                        help="output directory (default: OUTPUT_DIR setting)")
    parser.add_argument("--duration", type=float, default=None, metavar="S",
                        help="simulated seconds (overrides the scenario)")
    parser.add_argument("--log-grid", type=float, default=None, metavar="S",
                        help="logging / IAE grid in seconds (overrides the scenario)")
    return parser


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    config = preset(args.preset) if args.preset else load_scenario_file(args.config)
    try:
        return config.with_overrides(duration_s=args.duration, log_grid_s=args.log_grid)
    except ValidationError as e:
        raise ScenarioValidationError("invalid command-line override", [err["msg"] for err in e.errors()]) from e


def run_modes(
    config: ScenarioConfig,
    modes: Sequence[SchedulingMode],
    parallel: bool = False,
) -> dict[SchedulingMode, SimulationResult]:
    """Run the same scenario under each mode; identical inputs apart from the mode."""
    configs = [config.with_overrides(mode=mode) for mode in modes]
    if parallel and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=len(configs)) as pool:
            results = list(pool.map(run, configs))
    else:
        results = [run(c) for c in configs]
    return dict(zip(modes, results))


def print_schedulability(config: ScenarioConfig) -> None:
    if config.n_loops == 0:
        return
    checks = rm_schedulability_report(TaskSetSpec(config.transmission_times, config.initial_periods))
    verdict = "schedulable" if all(c.holds for c in checks) else "NOT guaranteed schedulable"
    print(f"\nRM analysis of initial periods: {verdict}")
    for check in checks:
        mark = "ok" if check.holds else "FAIL"
        print(f"   level {check.level} (loop {check.loop + 1}): "
              f"{check.lhs:.4f} <= {check.bound:.4f}  [{mark}]")


def print_summary(results: dict[SchedulingMode, SimulationResult]) -> None:
    print("\n" + "=" * 70)
    print("Summary")
    print("=" * 70)
    for mode, result in results.items():
        summary = result.summary
        print(f"\n[{mode}]")
        for loop in summary.loops:
            print(f"   loop {loop.loop}: IAE={loop.iae:.6f}  delivered={loop.delivered}  "
                  f"dropped={loop.dropped}  discarded={loop.discarded}  "
                  f"mean delay={loop.mean_delay_ms:.3f} ms")
        print(f"   total IAE: {summary.total_iae:.6f}")
        print(f"   requested utilization: mean={summary.mean_requested_utilization:.4f}  "
              f"final half={summary.final_half_requested_utilization:.4f}")
        print(f"   miss ratio: run={summary.run_miss_ratio:.4f}  "
              f"final window={summary.final_window_miss_ratio:.4f}")

    baseline = results.get(SchedulingMode.NON_FS)
    if baseline is None:
        return
    for mode, result in results.items():
        if mode == SchedulingMode.NON_FS:
            continue
        report = iae_improvement(baseline, result)
        per_loop = ", ".join(f"loop {i}: {p:+.1f}%" for i, p in enumerate(report.per_loop_percent, start=1))
        print(f"\nIAE improvement of {mode} over {SchedulingMode.NON_FS}: "
              f"total {report.total_percent:+.1f}%  ({per_loop})")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point.

    Returns:
        0 on success, 2 on bad arguments or an invalid scenario, 3 when a run fails
    """
    configure_logging()
    settings = get_settings()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = load_config(args)
    except (ScenarioValidationError, UnknownPresetError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    modes = MODE_GROUPS[args.mode]
    print("=" * 70)
    print(f"Scenario {config.name!r}: {config.n_loops} loops, {config.duration_s:g} s, "
          f"modes: {', '.join(str(m) for m in modes)}")
    print("=" * 70)
    print_schedulability(config)

    try:
        results = run_modes(config, modes, parallel=settings.parallel_runs)
    except SimulationError as e:
        logger.error(f"Simulation failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SIMULATION

    repository = ResultRepository(args.out)
    for mode, result in results.items():
        repository.save(result, str(mode))

    print_summary(results)
    print(f"\n✅ Results written to {repository.base_dir}/\n")
    return EXIT_OK


def cli() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli()
