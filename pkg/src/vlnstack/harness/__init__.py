"""World generation, calibration runs, benchmarks and the command line."""

from .config import CALIBRATION_ID_OFFSET, PRESETS, RunConfig, WorldSpec, parse_mode, preset, with_overrides
from .run import (
    BenchmarkResult,
    InsufficientCalibration,
    InvariantViolation,
    load_run,
    report,
    run_benchmark,
    run_calibration,
    summary_at,
    sweep,
)
from .worlds import KINDS, GenerationError, generate_episodes, generate_worlds, has_pocket_on_line, load_worlds, save_worlds

__all__ = [
    "BenchmarkResult",
    "CALIBRATION_ID_OFFSET",
    "GenerationError",
    "InsufficientCalibration",
    "InvariantViolation",
    "KINDS",
    "PRESETS",
    "RunConfig",
    "WorldSpec",
    "generate_episodes",
    "generate_worlds",
    "has_pocket_on_line",
    "load_run",
    "load_worlds",
    "parse_mode",
    "preset",
    "report",
    "run_benchmark",
    "run_calibration",
    "save_worlds",
    "summary_at",
    "sweep",
    "with_overrides",
]
