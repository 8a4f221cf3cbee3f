"""Command-line entry point: gen-worlds, calibrate, run, report, sweep-sdt."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ..core import VlnError
from .config import PRESETS, RunConfig, preset, with_overrides
from .run import InvariantViolation, report, run_benchmark, run_calibration, sweep
from .worlds import KINDS, generate_worlds, save_worlds

log = logging.getLogger("vlnstack")

EXIT_INVARIANT = 3
EXIT_ERROR = 2


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t]


def _strs(text: str) -> list[str]:
    return [t for t in text.split(",") if t]


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--config", type=Path, help="JSON RunConfig; flags override it")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--episodes", type=int)
    p.add_argument("--world-dir")
    p.add_argument("--modes", type=_strs, help="comma list of planner, reasoner, ucm, ucm@<tau>")
    p.add_argument("--tau", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--calibration", help="calibration file for mode 'ucm'")
    p.add_argument("--calibration-episodes", type=int)
    p.add_argument("--l-max", type=int)
    p.add_argument("--controller", choices=("planned", "tryout"))
    p.add_argument("--sdt", type=_floats, help="comma list of success thresholds")
    p.add_argument("--workers", type=int)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        cfg = RunConfig.load(args.config)
    elif args.preset:
        cfg = preset(args.preset)
    else:
        cfg = RunConfig()
    return with_overrides(
        cfg,
        out=args.out,
        seed=args.seed,
        episodes=args.episodes,
        world_dir=args.world_dir,
        modes=args.modes,
        tau=args.tau,
        epsilon=args.epsilon,
        calibration=args.calibration,
        calibration_episodes=args.calibration_episodes,
        l_max=args.l_max,
        controller=args.controller,
        sdt=args.sdt,
        workers=args.workers,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vlnstack", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="verb", required=True)

    g = sub.add_parser("gen-worlds", help="write procedural world files")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--count", type=int, default=4)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--styles", type=_strs, default=["seen"])
    g.add_argument("--out", required=True)

    c = sub.add_parser("calibrate", help="fit the conformal threshold on calibration episodes")
    _add_run_flags(c)
    c.add_argument("--output", help="calibration file path (default <out>/calibration.json)")

    r = sub.add_parser("run", help="run the benchmark and write logs and reports")
    _add_run_flags(r)

    rp = sub.add_parser("report", help="recompute reports from a finished run directory")
    rp.add_argument("run_dir")

    s = sub.add_parser("sweep-sdt", help="aggregate a finished run over a list of thresholds")
    s.add_argument("run_dir")
    s.add_argument("--sdt", type=_floats, default=[0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.verb == "gen-worlds":
            worlds = generate_worlds(args.kind, args.count, args.seed, args.styles)
            for p in save_worlds(worlds, args.out):
                print(p)
        elif args.verb == "calibrate":
            cfg = config_from_args(args)
            path = Path(args.output) if args.output else Path(cfg.out) / "calibration.json"
            model = run_calibration(cfg, path)
            print(f"epsilon={model.epsilon:g} n={model.n} tau={model.tau:.6f} -> {path}")
        elif args.verb == "run":
            cfg = config_from_args(args)
            result = run_benchmark(cfg)
            sys.stdout.write((result.out / "report.txt").read_text())
        elif args.verb == "report":
            report(args.run_dir)
            sys.stdout.write((Path(args.run_dir) / "report.txt").read_text())
        elif args.verb == "sweep-sdt":
            sweep(args.run_dir, args.sdt)
            sys.stdout.write((Path(args.run_dir) / "sweep.txt").read_text())
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (VlnError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return 0


if __name__ == "__main__":
    sys.exit(main())
