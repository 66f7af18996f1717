"""
Command-line interface for rigidpath
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from colorama import Fore, Style, init
from loguru import logger

from rigidpath.config import LOG_DIR, LOG_LEVEL, ensure_dir_exists
from rigidpath.config.pipeline_config import load_config
from rigidpath.errors import (
    EXIT_ASSUMPTION_FLAGS,
    EXIT_OK,
    EXIT_PARSE_ERROR,
    EXIT_PIPELINE_ERROR,
    EXIT_UNEXPECTED,
    ConfigError,
    RigidPathError,
    TrajectoryParseError,
)
from rigidpath.metrics import write_metrics
from rigidpath.pipeline import run_baseline, run_pipeline
from rigidpath.synth import render_scene, scenario_library, write_scene
from rigidpath.trajcore import read_labels, read_trajectories, write_labels
from rigidpath.utils import export_overlay, format_run_summary, format_scenarios


def init_logging(verbose: bool = False, log_file: bool = True):
    """Initialize logging with appropriate level"""
    log_level = "DEBUG" if verbose else LOG_LEVEL
    logger.remove()

    if log_file:
        ensure_dir_exists(LOG_DIR)
        logger.add(
            str(Path(LOG_DIR) / "rigidpath.log"),
            rotation="10 MB",
            level=log_level,
            backtrace=True,
            diagnose=True,
        )

    # Console logging with level prefix but no other metadata
    logger.add(sys.stderr, level=log_level, format="[{level.name}] {message}")

    if verbose:
        logger.debug("Verbose logging enabled")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rigidpath",
        description="Identify static-background feature trajectories in moving-camera videos",
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Enable verbose logging")
    parser.add_argument("--no-log-file", action="store_true", help="Log to the console only")
    subparsers = parser.add_subparsers(dest="command", help="Commands")

    # Run command
    run_parser = subparsers.add_parser("run", help="Label the trajectories of a file")
    run_parser.add_argument("--input", required=True, help="Trajectory file")
    run_parser.add_argument("--config", help="YAML configuration file")
    run_parser.add_argument("--output", required=True, help="Label file to write")
    run_parser.add_argument("--ground-truth", help="Ground-truth label file")
    run_parser.add_argument("--metrics", help="Metrics JSON to write (needs --ground-truth)")
    run_parser.add_argument("--seed", type=int, help="Random seed, overrides the configuration")
    run_parser.add_argument("--threads", type=int, help="Worker threads, overrides the configuration")
    run_parser.add_argument("--dump-clips", action="store_true", help="Write <output stem>.clips.txt")
    run_parser.add_argument("--dump-candidates", action="store_true", help="Write <output stem>.candidates.txt")
    run_parser.add_argument("--dump-graph", action="store_true", help="Write <output stem>.graph.txt")
    run_parser.add_argument("--dump-stages", action="store_true", help="Write <output stem>.<stage>.labels")
    run_parser.add_argument("--overlay", metavar="DIR", help="Write per-frame label images to DIR")
    run_parser.add_argument("--overlay-format", choices=["ppm", "png"], default="ppm")
    run_parser.add_argument("--baseline", action="store_true",
                            help="Label with one clip-wide consensus motion per clip instead")

    # Synth command
    synth_parser = subparsers.add_parser("synth", help="Generate a synthetic scenario")
    synth_parser.add_argument("--scenario", required=True, help="Scenario name (see 'scenarios')")
    synth_parser.add_argument("--seed", type=int, default=0, help="Random seed")
    synth_parser.add_argument("--density", type=float, default=1.0,
                              help="Scale factor on the scenario point counts")
    synth_parser.add_argument("--out", required=True, help="Output directory")

    # Scenarios command
    subparsers.add_parser("scenarios", help="List the synthetic scenarios")
    return parser


def run_command(args) -> int:
    """Run the pipeline on a trajectory file and write its outputs"""
    config = load_config(args.config).with_overrides(seed=args.seed, threads=args.threads)
    meta, trajs = read_trajectories(args.input)
    truth = read_labels(args.ground_truth) if args.ground_truth else None

    runner = run_baseline if args.baseline else run_pipeline
    result = runner(config, meta, trajs)

    ensure_dir_exists(Path(args.output).parent)
    write_labels(args.output, result.labels)
    logger.info(f"Wrote {len(result.labels)} labels to {args.output}")
    result.write_dumps(args.output, clips=args.dump_clips, candidates=args.dump_candidates,
                       graph=args.dump_graph, stages=args.dump_stages)
    if args.overlay:
        export_overlay(result.labels, trajs, meta, args.overlay, fmt=args.overlay_format)

    report = None
    if truth is not None:
        report = result.report(truth)
        if args.metrics:
            write_metrics(args.metrics, report)

    print(format_run_summary(result.labels, result.counts, result.flags, report))
    return EXIT_ASSUMPTION_FLAGS if result.flags else EXIT_OK


def synth_command(args) -> int:
    """Render a named scenario and write it to a directory"""
    scenarios = scenario_library()
    if args.scenario not in scenarios:
        raise ConfigError(f"Unknown scenario '{args.scenario}', choose from {', '.join(scenarios)}")
    if args.density <= 0:
        raise ConfigError(f"--density must be positive, got {args.density}")
    scenario = scenarios[args.scenario]
    meta, trajs, truth = render_scene(scenario.build(density=args.density), seed=args.seed)
    paths = write_scene(args.out, meta, trajs, truth)
    counts = ", ".join(f"{group} {count}" for group, count in truth.counts().items())
    print(f"{Fore.CYAN}{scenario.name}{Style.RESET_ALL}: {len(trajs)} trajectories ({counts}) "
          f"-> {paths['trajectories'].parent}")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point for the CLI

    Returns:
        Exit code: 0 success, 1 unexpected error, 2 parse or configuration
        error, 3 pipeline error, 4 success with assumption flags raised
    """
    init(autoreset=True)
    parser = build_parser()
    args = parser.parse_args(argv)
    init_logging(args.verbose, log_file=not args.no_log_file)

    if args.command == "run" and args.metrics and not args.ground_truth:
        parser.error("--metrics needs --ground-truth")

    try:
        if args.command == "run":
            return run_command(args)
        if args.command == "synth":
            return synth_command(args)
        if args.command == "scenarios":
            print(format_scenarios(scenario_library()))
            return EXIT_OK
        parser.print_help()
        return EXIT_PARSE_ERROR
    except (TrajectoryParseError, ConfigError) as e:
        logger.error(str(e))
        return EXIT_PARSE_ERROR
    except RigidPathError as e:
        logger.error(f"Pipeline failed: {e}")
        return EXIT_PIPELINE_ERROR
    except Exception as e:
        logger.exception(f"Unhandled exception: {e}")
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
