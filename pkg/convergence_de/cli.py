import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

import yaml
from dotenv import load_dotenv

from convergence_de.benchmarks import FUNCTION_NAMES, suite_manifest
from convergence_de.config import ExperimentConfig, load_config
from convergence_de.errors import ConfigurationError
from convergence_de.harness import build_report, emit_tables, load_histories, load_results, run_experiment
from convergence_de.plotting import emit_convergence_plot

ENV_PATH = Path.cwd() / ".env"

EXIT_CONFIGURATION = 2


def _env_jobs() -> int:
    value = os.getenv("CONVERGENCE_DE_JOBS")
    if not value:
        return 1
    try:
        jobs = int(value)
    except ValueError:
        raise ValueError(f"CONVERGENCE_DE_JOBS must be a positive integer, got '{value}'")
    if jobs < 1:
        raise ValueError(f"CONVERGENCE_DE_JOBS must be a positive integer, got '{value}'")
    return jobs


def _env_log_level() -> int:
    name = os.getenv("CONVERGENCE_DE_LOG_LEVEL", "INFO").upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        raise ValueError(f"CONVERGENCE_DE_LOG_LEVEL is not a logging level: '{name}'")
    return level


def _split(value: Optional[str]) -> Optional[List[str]]:
    if not value:
        return None
    return [item.strip() for item in value.split(",") if item.strip()]


def cmd_run(args) -> int:
    config = load_config(args.config) if args.config else ExperimentConfig()
    dimensions = _split(args.dimensions)
    output_dir = run_experiment(
        config,
        output_dir=args.output,
        jobs=args.jobs or _env_jobs(),
        functions=_split(args.functions),
        dimensions=[int(d) for d in dimensions] if dimensions else None,
        algorithms=_split(args.algorithms),
        overwrite=args.overwrite,
    )
    print(output_dir)
    return 0


def cmd_report(args) -> int:
    results, failures = load_results(args.results)
    report = build_report(results, failures)
    output_dir = Path(args.output) if args.output else Path(args.results) / "tables"
    formats = ["csv", "text"] if args.format == "both" else [args.format]
    for fmt in formats:
        for path in emit_tables(report, output_dir, fmt):
            print(path)
    return 0


def cmd_plot(args) -> int:
    results, _ = load_results(args.results)
    if args.all:
        cells = sorted({(f, int(d)) for f, d in zip(results["function"], results["dimension"])},
                       key=lambda cell: (cell[1], FUNCTION_NAMES.index(cell[0]) if cell[0] in FUNCTION_NAMES else 0))
    elif args.function and args.dimension:
        cells = [(args.function, args.dimension)]
    else:
        raise ConfigurationError("plot needs a function and a dimension, or --all")

    output_dir = Path(args.output) if args.output else Path(args.results) / "plots"
    for function, dimension in cells:
        histories = load_histories(args.results, results, function, dimension)
        plot = emit_convergence_plot(histories, function, dimension, output_dir)
        if plot is not None:
            print(plot.figure)
    return 0


def cmd_list_functions(args) -> int:
    manifest = suite_manifest(args.dimension, args.master_seed)
    if args.verbose:
        print(yaml.safe_dump(manifest, sort_keys=False))
        return 0
    for entry in manifest:
        rotated = "rotated" if entry["rotated"] else "plain"
        print(f"{entry['name']:>4}  {entry['base']:<30} {rotated:<8} bias {entry['bias']:+.0f}")
    return 0


def cmd_validate_config(args) -> int:
    config = load_config(args.config)
    print(config.to_yaml())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convergence_de",
        description="Accelerated differential evolution experiments on the shifted/rotated benchmark suite.",
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    run = verbs.add_parser("run", help="Run a seeded multi-trial experiment")
    run.add_argument("--config", help="YAML experiment file (defaults apply when omitted)")
    run.add_argument("--output", help="Results directory (overrides output_dir)")
    run.add_argument("--jobs", type=int, help="Worker processes (default: CONVERGENCE_DE_JOBS or 1)")
    run.add_argument("--functions", help="Comma-separated subset of functions, e.g. f1,f8")
    run.add_argument("--dimensions", help="Comma-separated subset of dimensions")
    run.add_argument("--algorithms", help="Comma-separated subset of algorithm labels")
    run.add_argument("--overwrite", action="store_true", help="Reuse a non-empty results directory")
    run.set_defaults(handler=cmd_run)

    report = verbs.add_parser("report", help="Summary and significance tables from a results directory")
    report.add_argument("results")
    report.add_argument("--output", help="Tables directory (default: <results>/tables)")
    report.add_argument("--format", choices=["csv", "text", "aligned-text", "both"], default="both")
    report.set_defaults(handler=cmd_report)

    plot = verbs.add_parser("plot", help="Convergence plot of one (function, dimension) cell")
    plot.add_argument("results")
    plot.add_argument("function", nargs="?")
    plot.add_argument("dimension", nargs="?", type=int)
    plot.add_argument("--all", action="store_true", help="Plot every cell in the results")
    plot.add_argument("--output", help="Plot directory (default: <results>/plots)")
    plot.set_defaults(handler=cmd_plot)

    functions = verbs.add_parser("list-functions", help="Print the benchmark suite")
    functions.add_argument("--dimension", type=int, default=2)
    functions.add_argument("--master-seed", type=int, default=0)
    functions.add_argument("--verbose", action="store_true", help="Include shifts as YAML")
    functions.set_defaults(handler=cmd_list_functions)

    validate = verbs.add_parser("validate-config", help="Validate a YAML experiment file and print it resolved")
    validate.add_argument("config")
    validate.set_defaults(handler=cmd_validate_config)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv(dotenv_path=ENV_PATH)
    logging.basicConfig(level=_env_log_level(), format="%(asctime)s %(levelname)s %(message)s")

    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigurationError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIGURATION
