from convergence_de.accelerated import run_accelerated_de
from convergence_de.benchmarks import FUNCTION_NAMES, get_problem, suite
from convergence_de.config import AcceleratedConfig, ExperimentConfig, OptimizerConfig, load_config
from convergence_de.core import Budget, Population, Problem, RngStream
from convergence_de.harness import build_report, emit_tables, run_experiment, run_optimizer
from convergence_de.state import RunRecord

__all__ = [
    "AcceleratedConfig",
    "Budget",
    "ExperimentConfig",
    "FUNCTION_NAMES",
    "OptimizerConfig",
    "Population",
    "Problem",
    "RngStream",
    "RunRecord",
    "build_report",
    "emit_tables",
    "get_problem",
    "load_config",
    "run_accelerated_de",
    "run_experiment",
    "run_optimizer",
    "suite",
]
