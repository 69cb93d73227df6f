import asyncio
import itertools
import json
import logging
import re
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import aiofiles
import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from convergence_de.accelerated import run_accelerated_de
from convergence_de.benchmarks import FUNCTION_NAMES, get_problem, suite_manifest
from convergence_de.callbacks import EstimateTrace, check_bounds
from convergence_de.config import AcceleratedConfig, AlgorithmConfig, ExperimentConfig
from convergence_de.core import Budget, Problem, RngStream
from convergence_de.errors import ConfigurationError
from convergence_de.optimizers import run_de, run_es, run_ga, run_pso, run_rs
from convergence_de.state import BeforeEvaluate, RunRecord
from convergence_de.stats import (
    ASCII_SYMBOLS,
    SampleGroup,
    TestResult,
    better_group,
    holm_adjust,
    kruskal_wallis,
    mann_whitney_u,
    render_significance,
)

RESULT_COLUMNS = ["algorithm", "function", "dimension", "seed", "evaluations", "best_fitness"]
FAILURE_COLUMNS = ["algorithm", "function", "dimension", "seed", "trial", "status", "message"]

RESULTS_FILE = "results.csv"
FAILURES_FILE = "failures.csv"

BASELINE_RUNNERS = {"RS": run_rs, "GA": run_ga, "DE": run_de, "ES": run_es, "PSO": run_pso}
STRIDED_RUNNERS = {"RS", "ES"}


def run_optimizer(
    problem: Problem,
    config: AlgorithmConfig,
    budget: Budget,
    rng: RngStream,
    before_evaluate: Optional[List[BeforeEvaluate]] = None,
    history_stride: Optional[int] = None,
    on_estimate=None,
) -> RunRecord:
    if isinstance(config, AcceleratedConfig):
        return run_accelerated_de(problem, config, budget, rng, before_evaluate, on_estimate)
    runner = BASELINE_RUNNERS.get(config.algorithm)
    if runner is None:
        raise ConfigurationError(f"Unknown algorithm '{config.algorithm}'")
    if config.algorithm in STRIDED_RUNNERS:
        return runner(problem, config, budget, rng, before_evaluate, history_stride)
    return runner(problem, config, budget, rng, before_evaluate)


def derive_trial_seed(master_seed: int, dimension: int, function_index: int, trial: int) -> int:
    """
    64-bit seed shared by every algorithm at (dimension, function, trial), so trials are paired.
    """
    sequence = np.random.SeedSequence(master_seed, spawn_key=(dimension, function_index, trial))
    high, low = sequence.generate_state(2, np.uint32)
    return (int(high) << 32) | int(low)


def slugify(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", label).strip("-")


def cell_path(root: Path, kind: str, algorithm: str, function: str, dimension: int, seed: int) -> Path:
    return Path(root) / kind / function / f"D{dimension}" / f"{slugify(algorithm)}__seed{seed}.csv"


class RunTask(BaseModel):
    label: str
    algorithm_index: int
    config: AlgorithmConfig
    function: str
    function_index: int
    dimension: int
    trial: int
    seed: int
    master_seed: int
    max_evaluations: int
    history_stride: Optional[int] = None
    log_estimates: bool = False
    guard_bounds: bool = False

    @property
    def sort_key(self) -> Tuple[int, int, int, int]:
        return (self.dimension, self.function_index, self.algorithm_index, self.trial)


class RunOutcome(BaseModel):
    task: RunTask
    record: Optional[RunRecord] = None
    error: Optional[Dict[str, str]] = None
    estimates: List[dict] = Field(default_factory=list)
    elapsed: float = 0.0


def execute_run(task: RunTask) -> RunOutcome:
    """
    One seeded run. Any exception becomes a failed outcome instead of propagating.
    """
    start = time.time()
    trace = EstimateTrace() if task.log_estimates else None
    try:
        problem = get_problem(task.function, task.dimension, task.master_seed)
        record = run_optimizer(
            problem,
            task.config,
            Budget(task.max_evaluations),
            RngStream(task.seed),
            before_evaluate=[check_bounds] if task.guard_bounds else None,
            history_stride=task.history_stride,
            on_estimate=trace,
        )
    except Exception as e:
        logging.error(f"Run {task.label}/{task.function}/D{task.dimension}/trial {task.trial} failed: {e}")
        return RunOutcome(task=task, error={"status": "error", "message": str(e)}, elapsed=time.time() - start)
    return RunOutcome(
        task=task,
        record=record,
        estimates=trace.to_rows() if trace is not None else [],
        elapsed=time.time() - start,
    )


def plan_runs(
    config: ExperimentConfig,
    functions: Optional[Sequence[str]] = None,
    dimensions: Optional[Sequence[int]] = None,
    algorithms: Optional[Sequence[str]] = None,
) -> List[RunTask]:
    """Cartesian (dimension, function, algorithm, trial) plan, optionally filtered to a subset of cells."""
    for name in algorithms or []:
        if name not in config.algorithms:
            raise ConfigurationError(f"Unknown algorithm filter '{name}'. Configured: {list(config.algorithms)}")
    for name in functions or []:
        if name not in config.functions:
            raise ConfigurationError(f"Unknown function filter '{name}'. Configured: {config.functions}")

    tasks = []
    for dimension in config.dimensions:
        if dimensions and dimension not in dimensions:
            continue
        for function in config.functions:
            if functions and function not in functions:
                continue
            function_index = FUNCTION_NAMES.index(function)
            for algorithm_index, (label, algorithm) in enumerate(config.algorithms.items()):
                if algorithms and label not in algorithms:
                    continue
                for trial in range(config.trials):
                    tasks.append(RunTask(
                        label=label,
                        algorithm_index=algorithm_index,
                        config=algorithm,
                        function=function,
                        function_index=function_index,
                        dimension=dimension,
                        trial=trial,
                        seed=derive_trial_seed(config.master_seed, dimension, function_index, trial),
                        master_seed=config.master_seed,
                        max_evaluations=config.budget(dimension),
                        history_stride=config.history_stride,
                        log_estimates=config.log_estimates and isinstance(algorithm, AcceleratedConfig),
                        guard_bounds=config.guard_bounds,
                    ))
    return tasks


def prepare_output_dir(path: Path, overwrite: bool = False) -> Path:
    """
    A fresh directory for the results; a non-empty target is only reused with ``overwrite``.
    """
    path = Path(path)
    if path.exists() and any(path.iterdir()) and not overwrite:
        fresh = path / datetime.now().strftime("run-%Y%m%d-%H%M%S")
        logging.warning(f"{path} is not empty; writing results to {fresh}")
        path = fresh
    path.mkdir(parents=True, exist_ok=True)
    return path


async def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    async with aiofiles.open(path, "w", encoding="utf-8") as f:
        await f.write(text)


def _frame_csv(rows: List[dict], columns: List[str]) -> str:
    return pd.DataFrame(rows, columns=columns).to_csv(index=False)


def _aborted_error(outcome: RunOutcome) -> Dict[str, str]:
    return {
        "status": outcome.record.status,
        "message": f"budget of {outcome.task.max_evaluations} evaluations cannot cover the initial population",
    }


async def persist_outcomes(
    output_dir: Path, config: ExperimentConfig, outcomes: List[RunOutcome], save_history: bool = True
):
    completed = [o for o in outcomes if o.record is not None and o.record.status == "completed"]
    failed = [o for o in outcomes if o.record is None or o.record.status != "completed"]

    results = [o.record.to_row(o.task.label, o.task.function, o.task.dimension) for o in completed]
    failures = [{
        "algorithm": o.task.label,
        "function": o.task.function,
        "dimension": o.task.dimension,
        "seed": o.task.seed,
        "trial": o.task.trial,
        **(o.error or _aborted_error(o)),
    } for o in failed]

    writes = [
        _write_text(output_dir / RESULTS_FILE, _frame_csv(results, RESULT_COLUMNS)),
        _write_text(output_dir / FAILURES_FILE, _frame_csv(failures, FAILURE_COLUMNS)),
        _write_text(output_dir / "config.resolved.yaml", config.to_yaml()),
        _write_text(
            output_dir / "suite_manifest.json",
            json.dumps({str(d): suite_manifest(d, config.master_seed) for d in config.dimensions}, indent=2),
        ),
    ]
    for outcome in completed:
        task = outcome.task
        if save_history:
            path = cell_path(output_dir, "histories", task.label, task.function, task.dimension, task.seed)
            writes.append(_write_text(path, _frame_csv(
                [{"evaluations": e, "best_so_far": b} for e, b in outcome.record.history],
                ["evaluations", "best_so_far"],
            )))
        if outcome.estimates:
            path = cell_path(output_dir, "estimates", task.label, task.function, task.dimension, task.seed)
            writes.append(_write_text(path, pd.DataFrame(outcome.estimates).to_csv(index=False)))
    await asyncio.gather(*writes)
    logging.info(f"Wrote {len(results)} result rows and {len(failures)} failures to {output_dir}")


async def run_experiment_async(
    config: ExperimentConfig,
    output_dir: Optional[Path] = None,
    jobs: int = 1,
    functions: Optional[Sequence[str]] = None,
    dimensions: Optional[Sequence[int]] = None,
    algorithms: Optional[Sequence[str]] = None,
    overwrite: bool = False,
) -> Path:
    tasks = plan_runs(config, functions, dimensions, algorithms)
    output_dir = prepare_output_dir(Path(output_dir or config.output_dir), overwrite)
    logging.info(f"Running {len(tasks)} runs with {jobs} job(s) into {output_dir}")
    start = time.time()

    if jobs > 1:
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(await asyncio.gather(*[loop.run_in_executor(pool, execute_run, t) for t in tasks]))
    else:
        outcomes = []
        for task in tasks:
            outcomes.append(execute_run(task))
            if len(outcomes) % 100 == 0:
                logging.info(f"Completed {len(outcomes)}/{len(tasks)} runs")

    # merge order is the cell key, never completion order
    outcomes.sort(key=lambda o: o.task.sort_key)
    logging.info(f"Finished {len(outcomes)} runs in {time.time() - start:.2f} seconds")
    await persist_outcomes(output_dir, config, outcomes, config.save_history)
    return output_dir


def run_experiment(config: ExperimentConfig, **kwargs) -> Path:
    return asyncio.run(run_experiment_async(config, **kwargs))


def load_results(results_dir: Path) -> Tuple[pd.DataFrame, pd.DataFrame]:
    results_dir = Path(results_dir)
    results_path = results_dir / RESULTS_FILE
    if not results_path.exists():
        raise ConfigurationError(f"No {RESULTS_FILE} in {results_dir}")
    results = pd.read_csv(results_path, float_precision="round_trip")
    failures_path = results_dir / FAILURES_FILE
    if failures_path.exists():
        failures = pd.read_csv(failures_path, float_precision="round_trip")
    else:
        failures = pd.DataFrame(columns=FAILURE_COLUMNS)
    return results, failures


class GroupSummary(BaseModel):
    algorithm: str
    n: int
    mean: float
    median: float
    std: float


class PairwiseComparison(BaseModel):
    algorithm_a: str
    algorithm_b: str
    u_statistic: float
    p_value: float
    adjusted_p: float
    symbol: str
    better: Optional[str] = None


class ReportCell(BaseModel):
    function: str
    dimension: int
    summaries: List[GroupSummary]
    kruskal: TestResult
    pairs: List[PairwiseComparison]
    failed_runs: int = 0
    flagged: bool = False


class ComparisonReport(BaseModel):
    algorithms: List[str]
    cells: List[ReportCell]


def _function_order(name: str) -> int:
    return FUNCTION_NAMES.index(name) if name in FUNCTION_NAMES else len(FUNCTION_NAMES)


def build_report(
    results: pd.DataFrame,
    failures: Optional[pd.DataFrame] = None,
    algorithms: Optional[List[str]] = None,
) -> ComparisonReport:
    """
    Per (function, dimension) cell: Kruskal-Wallis over all groups and every
    pairwise Mann-Whitney U, Holm-adjusted within the cell.
    """
    algorithms = algorithms or list(dict.fromkeys(results["algorithm"]))
    if len(algorithms) < 2:
        raise ValueError(f"A comparison needs at least 2 algorithms, got {algorithms}")

    cells = []
    keys = sorted(
        {(f, int(d)) for f, d in zip(results["function"], results["dimension"])},
        key=lambda key: (key[1], _function_order(key[0])),
    )
    for function, dimension in keys:
        cell = results[(results["function"] == function) & (results["dimension"] == dimension)]
        groups = []
        for label in algorithms:
            values = cell.loc[cell["algorithm"] == label, "best_fitness"].astype(float).tolist()
            if values:
                groups.append(SampleGroup(label=label, values=values))
        if len(groups) < 2:
            logging.warning(f"Skipping {function}/D{dimension}: fewer than 2 algorithms with results")
            continue

        failed = 0
        if failures is not None and len(failures):
            failed = int(((failures["function"] == function) & (failures["dimension"] == dimension)).sum())

        summaries = [GroupSummary(
            algorithm=g.label,
            n=len(g.values),
            mean=g.mean,
            median=g.median,
            std=float(np.std(g.values, ddof=1)) if len(g.values) > 1 else 0.0,
        ) for g in groups]

        pairs = list(itertools.combinations(groups, 2))
        tests = [mann_whitney_u(a, b) for a, b in pairs]
        adjusted = holm_adjust([t.p_value for t in tests])
        comparisons = []
        for (a, b), test, adj in zip(pairs, tests, adjusted):
            symbol = render_significance(adj, better_group(a, b))
            comparisons.append(PairwiseComparison(
                algorithm_a=a.label,
                algorithm_b=b.label,
                u_statistic=test.statistic,
                p_value=test.p_value,
                adjusted_p=adj,
                symbol=symbol.symbol,
                better=symbol.better,
            ))

        sizes = {s.n for s in summaries}
        cells.append(ReportCell(
            function=function,
            dimension=dimension,
            summaries=summaries,
            kruskal=kruskal_wallis(groups),
            pairs=comparisons,
            failed_runs=failed,
            flagged=failed > 0 or len(sizes) > 1 or len(groups) < len(algorithms),
        ))
    return ComparisonReport(algorithms=algorithms, cells=cells)


def summary_frame(report: ComparisonReport) -> pd.DataFrame:
    rows = []
    for cell in report.cells:
        for s in cell.summaries:
            rows.append({
                "function": cell.function,
                "dimension": cell.dimension,
                "algorithm": s.algorithm,
                "n": s.n,
                "mean": s.mean,
                "median": s.median,
                "std": s.std,
                "kruskal_h": cell.kruskal.statistic,
                "kruskal_p": cell.kruskal.p_value,
                "flagged": cell.flagged,
            })
    return pd.DataFrame(rows, columns=[
        "function", "dimension", "algorithm", "n", "mean", "median", "std", "kruskal_h", "kruskal_p", "flagged",
    ])


def significance_frame(report: ComparisonReport, ascii_symbols: bool = False) -> pd.DataFrame:
    rows = []
    for cell in report.cells:
        for pair in cell.pairs:
            rows.append({
                "function": cell.function,
                "dimension": cell.dimension,
                "algorithm_a": pair.algorithm_a,
                "algorithm_b": pair.algorithm_b,
                "u_statistic": pair.u_statistic,
                "p_value": pair.p_value,
                "adjusted_p": pair.adjusted_p,
                "symbol": ASCII_SYMBOLS[pair.symbol] if ascii_symbols else pair.symbol,
                "better": pair.better or "",
            })
    return pd.DataFrame(rows, columns=[
        "function", "dimension", "algorithm_a", "algorithm_b", "u_statistic", "p_value", "adjusted_p", "symbol", "better",
    ])


def wide_summary_frame(report: ComparisonReport) -> pd.DataFrame:
    """One row per cell, one "mean ± std" column per algorithm."""
    rows = []
    for cell in report.cells:
        row = {"function": cell.function, "dimension": cell.dimension}
        by_algorithm = {s.algorithm: s for s in cell.summaries}
        for label in report.algorithms:
            s = by_algorithm.get(label)
            row[label] = f"{s.mean:.4e} ± {s.std:.2e}" if s else "n/a"
        row["flagged"] = "yes" if cell.flagged else ""
        rows.append(row)
    return pd.DataFrame(rows, columns=["function", "dimension", *report.algorithms, "flagged"])


def emit_tables(report: ComparisonReport, output_dir: Path, format: str = "csv") -> List[Path]:
    """
    Write the summary and significance tables.

    csv: summary.csv (long, full precision) and significance.csv (ASCII
    symbols >>, >, ~). text: summary.txt (one column per algorithm) and
    significance.txt (symbols ≫, >, ≈).
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    if format == "csv":
        paths = [output_dir / "summary.csv", output_dir / "significance.csv"]
        summary_frame(report).to_csv(paths[0], index=False)
        significance_frame(report, ascii_symbols=True).to_csv(paths[1], index=False)
    elif format in ("text", "aligned-text"):
        paths = [output_dir / "summary.txt", output_dir / "significance.txt"]
        paths[0].write_text(wide_summary_frame(report).to_string(index=False) + "\n", encoding="utf-8")
        paths[1].write_text(significance_frame(report).to_string(index=False) + "\n", encoding="utf-8")
    else:
        raise ConfigurationError(f"Unknown table format '{format}'. Use 'csv' or 'aligned-text'")
    logging.info(f"Wrote {format} tables: {[str(p) for p in paths]}")
    return paths


def load_histories(
    results_dir: Path, results: pd.DataFrame, function: str, dimension: int
) -> Dict[str, List[List[Tuple[int, float]]]]:
    histories: Dict[str, List[List[Tuple[int, float]]]] = {}
    cell = results[(results["function"] == function) & (results["dimension"] == dimension)]
    for algorithm, seed in zip(cell["algorithm"], cell["seed"]):
        path = cell_path(results_dir, "histories", algorithm, function, dimension, int(seed))
        if not path.exists():
            logging.warning(f"Missing history file {path}")
            continue
        frame = pd.read_csv(path, float_precision="round_trip")
        histories.setdefault(algorithm, []).append(
            list(zip(frame["evaluations"].astype(int), frame["best_so_far"].astype(float)))
        )
    return histories
