import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from pydantic import BaseModel  # noqa: E402

from convergence_de.benchmarks import FUNCTION_NAMES, SUITE_TABLE  # noqa: E402

History = Sequence[Tuple[int, float]]

CURVE_COLUMNS = ["algorithm", "evaluations", "median", "q25", "q75"]


class ConvergenceCurve(BaseModel):
    algorithm: str
    evaluations: List[int]
    median: List[float]
    q25: List[float]
    q75: List[float]
    runs: int


class PlotOutput(BaseModel):
    figure: Path
    data: Path
    curves: List[ConvergenceCurve]
    log_scale: bool


def step_values(history: History, grid: np.ndarray) -> np.ndarray:
    """
    Best-so-far of one run on ``grid``, carried forward between points.
    Grid values before the first history point take the first value.
    """
    evaluations = np.array([e for e, _ in history], dtype=float)
    best = np.array([b for _, b in history], dtype=float)
    idx = np.searchsorted(evaluations, grid, side="right") - 1
    return best[np.clip(idx, 0, None)]


def aggregate_curve(algorithm: str, histories: List[History]) -> Optional[ConvergenceCurve]:
    histories = [h for h in histories if len(h)]
    if not histories:
        return None
    grid = np.unique(np.concatenate([[e for e, _ in h] for h in histories]).astype(int))
    values = np.vstack([step_values(h, grid) for h in histories])
    return ConvergenceCurve(
        algorithm=algorithm,
        evaluations=grid.tolist(),
        median=np.median(values, axis=0).tolist(),
        q25=np.percentile(values, 25, axis=0).tolist(),
        q75=np.percentile(values, 75, axis=0).tolist(),
        runs=len(histories),
    )


def function_bias(function: str) -> float:
    if function in FUNCTION_NAMES:
        return SUITE_TABLE[FUNCTION_NAMES.index(function)].bias
    return 0.0


def curves_frame(curves: List[ConvergenceCurve]) -> pd.DataFrame:
    rows = []
    for curve in curves:
        for e, m, lo, hi in zip(curve.evaluations, curve.median, curve.q25, curve.q75):
            rows.append({"algorithm": curve.algorithm, "evaluations": e, "median": m, "q25": lo, "q75": hi})
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)


def emit_convergence_plot(
    curves: Dict[str, List[History]],
    function: str,
    dimension: int,
    output_dir: Path = Path("."),
) -> Optional[PlotOutput]:
    """
    Median best-so-far per algorithm with an interquartile band, as SVG plus a CSV of the plotted points.

    The y axis is the log of the gap to the function's bias when every plotted
    gap is positive, raw fitness on a linear axis otherwise.
    """
    aggregated = [aggregate_curve(label, histories) for label, histories in curves.items()]
    aggregated = [c for c in aggregated if c is not None]
    if not aggregated:
        logging.warning(f"No histories for {function}/D{dimension}; skipping plot")
        return None

    bias = function_bias(function)
    gaps = np.concatenate([np.array(c.q25 + c.median + c.q75) - bias for c in aggregated])
    log_scale = bool(np.all(gaps > 0))
    offset = bias if log_scale else 0.0

    fig, ax = plt.subplots(figsize=(8, 5))
    for curve in aggregated:
        x = np.array(curve.evaluations)
        line, = ax.step(x, np.array(curve.median) - offset, where="post", label=f"{curve.algorithm} (n={curve.runs})")
        ax.fill_between(
            x, np.array(curve.q25) - offset, np.array(curve.q75) - offset,
            step="post", alpha=0.2, color=line.get_color(),
        )
    if log_scale:
        ax.set_yscale("log")
        ax.set_ylabel("best-so-far - bias")
    else:
        ax.set_ylabel("best-so-far")
    ax.set_xlabel("function evaluations")
    ax.set_title(f"{function}, D = {dimension}")
    ax.legend()
    ax.grid(True, alpha=0.3)

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    figure = output_dir / f"convergence_{function}_D{dimension}.svg"
    data = output_dir / f"convergence_{function}_D{dimension}.csv"
    fig.savefig(figure, format="svg", bbox_inches="tight")
    plt.close(fig)
    curves_frame(aggregated).to_csv(data, index=False)

    logging.info(f"Saved convergence plot {figure}")
    return PlotOutput(figure=figure, data=data, curves=aggregated, log_scale=log_scale)
