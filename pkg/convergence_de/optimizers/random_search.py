from typing import List, Optional

import numpy as np

from convergence_de.config import OptimizerConfig
from convergence_de.core import (
    INIT_STREAM,
    SEARCH_STREAM,
    Budget,
    Problem,
    RngStream,
    clamp_to_bounds,
    uniform_genomes,
)
from convergence_de.errors import BudgetExhausted
from convergence_de.state import BeforeEvaluate, RunRecord, RunState


def run_rs(
    problem: Problem,
    config: OptimizerConfig,
    budget: Budget,
    rng: RngStream,
    before_evaluate: Optional[List[BeforeEvaluate]] = None,
    history_stride: Optional[int] = None,
) -> RunRecord:
    """
    Random search: keep the incumbent until a sample is strictly better.

    Samples are uniform over the box by default; with ``rs_neighborhood``
    they are Gaussian around the incumbent (sigma = rs_neighborhood_sigma x
    width). In uniform mode candidates do not depend on the incumbent, so
    they are drawn and evaluated in chunks of ``history_stride``.
    """
    stride = history_stride or config.resolved_population_size(problem.dimension)
    state = RunState(problem, budget, rng.seed, before_evaluate)
    search = rng.child(SEARCH_STREAM)

    try:
        incumbent = uniform_genomes(problem, 1, rng.child(INIT_STREAM))[0]
        incumbent_fitness = float(state.evaluate(incumbent)[0])
    except BudgetExhausted:
        return state.finish("aborted")
    state.record()

    sigma = config.rs_neighborhood_sigma * problem.width
    try:
        while True:
            if config.rs_neighborhood:
                candidate = clamp_to_bounds(incumbent + search.normal(size=problem.dimension) * sigma, problem)
                value = float(state.evaluate(candidate)[0])
                if value < incumbent_fitness:
                    incumbent, incumbent_fitness = candidate, value
                if state.used % stride == 0:
                    state.record()
                continue

            # fill up to the next stride boundary so history points line up
            chunk = stride - state.used % stride
            candidates = uniform_genomes(problem, chunk, search)
            values = state.evaluate(candidates)
            idx = int(np.argmin(values))
            if values[idx] < incumbent_fitness:
                incumbent, incumbent_fitness = candidates[idx], float(values[idx])
            state.record()
    except BudgetExhausted:
        pass
    return state.finish()
