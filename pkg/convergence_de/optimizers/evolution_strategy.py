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


def es_mutation_sigma(problem: Problem, strength: float) -> np.ndarray:
    """Per-dimension step size: the strength is a fraction of the domain width."""
    return strength * problem.width


def run_es(
    problem: Problem,
    config: OptimizerConfig,
    budget: Budget,
    rng: RngStream,
    before_evaluate: Optional[List[BeforeEvaluate]] = None,
    history_stride: Optional[int] = None,
) -> RunRecord:
    """
    (1+1)-ES: one Gaussian offspring per step, kept when it is not worse than its parent.
    """
    stride = history_stride or config.resolved_population_size(problem.dimension)
    state = RunState(problem, budget, rng.seed, before_evaluate)

    try:
        parent = uniform_genomes(problem, 1, rng.child(INIT_STREAM))[0]
        parent_fitness = float(state.evaluate(parent)[0])
    except BudgetExhausted:
        return state.finish("aborted")
    state.record()

    sigma = es_mutation_sigma(problem, config.es_mutation_strength)
    search = rng.child(SEARCH_STREAM)
    try:
        while True:
            offspring = clamp_to_bounds(parent + search.normal(size=problem.dimension) * sigma, problem)
            offspring_fitness = float(state.evaluate(offspring)[0])
            if offspring_fitness <= parent_fitness:
                parent, parent_fitness = offspring, offspring_fitness
            if state.used % stride == 0:
                state.record()
    except BudgetExhausted:
        pass
    return state.finish()
