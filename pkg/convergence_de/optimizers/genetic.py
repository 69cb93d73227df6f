import logging
from typing import List, Optional

import numpy as np

from convergence_de.config import OptimizerConfig
from convergence_de.core import (
    INIT_STREAM,
    SEARCH_STREAM,
    Budget,
    Population,
    Problem,
    RngStream,
    best_index,
    clamp_to_bounds,
    init_population,
)
from convergence_de.errors import BudgetExhausted, ConfigurationError
from convergence_de.state import BeforeEvaluate, RunRecord, RunState

TOURNAMENT_SIZE = 2


def tournament_select(fitness: np.ndarray, count: int, rng: RngStream, size: int = TOURNAMENT_SIZE) -> np.ndarray:
    """Indices of ``count`` tournament winners; the first contender wins ties."""
    contenders = rng.integers(0, len(fitness), size=(count, size))
    winners = np.argmin(fitness[contenders], axis=1)
    return contenders[np.arange(count), winners]


def uniform_crossover(first: np.ndarray, second: np.ndarray, rate: float, rng: RngStream) -> np.ndarray:
    """
    With probability ``rate`` a pair is crossed, each gene coming from either parent
    with probability 0.5; otherwise the child copies the first parent.
    """
    crossed = rng.random(len(first)) < rate
    mix = rng.random(first.shape) < 0.5
    return np.where(crossed[:, None] & mix, second, first)


def gaussian_mutation(genomes: np.ndarray, rate: float, sigma: np.ndarray, rng: RngStream) -> np.ndarray:
    mask = rng.random(genomes.shape) < rate
    noise = rng.normal(size=genomes.shape) * sigma
    return np.where(mask, genomes + noise, genomes)


def ga_offspring(pop: Population, problem: Problem, config: OptimizerConfig, rng: RngStream) -> np.ndarray:
    count = pop.size - 1
    first = pop.genomes[tournament_select(pop.fitness, count, rng)]
    second = pop.genomes[tournament_select(pop.fitness, count, rng)]
    children = uniform_crossover(first, second, config.ga_crossover_rate, rng)
    sigma = config.ga_mutation_sigma * problem.width
    return clamp_to_bounds(gaussian_mutation(children, config.ga_mutation_rate, sigma, rng), problem)


def ga_generation(
    pop: Population, problem: Problem, config: OptimizerConfig, rng: RngStream, state: RunState
) -> Population:
    """The best member carried over unchanged, followed by PS - 1 evaluated offspring."""
    children = ga_offspring(pop, problem, config, rng)
    child_fitness = state.evaluate(children)
    elite = best_index(pop.fitness)
    return Population(
        genomes=np.vstack([pop.genomes[elite], children]),
        fitness=np.concatenate([[pop.fitness[elite]], child_fitness]),
    )


def run_ga(
    problem: Problem,
    config: OptimizerConfig,
    budget: Budget,
    rng: RngStream,
    before_evaluate: Optional[List[BeforeEvaluate]] = None,
) -> RunRecord:
    """
    Generational elitist GA: the best member is carried over unchanged and the
    other PS - 1 slots are refilled with offspring every generation.
    """
    size = config.resolved_population_size(problem.dimension)
    if size < 2:
        raise ConfigurationError(f"GA needs population_size >= 2, got {size}")
    state = RunState(problem, budget, rng.seed, before_evaluate)

    try:
        pop = init_population(problem, size, rng.child(INIT_STREAM), state)
    except BudgetExhausted:
        return state.finish("aborted")
    state.record()

    search = rng.child(SEARCH_STREAM)
    try:
        while True:
            pop = ga_generation(pop, problem, config, search, state)
            state.record()
            logging.debug(f"GA {problem.name}: best {state.best_fitness:.6e}")
    except BudgetExhausted:
        pass
    return state.finish()
