import logging
from typing import Callable, List, Optional

import numpy as np

from convergence_de.config import AcceleratedConfig
from convergence_de.core import (
    INIT_STREAM,
    INJECTION_STREAM,
    SEARCH_STREAM,
    Budget,
    Individual,
    Population,
    Problem,
    RngStream,
    init_population,
)
from convergence_de.errors import BudgetExhausted, ConfigurationError, DegenerateDirectionsError
from convergence_de.estimation import (
    EstimatedPoint,
    analytical_estimate,
    average_strategy,
    elite_count,
    gaussian_sample,
    inject,
    moving_vectors,
    weighted_average_strategy,
)
from convergence_de.optimizers.differential import Generation, check_de_population, de_generation
from convergence_de.state import BeforeEvaluate, RunRecord, RunState

# (generation, method, coordinates, fitness)
OnEstimate = Callable[[int, str, np.ndarray, Optional[float]], None]


def injection_count(config: AcceleratedConfig, population_size: int) -> int:
    if config.injection_count is not None:
        return config.injection_count
    return elite_count(population_size, config.elite_rate)


def estimate_point(generation: Generation, config: AcceleratedConfig) -> EstimatedPoint:
    pop = generation.population
    if config.variant == "P1":
        return average_strategy(pop, config.elite_rate)
    if config.variant == "P2":
        return weighted_average_strategy(pop, config.elite_rate, config.was_mode)

    improved = generation.improved
    vectors = moving_vectors(generation.parents.genomes[improved], generation.trials.genomes[improved])
    try:
        return analytical_estimate(vectors)
    except DegenerateDirectionsError as e:
        logging.warning(f"Analytical estimate unavailable ({e}); falling back to elite averaging")
        return average_strategy(pop, config.elite_rate)


def run_accelerated_de(
    problem: Problem,
    config: AcceleratedConfig,
    budget: Budget,
    rng: RngStream,
    before_evaluate: Optional[List[BeforeEvaluate]] = None,
    on_estimate: Optional[OnEstimate] = None,
) -> RunRecord:
    """
    DE followed, every generation, by estimation and Gaussian-sampling injection.

    The DE phase draws from the same sub-streams as plain DE, and injection
    from its own, so k = 0 replays plain DE exactly. Injection (k + 1
    evaluations) is skipped when the remaining budget cannot cover it.
    """
    size = config.resolved_population_size(problem.dimension)
    check_de_population(size)
    k = injection_count(config, size)
    if k >= size:
        raise ConfigurationError(f"injection_count must be smaller than the population ({size}), got {k}")

    state = RunState(problem, budget, rng.seed, before_evaluate)
    try:
        pop = init_population(problem, size, rng.child(INIT_STREAM), state)
    except BudgetExhausted:
        logging.warning(f"{config.variant} on {problem.name}: budget cannot cover the initial population")
        return state.finish("aborted")
    state.record()

    search = rng.child(SEARCH_STREAM)
    sampler = rng.child(INJECTION_STREAM)
    generation_index = 0
    try:
        while True:
            generation = de_generation(pop, problem, config, search, state)
            pop = generation.population
            generation_index += 1

            if k > 0 and state.remaining >= k + 1:
                point = estimate_point(generation, config).clamped(problem)
                center = Individual(genome=point.coordinates, fitness=float(state.evaluate(point.coordinates)[0]))
                genomes = gaussian_sample(point, config.sigma, k, problem, sampler)
                samples = Population(genomes=genomes, fitness=state.evaluate(genomes))
                pop = inject(pop, center, samples, k)
                if on_estimate is not None:
                    on_estimate(generation_index, point.method, point.coordinates, center.fitness)

            state.record()
            logging.debug(f"{config.variant} {problem.name} generation {generation_index}: best {state.best_fitness:.6e}")
    except BudgetExhausted:
        pass
    return state.finish()
