import logging
from dataclasses import dataclass
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

# number of distinct partners each strategy draws besides the target
STRATEGY_PARTNERS = {"rand_1": 3, "best_1": 2, "current_to_best_1": 2}


def draw_distinct_indices(size: int, count: int, rng: RngStream) -> np.ndarray:
    """
    For every target i, ``count`` indices distinct from each other and from i.

    Rows with a collision are redrawn whole, so each row is uniform over the
    valid ordered tuples.
    """
    if size < count + 1:
        raise ConfigurationError(f"Population of {size} is too small to draw {count} distinct partners per member")
    picks = np.empty((size, count), dtype=int)
    pending = np.arange(size)
    while len(pending):
        draw = rng.integers(0, size, size=(len(pending), count))
        ordered = np.sort(np.column_stack([pending, draw]), axis=1)
        ok = np.all(ordered[:, 1:] != ordered[:, :-1], axis=1)
        picks[pending[ok]] = draw[ok]
        pending = pending[~ok]
    return picks


def de_mutation(
    genomes: np.ndarray,
    fitness: np.ndarray,
    strategy: str,
    F: float,
    rng: RngStream,
    indices: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Donor vectors for every member.

    rand/1:            V_i = X_p1 + F (X_p2 - X_p3)
    best/1:            V_i = X_best + F (X_p1 - X_p2)
    current-to-best/1: V_i = X_i + F (X_best - X_i) + F (X_p1 - X_p2)
    """
    if strategy not in STRATEGY_PARTNERS:
        raise ConfigurationError(f"Unknown DE strategy '{strategy}'. Available: {list(STRATEGY_PARTNERS)}")
    genomes = np.asarray(genomes, dtype=float)
    if indices is None:
        indices = draw_distinct_indices(len(genomes), STRATEGY_PARTNERS[strategy], rng)

    p1 = genomes[indices[:, 0]]
    p2 = genomes[indices[:, 1]]
    if strategy == "rand_1":
        p3 = genomes[indices[:, 2]]
        return p1 + F * (p2 - p3)

    best = genomes[best_index(fitness)]
    if strategy == "best_1":
        return best + F * (p1 - p2)
    return genomes + F * (best - genomes) + F * (p1 - p2)


def de_crossover(target: np.ndarray, donor: np.ndarray, CR: float, rng: RngStream) -> np.ndarray:
    """
    Binomial crossover with one forced donor gene per row.
    """
    target = np.asarray(target, dtype=float)
    donor = np.asarray(donor, dtype=float)
    t2, d2 = np.atleast_2d(target), np.atleast_2d(donor)
    rows, dimension = t2.shape
    mask = rng.random((rows, dimension)) < CR
    forced = rng.integers(0, dimension, size=rows)
    mask[np.arange(rows), forced] = True
    return np.where(mask, d2, t2).reshape(target.shape)


def de_selection(target: Population, trial: Population) -> Population:
    """
    One-to-one greedy survival; the trial wins ties.
    """
    if not (target.evaluated and trial.evaluated):
        raise ValueError("Selection needs evaluated target and trial populations")
    survive = trial.fitness <= target.fitness
    return Population(
        genomes=np.where(survive[:, None], trial.genomes, target.genomes),
        fitness=np.where(survive, trial.fitness, target.fitness),
    )


@dataclass
class Generation:
    parents: Population
    trials: Population
    population: Population

    @property
    def improved(self) -> np.ndarray:
        return self.trials.fitness < self.parents.fitness


def de_generation(
    pop: Population, problem: Problem, config: OptimizerConfig, rng: RngStream, state: RunState
) -> Generation:
    donors = de_mutation(pop.genomes, pop.fitness, config.de_strategy, config.de_scale_factor, rng)
    trials = clamp_to_bounds(de_crossover(pop.genomes, donors, config.de_crossover_rate, rng), problem)
    trial_pop = Population(genomes=trials, fitness=state.evaluate(trials))
    return Generation(parents=pop, trials=trial_pop, population=de_selection(pop, trial_pop))


def check_de_population(size: int):
    if size < 4:
        raise ConfigurationError(f"DE needs population_size >= 4, got {size}")


def run_de(
    problem: Problem,
    config: OptimizerConfig,
    budget: Budget,
    rng: RngStream,
    before_evaluate: Optional[List[BeforeEvaluate]] = None,
) -> RunRecord:
    size = config.resolved_population_size(problem.dimension)
    check_de_population(size)
    state = RunState(problem, budget, rng.seed, before_evaluate)

    try:
        pop = init_population(problem, size, rng.child(INIT_STREAM), state)
    except BudgetExhausted:
        logging.warning(f"DE on {problem.name}: budget {budget.max_evaluations} cannot cover the initial population")
        return state.finish("aborted")
    state.record()

    search = rng.child(SEARCH_STREAM)
    generation = 0
    try:
        while True:
            pop = de_generation(pop, problem, config, search, state).population
            generation += 1
            state.record()
            logging.debug(f"DE {problem.name} generation {generation}: best {state.best_fitness:.6e}")
    except BudgetExhausted:
        pass
    return state.finish()
