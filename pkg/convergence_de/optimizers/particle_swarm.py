import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

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
    init_population,
)
from convergence_de.errors import BudgetExhausted
from convergence_de.state import BeforeEvaluate, RunRecord, RunState


def pso_update(
    position: np.ndarray,
    velocity: np.ndarray,
    pbest: np.ndarray,
    gbest: np.ndarray,
    w: float,
    c1: float,
    c2: float,
    rng: RngStream,
    v_max: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    r1: Optional[np.ndarray] = None,
    r2: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Inertia-weight update with per-dimension r1, r2.

    v' = w v + c1 r1 (pbest - x) + c2 r2 (gbest - x), clipped to +-v_max;
    x' = x + v', clipped to the bounds. Works on one particle or a swarm.
    """
    position = np.asarray(position, dtype=float)
    if r1 is None:
        r1 = rng.random(position.shape)
    if r2 is None:
        r2 = rng.random(position.shape)
    new_velocity = w * velocity + c1 * r1 * (pbest - position) + c2 * r2 * (gbest - position)
    new_velocity = np.clip(new_velocity, -v_max, v_max)
    new_position = np.clip(position + new_velocity, lower, upper)
    return new_position, new_velocity


@dataclass
class Swarm:
    positions: np.ndarray
    velocities: np.ndarray
    pbest: Population

    @property
    def gbest(self) -> int:
        return best_index(self.pbest.fitness)


def pso_step(swarm: Swarm, problem: Problem, config: OptimizerConfig, rng: RngStream, state: RunState) -> Swarm:
    """Move every particle once; pbest moves on strict improvement."""
    positions, velocities = pso_update(
        swarm.positions, swarm.velocities, swarm.pbest.genomes, swarm.pbest.genomes[swarm.gbest],
        config.pso_inertia, config.pso_c1, config.pso_c2, rng,
        config.pso_vmax_fraction * problem.width, problem.lower_bound, problem.upper_bound,
    )
    fitness = state.evaluate(positions)
    improved = fitness < swarm.pbest.fitness
    pbest = swarm.pbest.copy()
    pbest.genomes[improved] = positions[improved]
    pbest.fitness[improved] = fitness[improved]
    return Swarm(positions=positions, velocities=velocities, pbest=pbest)


def run_pso(
    problem: Problem,
    config: OptimizerConfig,
    budget: Budget,
    rng: RngStream,
    before_evaluate: Optional[List[BeforeEvaluate]] = None,
) -> RunRecord:
    """
    Global-best PSO. Velocities start at zero; pbest moves on strict improvement.
    """
    size = config.resolved_population_size(problem.dimension)
    state = RunState(problem, budget, rng.seed, before_evaluate)

    try:
        initial = init_population(problem, size, rng.child(INIT_STREAM), state)
    except BudgetExhausted:
        return state.finish("aborted")
    state.record()

    swarm = Swarm(positions=initial.genomes.copy(), velocities=np.zeros_like(initial.genomes), pbest=initial.copy())

    search = rng.child(SEARCH_STREAM)
    try:
        while True:
            swarm = pso_step(swarm, problem, config, search, state)
            state.record()
            logging.debug(f"PSO {problem.name}: gbest {swarm.pbest.fitness[swarm.gbest]:.6e}")
    except BudgetExhausted:
        pass
    return state.finish()
