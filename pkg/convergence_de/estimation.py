"""
Convergence-point estimation and the Gaussian-sampling injection operator.

The elite estimators (averaging and weighted averaging) only look at the
best fraction of a population. The analytical estimator finds the point
nearest, in the least-squares sense, to the lines traced by moving vectors
(worse parent -> better offspring).
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Literal

import numpy as np

from convergence_de.core import Individual, Population, Problem, RngStream, clamp_to_bounds
from convergence_de.errors import ConfigurationError, DegenerateDirectionsError

MAX_CONDITION = 1e12

WeightMode = Literal["consistent", "literal"]


@dataclass
class EstimatedPoint:
    coordinates: np.ndarray
    method: str
    elite_count: int

    def clamped(self, problem: Problem) -> "EstimatedPoint":
        return EstimatedPoint(clamp_to_bounds(self.coordinates, problem), self.method, self.elite_count)


@dataclass
class MovingVector:
    parent: np.ndarray
    offspring: np.ndarray

    @property
    def direction(self) -> np.ndarray:
        return np.asarray(self.offspring, dtype=float) - np.asarray(self.parent, dtype=float)

    @property
    def unit_direction(self) -> np.ndarray:
        d = self.direction
        return d / np.linalg.norm(d)

    @property
    def is_degenerate(self) -> bool:
        return not np.any(self.direction)


def elite_count(size: int, rate: float) -> int:
    """s = max(1, round(rate x size)), rounding halves up."""
    if not 0 < rate <= 1:
        raise ConfigurationError(f"elite rate must be in (0, 1], got {rate}")
    return min(size, max(1, math.floor(rate * size + 0.5)))


def select_elite(pop: Population, rate: float) -> Population:
    if pop.size == 0:
        raise ValueError("Cannot select an elite from an empty population")
    if not pop.evaluated:
        raise ValueError("Elite selection needs an evaluated population")
    order = np.argsort(pop.fitness, kind="stable")[: elite_count(pop.size, rate)]
    return Population(genomes=pop.genomes[order], fitness=pop.fitness[order])


def average_strategy(pop: Population, rate: float) -> EstimatedPoint:
    elite = select_elite(pop, rate)
    return EstimatedPoint(np.mean(elite.genomes, axis=0), "AS", elite.size)


def elite_weights(fitness: np.ndarray, mode: WeightMode = "consistent") -> np.ndarray:
    """
    Weights of the weighted averaging strategy.

    literal: w_j = f_j / sum(f), only defined for strictly positive fitness.
    consistent: w_j proportional to (f_worst - f_j + eps), so lower fitness weighs more.
    """
    fitness = np.asarray(fitness, dtype=float)
    if mode == "literal":
        if np.any(fitness <= 0):
            raise ConfigurationError(
                "literal weighting (w = f / sum f) needs strictly positive elite fitness; "
                "use the consistent mode for problems with non-positive values"
            )
        return fitness / np.sum(fitness)
    if mode != "consistent":
        raise ConfigurationError(f"Unknown weighting mode '{mode}'")
    worst = np.max(fitness)
    eps = 1e-12 * (1.0 + abs(worst))
    raw = worst - fitness + eps
    return raw / np.sum(raw)


def weighted_average_strategy(pop: Population, rate: float, mode: WeightMode = "consistent") -> EstimatedPoint:
    elite = select_elite(pop, rate)
    if np.all(elite.fitness == elite.fitness[0]):
        # uniform weights: return the plain mean bit for bit
        return EstimatedPoint(np.mean(elite.genomes, axis=0), "WAS", elite.size)
    weights = elite_weights(elite.fitness, mode)
    return EstimatedPoint(weights @ elite.genomes, "WAS", elite.size)


def moving_vectors(parents: np.ndarray, offspring: np.ndarray) -> List[MovingVector]:
    return [MovingVector(parent=p, offspring=o) for p, o in zip(parents, offspring)]


def analytical_estimate(vectors: List[MovingVector]) -> EstimatedPoint:
    """
    X = [sum (I - d d^T)]^-1 [sum (I - d d^T) p] over unit directions d.

    Zero-length vectors are dropped. Raises DegenerateDirectionsError when
    fewer than two vectors remain or the system is singular/ill-conditioned.
    """
    usable = [v for v in vectors if not v.is_degenerate]
    if len(usable) < 2:
        raise DegenerateDirectionsError(f"Need at least 2 non-zero moving vectors, got {len(usable)}")

    dimension = len(usable[0].parent)
    identity = np.eye(dimension)
    A = np.zeros((dimension, dimension))
    b = np.zeros(dimension)
    for vector in usable:
        d = vector.unit_direction
        projector = identity - np.outer(d, d)
        A += projector
        b += projector @ np.asarray(vector.parent, dtype=float)

    condition = np.linalg.cond(A)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise DegenerateDirectionsError(f"Moving-vector system is degenerate (condition number {condition:.3e})")
    try:
        point = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as e:
        raise DegenerateDirectionsError(f"Moving-vector system is singular: {e}") from e
    return EstimatedPoint(point, "analytical", len(usable))


def line_distance_sum(point: np.ndarray, vectors: List[MovingVector]) -> float:
    """Sum of squared distances from ``point`` to each moving-vector line (t at its projection)."""
    total = 0.0
    for vector in vectors:
        if vector.is_degenerate:
            continue
        d = vector.unit_direction
        offset = np.asarray(vector.parent, dtype=float) - point
        residual = offset - (offset @ d) * d
        total += float(residual @ residual)
    return total


def gaussian_sample(
    center: EstimatedPoint, sigma: float, k: int, problem: Problem, rng: RngStream
) -> np.ndarray:
    """k isotropic Gaussian samples around the estimated point, clamped to the box."""
    if k < 1:
        raise ConfigurationError(f"Need at least one Gaussian sample, got k={k}")
    if sigma <= 0:
        raise ConfigurationError(f"sigma must be > 0, got {sigma}")
    samples = center.coordinates + rng.normal(0.0, sigma, size=(k, problem.dimension))
    return clamp_to_bounds(samples, problem)


def inject(offspring_pop: Population, center: Individual, samples: Population, k: int) -> Population:
    """
    Best-k replacement of the k worst members.

    The pool is the k worst members, the estimated point and the k samples.
    The best k of the pool occupy the k worst slots: surviving incumbents keep
    their slot and newcomers fill the vacated ones in fitness order. Ties go to
    incumbents first, then the estimated point.
    """
    size = offspring_pop.size
    if k == 0:
        return offspring_pop.copy()
    if not 0 < k < size:
        raise ConfigurationError(f"Injection count must satisfy 0 < k < population size ({size}), got {k}")
    if not (offspring_pop.evaluated and samples.evaluated and center.evaluated):
        raise ValueError("Injection needs the population, the estimated point and the samples evaluated")

    worst = np.argsort(offspring_pop.fitness, kind="stable")[-k:]
    pool_genomes = np.vstack([offspring_pop.genomes[worst], center.genome[None, :], samples.genomes])
    pool_fitness = np.concatenate([offspring_pop.fitness[worst], [center.fitness], samples.fitness])
    chosen = np.argsort(pool_fitness, kind="stable")[:k]

    kept = chosen[chosen < k]
    newcomers = chosen[chosen >= k]
    vacated = worst[np.setdiff1d(np.arange(k), kept)]

    result = offspring_pop.copy()
    result.genomes[vacated] = pool_genomes[newcomers]
    result.fitness[vacated] = pool_fitness[newcomers]
    logging.debug(f"Injected {len(newcomers)} of {k} candidates into the population")
    return result
