import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Protocol, Tuple

import numpy as np

from convergence_de.errors import BudgetExhausted, ConfigurationError

# Objective over the last axis: (D,) -> scalar, (n, D) -> (n,)
Objective = Callable[[np.ndarray], np.ndarray]

# Named sub-streams of a run. The search and injection phases draw from
# separate streams so that disabling injection leaves the search draws intact.
INIT_STREAM = 0
SEARCH_STREAM = 1
INJECTION_STREAM = 2


def _frozen_array(values, dimension: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(dimension, float(arr))
    if arr.shape != (dimension,):
        raise ConfigurationError(f"{name} must have length {dimension}, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Problem:
    """
    A box-bounded minimization problem.

    ``objective`` is the raw function value; ``bias`` is added on top so that
    the known optimum (when there is one) evaluates to exactly ``bias``.
    ``base``, ``shift`` and ``rotation`` are descriptive metadata filled in by
    the benchmark factory.
    """

    name: str
    dimension: int
    objective: Objective
    lower_bound: np.ndarray = -100.0
    upper_bound: np.ndarray = 100.0
    bias: float = 0.0
    optimum: Optional[np.ndarray] = None
    base: Optional[str] = None
    shift: Optional[np.ndarray] = None
    rotation: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigurationError(f"Problem {self.name}: dimension must be >= 1, got {self.dimension}")
        lower = _frozen_array(self.lower_bound, self.dimension, "lower_bound")
        upper = _frozen_array(self.upper_bound, self.dimension, "upper_bound")
        if np.any(lower >= upper):
            raise ConfigurationError(f"Problem {self.name}: lower_bound must be < upper_bound in every dimension")
        object.__setattr__(self, "lower_bound", lower)
        object.__setattr__(self, "upper_bound", upper)
        for name in ("optimum", "shift"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, _frozen_array(value, self.dimension, name))
        if self.rotation is not None:
            rotation = np.array(self.rotation, dtype=float)
            rotation.setflags(write=False)
            object.__setattr__(self, "rotation", rotation)

    @property
    def width(self) -> np.ndarray:
        return self.upper_bound - self.lower_bound

    def value(self, genomes: np.ndarray) -> np.ndarray:
        """Objective plus bias, without touching any budget."""
        x = np.asarray(genomes, dtype=float)
        return self.objective(x) + self.bias

    def contains(self, genomes: np.ndarray) -> bool:
        x = np.asarray(genomes, dtype=float)
        return bool(np.all(x >= self.lower_bound) and np.all(x <= self.upper_bound))


@dataclass
class Individual:
    genome: np.ndarray
    fitness: float = float("nan")

    @property
    def evaluated(self) -> bool:
        return not np.isnan(self.fitness)


@dataclass
class Population:
    """
    Genomes stacked row-wise with their cached fitness (NaN = unevaluated).
    """

    genomes: np.ndarray
    fitness: np.ndarray = None

    def __post_init__(self):
        self.genomes = np.atleast_2d(np.asarray(self.genomes, dtype=float))
        if self.fitness is None:
            self.fitness = np.full(len(self.genomes), np.nan)
        self.fitness = np.asarray(self.fitness, dtype=float).reshape(-1)
        if len(self.fitness) != len(self.genomes):
            raise ValueError(f"{len(self.genomes)} genomes but {len(self.fitness)} fitness values")

    @classmethod
    def from_members(cls, members: List[Individual]) -> "Population":
        return cls(
            genomes=np.array([m.genome for m in members], dtype=float),
            fitness=np.array([m.fitness for m in members], dtype=float),
        )

    @property
    def size(self) -> int:
        return len(self.genomes)

    @property
    def evaluated(self) -> bool:
        return not np.any(np.isnan(self.fitness))

    def __len__(self) -> int:
        return self.size

    def __getitem__(self, index: int) -> Individual:
        return Individual(genome=self.genomes[index].copy(), fitness=float(self.fitness[index]))

    def copy(self) -> "Population":
        return Population(genomes=self.genomes.copy(), fitness=self.fitness.copy())


class RngStream:
    """
    Seeded, splittable random stream on the counter-based Philox generator.

    A child stream is fully determined by ``(seed, key)``, so per-trial and
    per-phase streams can be rebuilt anywhere without sharing state.
    """

    def __init__(self, seed: int, key: Tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.key)
        self.generator = np.random.Generator(np.random.Philox(sequence))

    def child(self, *key: int) -> "RngStream":
        return RngStream(self.seed, self.key + tuple(key))

    def uniform(self, low=0.0, high=1.0, size=None) -> np.ndarray:
        return self.generator.uniform(low, high, size)

    def normal(self, loc=0.0, scale=1.0, size=None) -> np.ndarray:
        return self.generator.normal(loc, scale, size)

    def random(self, size=None) -> np.ndarray:
        return self.generator.random(size)

    def integers(self, low, high=None, size=None) -> np.ndarray:
        return self.generator.integers(low, high, size)

    def choice(self, a, size=None, replace: bool = True):
        return self.generator.choice(a, size=size, replace=replace)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, key={self.key})"


@dataclass
class Budget:
    max_evaluations: int
    used: int = 0

    def __post_init__(self):
        if self.max_evaluations < 1:
            raise ConfigurationError(f"max_evaluations must be >= 1, got {self.max_evaluations}")

    @property
    def remaining(self) -> int:
        return self.max_evaluations - self.used

    @property
    def exhausted(self) -> bool:
        return self.used >= self.max_evaluations


class Evaluator(Protocol):
    def evaluate(self, genomes: np.ndarray) -> np.ndarray: ...


def evaluate(problem: Problem, genome: np.ndarray, budget: Budget) -> float:
    """
    Evaluate one genome, charging one unit of budget.
    """
    if budget.exhausted:
        raise BudgetExhausted(budget.used, budget.max_evaluations)
    budget.used += 1
    return float(problem.value(genome))


def evaluate_batch(problem: Problem, genomes: np.ndarray, budget: Budget) -> np.ndarray:
    """
    Evaluate rows in order until the batch or the budget runs out.

    Returns the values of the rows that fit; the caller compares lengths to
    detect a truncated batch.
    """
    genomes = np.atleast_2d(genomes)
    if budget.exhausted:
        raise BudgetExhausted(budget.used, budget.max_evaluations)
    count = min(len(genomes), budget.remaining)
    values = np.atleast_1d(problem.value(genomes[:count]))
    budget.used += count
    return values


def clamp_to_bounds(genome: np.ndarray, problem: Problem) -> np.ndarray:
    genome = np.asarray(genome, dtype=float)
    if genome.shape[-1] != problem.dimension:
        raise ValueError(f"Genome length {genome.shape[-1]} does not match dimension {problem.dimension}")
    return np.clip(genome, problem.lower_bound, problem.upper_bound)


def best_index(fitness: np.ndarray) -> int:
    if len(fitness) == 0:
        raise ValueError("Cannot pick the best member of an empty population")
    if np.any(np.isnan(fitness)):
        raise ValueError("Population has unevaluated members")
    # argmin returns the first occurrence, which is the stable tie-break
    return int(np.argmin(fitness))


def best_individual(pop: Population) -> Individual:
    return pop[best_index(pop.fitness)]


def uniform_genomes(problem: Problem, size: int, rng: RngStream) -> np.ndarray:
    return rng.uniform(problem.lower_bound, problem.upper_bound, size=(size, problem.dimension))


def init_population(problem: Problem, size: int, rng: RngStream, evaluator: Evaluator) -> Population:
    """
    Draw ``size`` genomes uniformly inside the bounds and evaluate them all.

    Raises ``BudgetExhausted`` when the budget cannot cover the whole
    population; the evaluations that did fit are still charged.
    """
    if size < 1:
        raise ConfigurationError(f"Population size must be >= 1, got {size}")
    genomes = uniform_genomes(problem, size, rng)
    fitness = evaluator.evaluate(genomes)
    logging.debug(f"Initialized population of {size} on {problem.name}, best {np.min(fitness):.6e}")
    return Population(genomes=genomes, fitness=fitness)
