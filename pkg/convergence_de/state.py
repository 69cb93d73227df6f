import logging
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from convergence_de.core import Budget, Problem, evaluate_batch
from convergence_de.errors import BudgetExhausted

BeforeEvaluate = Callable[[Problem, np.ndarray], None]


class RunRecord(BaseModel):
    """
    Outcome of one optimizer run: best point, convergence history and budget use.
    """

    best_genome: List[float]
    best_fitness: float
    history: List[Tuple[int, float]] = Field(default_factory=list)
    evaluations_used: int
    seed: int
    status: Literal["completed", "aborted"] = "completed"

    def to_row(self, algorithm: str, function: str, dimension: int) -> dict:
        return {
            "algorithm": algorithm,
            "function": function,
            "dimension": dimension,
            "seed": self.seed,
            "evaluations": self.evaluations_used,
            "best_fitness": self.best_fitness,
        }


class RunState:
    """
    Single-owner evaluation channel of a run.

    Charges the budget, tracks the best-so-far point over every evaluation and
    collects the (evaluations_used, best_so_far) history.
    """

    def __init__(
        self,
        problem: Problem,
        budget: Budget,
        seed: int,
        before_evaluate: Optional[List[BeforeEvaluate]] = None,
    ):
        self.problem = problem
        self.budget = budget
        self.seed = seed
        self.before_evaluate = list(before_evaluate or [])
        self.best_fitness = float("inf")
        self.best_genome: Optional[np.ndarray] = None
        self.history: List[Tuple[int, float]] = []

    @property
    def remaining(self) -> int:
        return self.budget.remaining

    @property
    def used(self) -> int:
        return self.budget.used

    def evaluate(self, genomes: np.ndarray) -> np.ndarray:
        genomes = np.atleast_2d(genomes)
        for callback in self.before_evaluate:
            callback(self.problem, genomes)

        values = evaluate_batch(self.problem, genomes, self.budget)
        self._update_best(genomes[: len(values)], values)

        if len(values) < len(genomes):
            raise BudgetExhausted(self.budget.used, self.budget.max_evaluations)
        return values

    def _update_best(self, genomes: np.ndarray, values: np.ndarray):
        if len(values) == 0:
            return
        idx = int(np.argmin(values))
        # strict: the earliest evaluated point keeps ties
        if values[idx] < self.best_fitness:
            self.best_fitness = float(values[idx])
            self.best_genome = genomes[idx].copy()

    def record(self):
        """Append a history point unless nothing changed since the last one."""
        if self.budget.used == 0 or self.best_genome is None:
            return
        if self.history and self.history[-1][0] == self.budget.used:
            return
        self.history.append((self.budget.used, self.best_fitness))

    def finish(self, status: str = "completed") -> RunRecord:
        self.record()
        logging.debug(
            f"Run on {self.problem.name} finished ({status}): "
            f"{self.budget.used}/{self.budget.max_evaluations} evaluations, best {self.best_fitness:.6e}"
        )
        return RunRecord(
            best_genome=[] if self.best_genome is None else self.best_genome.tolist(),
            best_fitness=self.best_fitness,
            history=list(self.history),
            evaluations_used=self.budget.used,
            seed=self.seed,
            status=status,
        )
