import logging
from typing import List, Optional

import numpy as np
from pydantic import BaseModel

from convergence_de.core import Problem


def check_bounds(problem: Problem, genomes: np.ndarray):
    """
    Before-evaluate callback for test runs: every submitted genome must lie in the box.
    """
    genomes = np.atleast_2d(genomes)
    outside = np.any((genomes < problem.lower_bound) | (genomes > problem.upper_bound), axis=1)
    if np.any(outside):
        row = int(np.argmax(outside))
        raise AssertionError(f"Genome outside bounds submitted to {problem.name}: {genomes[row].tolist()}")


class EstimateRow(BaseModel):
    generation: int
    method: str
    coordinates: List[float]
    fitness: float


class EstimateTrace:
    """
    After-generation callback that collects the estimated point of every generation.
    """

    def __init__(self):
        self.rows: List[EstimateRow] = []

    def __call__(self, generation: int, method: str, coordinates: np.ndarray, fitness: Optional[float]):
        row = EstimateRow(
            generation=generation,
            method=method,
            coordinates=np.asarray(coordinates, dtype=float).tolist(),
            fitness=float("nan") if fitness is None else float(fitness),
        )
        self.rows.append(row)
        logging.debug(f"Generation {generation}: {method} estimate fitness {row.fitness:.6e}")

    def to_rows(self) -> List[dict]:
        rows = []
        for row in self.rows:
            flat = {"generation": row.generation, "method": row.method, "fitness": row.fitness}
            flat.update({f"x{i}": value for i, value in enumerate(row.coordinates)})
            rows.append(flat)
        return rows
