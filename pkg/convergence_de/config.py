import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from convergence_de.benchmarks import FUNCTION_NAMES
from convergence_de.errors import ConfigurationError

BASELINE_ALGORITHMS = ["RS", "GA", "DE", "ES", "PSO"]
ACCELERATED_ALGORITHMS = ["P1", "P2", "PA"]
ALGORITHM_NAMES = BASELINE_ALGORITHMS + ACCELERATED_ALGORITHMS

DEFAULT_DIMENSIONS = [2, 10, 30]
DEFAULT_TRIALS = 30


class OptimizerConfig(BaseModel):
    """
    Parameters of the baseline optimizers; defaults are the comparison settings.

    ``population_size`` left unset resolves to 50 x D at run time.
    """

    model_config = ConfigDict(extra="forbid")

    algorithm: Literal["RS", "GA", "DE", "ES", "PSO"] = "DE"
    population_size: Optional[int] = Field(default=None, ge=1)

    de_scale_factor: float = Field(default=0.7, gt=0)
    de_crossover_rate: float = Field(default=0.9, ge=0, le=1)
    de_strategy: Literal["rand_1", "best_1", "current_to_best_1"] = "current_to_best_1"

    ga_crossover_rate: float = Field(default=0.5, ge=0, le=1)
    ga_mutation_rate: float = Field(default=0.1, ge=0, le=1)
    ga_mutation_sigma: float = Field(default=0.05, ge=0)  # fraction of the domain width

    es_mutation_strength: float = Field(default=0.2, ge=0)  # fraction of the domain width

    pso_inertia: float = Field(default=0.9, ge=0, le=1)
    pso_c1: float = Field(default=2.0, ge=0)
    pso_c2: float = Field(default=2.0, ge=0)
    pso_vmax_fraction: float = Field(default=0.2, gt=0)

    rs_neighborhood: bool = False
    rs_neighborhood_sigma: float = Field(default=0.1, gt=0)  # fraction of the domain width

    def resolved_population_size(self, dimension: int) -> int:
        return self.population_size if self.population_size is not None else 50 * dimension


class AcceleratedConfig(OptimizerConfig):
    """
    DE with per-generation convergence-point estimation and Gaussian-sampling injection.

    P1 estimates by averaging the elite, P2 by weighted averaging, PA from the
    generation's moving vectors. ``injection_count`` (k) left unset resolves to
    the elite count.
    """

    algorithm: Literal["P1", "P2", "PA"] = "P1"
    elite_rate: float = Field(default=0.05, gt=0, le=1)
    sigma: float = Field(default=5.0, gt=0)
    injection_count: Optional[int] = Field(default=None, ge=0)
    was_mode: Literal["consistent", "literal"] = "consistent"

    @property
    def variant(self) -> str:
        return self.algorithm


AlgorithmConfig = Union[OptimizerConfig, AcceleratedConfig]


def make_algorithm_config(label: str, block: Optional[dict]) -> AlgorithmConfig:
    """
    Resolve one algorithm block. The block's ``algorithm`` key defaults to the label.
    """
    params = dict(block or {})
    algorithm = params.setdefault("algorithm", label)
    if algorithm not in ALGORITHM_NAMES:
        raise ConfigurationError(
            f"algorithms.{label}.algorithm: unknown algorithm '{algorithm}'. Available: {ALGORITHM_NAMES}"
        )
    model = AcceleratedConfig if algorithm in ACCELERATED_ALGORITHMS else OptimizerConfig
    try:
        return model(**params)
    except ValidationError as e:
        raise ConfigurationError(_describe_validation_error(e, prefix=f"algorithms.{label}")) from e


def default_algorithms() -> Dict[str, AlgorithmConfig]:
    """
    The eight comparison columns: five baselines, P1, P2 and a DE/best/1 ablation.
    """
    algorithms: Dict[str, AlgorithmConfig] = {
        name: make_algorithm_config(name, None) for name in BASELINE_ALGORITHMS + ["P1", "P2"]
    }
    algorithms["DE-best1"] = make_algorithm_config("DE-best1", {"algorithm": "DE", "de_strategy": "best_1"})
    return algorithms


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dimensions: List[int] = Field(default_factory=lambda: list(DEFAULT_DIMENSIONS))
    trials: int = DEFAULT_TRIALS
    master_seed: int = 0
    functions: List[str] = Field(default_factory=lambda: list(FUNCTION_NAMES))
    algorithms: Dict[str, AlgorithmConfig] = Field(default_factory=default_algorithms)
    output_dir: str = "results"
    history_stride: Optional[int] = None  # evaluations between history points; unset = population size
    budget_per_dimension: int = 1000
    save_history: bool = True
    log_estimates: bool = False
    guard_bounds: bool = False  # check every evaluated genome against the box

    @field_validator("trials")
    @classmethod
    def _check_trials(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"trials must be >= 1, got {value}")
        return value

    @field_validator("dimensions")
    @classmethod
    def _check_dimensions(cls, value: List[int]) -> List[int]:
        if not value:
            raise ValueError("at least one dimension is required")
        bad = [d for d in value if d < 1]
        if bad:
            raise ValueError(f"dimensions must be >= 1, got {bad}")
        return value

    @field_validator("functions")
    @classmethod
    def _check_functions(cls, value: List[str]) -> List[str]:
        unknown = [name for name in value if name not in FUNCTION_NAMES]
        if unknown:
            raise ValueError(f"unknown functions {unknown}. Available: {FUNCTION_NAMES}")
        return value

    @field_validator("history_stride", "budget_per_dimension")
    @classmethod
    def _check_positive(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    @model_validator(mode="before")
    @classmethod
    def _resolve_algorithms(cls, data):
        if isinstance(data, dict) and isinstance(data.get("algorithms"), dict):
            data = dict(data)
            data["algorithms"] = {
                label: block if isinstance(block, BaseModel) else make_algorithm_config(label, block)
                for label, block in data["algorithms"].items()
            }
        return data

    def budget(self, dimension: int) -> int:
        return self.budget_per_dimension * dimension

    def to_yaml(self) -> str:
        data = self.model_dump(mode="json", exclude={"algorithms"})
        data["algorithms"] = {label: block.model_dump(mode="json") for label, block in self.algorithms.items()}
        return yaml.safe_dump(data, sort_keys=False)


def _describe_validation_error(error: ValidationError, prefix: str = "") -> str:
    messages = []
    for item in error.errors():
        key = ".".join(str(part) for part in item["loc"])
        if prefix:
            key = f"{prefix}.{key}" if key else prefix
        messages.append(f"{key}: {item['msg']}" if key else item["msg"])
    return "; ".join(messages)


def parse_config(data: Optional[dict]) -> ExperimentConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"Configuration must be a mapping, got {type(data).__name__}")
    try:
        return ExperimentConfig(**data)
    except ValidationError as e:
        raise ConfigurationError(_describe_validation_error(e)) from e


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Read a YAML experiment file and fill every unspecified value with the defaults.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Configuration file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Cannot parse {path}: {e}") from e

    config = parse_config(data)
    logging.info(
        f"Loaded config {path}: {len(config.functions)} functions x {len(config.algorithms)} algorithms "
        f"x dimensions {config.dimensions} x {config.trials} trials"
    )
    return config
