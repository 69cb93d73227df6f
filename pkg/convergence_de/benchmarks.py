"""
CEC2013-style test functions.

Every base function takes the decorated coordinate z = R(x - shift) and
applies the standard internal transforms of its CEC2013 definition
(oscillation, asymmetry, ill-conditioning, domain scaling, offsets), so each
base has its minimum 0 at z = 0 and every decorated problem has its optimum
at the shift. Functions are vectorized over leading axes: (D,) -> scalar,
(n, D) -> (n,).
"""

import functools
import logging
from typing import Callable, Dict, List, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from convergence_de.core import Problem, RngStream
from convergence_de.errors import ConfigurationError

LOWER_BOUND = -100.0
UPPER_BOUND = 100.0
SHIFT_RANGE = 80.0

WEIERSTRASS_A = 0.5
WEIERSTRASS_B = 3.0
WEIERSTRASS_KMAX = 20
KATSUURA_TERMS = 32
SCHWEFEL_OFFSET = 4.209687462275036e002

# exp(1.0) rather than np.e so Ackley cancels exactly at the optimum
_E = float(np.exp(1.0))

RotationMatrix = np.ndarray


def _ramp(dimension: int) -> np.ndarray:
    """(i - 1) / (D - 1) for i = 1..D, all zeros when D == 1."""
    return np.linspace(0.0, 1.0, dimension)


def _ill_conditioning(alpha: float, dimension: int) -> np.ndarray:
    return alpha ** (0.5 * _ramp(dimension))


def _oscillate(x: np.ndarray) -> np.ndarray:
    nonzero = x != 0
    magnitude = np.where(nonzero, np.abs(x), 1.0)
    xhat = np.where(nonzero, np.log(magnitude), 0.0)
    c1 = np.where(x > 0, 10.0, 5.5)
    c2 = np.where(x > 0, 7.9, 3.1)
    return np.sign(x) * np.exp(xhat + 0.049 * (np.sin(c1 * xhat) + np.sin(c2 * xhat)))


def _asymmetric(x: np.ndarray, beta: float) -> np.ndarray:
    positive = x > 0
    base = np.where(positive, x, 1.0)
    exponent = 1.0 + beta * _ramp(x.shape[-1]) * np.sqrt(base)
    return np.where(positive, np.power(base, exponent), x)


def _cyclic_pairs(y: np.ndarray):
    return y, np.roll(y, -1, axis=-1)


def sphere(z: np.ndarray) -> np.ndarray:
    return np.sum(z**2, axis=-1)


def elliptic(z: np.ndarray) -> np.ndarray:
    y = _oscillate(z)
    return np.sum((1e6 ** _ramp(z.shape[-1])) * y**2, axis=-1)


def bent_cigar(z: np.ndarray) -> np.ndarray:
    y = _asymmetric(z, 0.5)
    return y[..., 0] ** 2 + 1e6 * np.sum(y[..., 1:] ** 2, axis=-1)


def discus(z: np.ndarray) -> np.ndarray:
    y = _oscillate(z)
    return 1e6 * y[..., 0] ** 2 + np.sum(y[..., 1:] ** 2, axis=-1)


def different_powers(z: np.ndarray) -> np.ndarray:
    exponents = 2.0 + 4.0 * _ramp(z.shape[-1])
    return np.sqrt(np.sum(np.abs(z) ** exponents, axis=-1))


def rosenbrock(z: np.ndarray) -> np.ndarray:
    y = z * 2.048 / 100.0 + 1.0
    head, tail = y[..., :-1], y[..., 1:]
    return np.sum(100.0 * (head**2 - tail) ** 2 + (head - 1.0) ** 2, axis=-1)


def schaffers_f7(z: np.ndarray) -> np.ndarray:
    y = _ill_conditioning(10.0, z.shape[-1]) * _asymmetric(z, 0.5)
    if y.shape[-1] > 1:
        radius = np.sqrt(y[..., :-1] ** 2 + y[..., 1:] ** 2)
    else:
        radius = np.abs(y)
    root = np.sqrt(radius)
    terms = root + root * np.sin(50.0 * radius**0.2) ** 2
    return np.mean(terms, axis=-1) ** 2


def ackley(z: np.ndarray) -> np.ndarray:
    y = _ill_conditioning(10.0, z.shape[-1]) * _asymmetric(z, 0.5)
    mean_square = np.mean(y**2, axis=-1)
    mean_cos = np.mean(np.cos(2.0 * np.pi * y), axis=-1)
    return (20.0 - 20.0 * np.exp(-0.2 * np.sqrt(mean_square))) + (_E - np.exp(mean_cos))


def weierstrass(z: np.ndarray) -> np.ndarray:
    y = _ill_conditioning(10.0, z.shape[-1]) * _asymmetric(z * 0.5 / 100.0, 0.5)
    k = np.arange(WEIERSTRASS_KMAX + 1)
    ak = WEIERSTRASS_A**k
    two_pi_bk = 2.0 * np.pi * WEIERSTRASS_B**k
    # per-dimension difference so the optimum cancels term by term
    wave = np.cos(two_pi_bk * (y[..., None] + 0.5))
    offset = np.cos(two_pi_bk * 0.5)
    return np.sum(np.sum(ak * (wave - offset), axis=-1), axis=-1)


def griewank(z: np.ndarray) -> np.ndarray:
    y = _ill_conditioning(100.0, z.shape[-1]) * (z * 600.0 / 100.0)
    divisor = np.sqrt(np.arange(1, z.shape[-1] + 1))
    return np.sum(y**2, axis=-1) / 4000.0 + (1.0 - np.prod(np.cos(y / divisor), axis=-1))


def _rastrigin_sum(y: np.ndarray) -> np.ndarray:
    return np.sum(y**2 + 10.0 * (1.0 - np.cos(2.0 * np.pi * y)), axis=-1)


def _scaled_rastrigin(y: np.ndarray) -> np.ndarray:
    """Rastrigin chain on coordinates already scaled into [-5.12, 5.12]."""
    return _rastrigin_sum(_ill_conditioning(10.0, y.shape[-1]) * _asymmetric(_oscillate(y), 0.2))


def rastrigin(z: np.ndarray) -> np.ndarray:
    return _scaled_rastrigin(z * 5.12 / 100.0)


def noncontinuous_rastrigin(z: np.ndarray) -> np.ndarray:
    y = z * 5.12 / 100.0
    # rounding to half steps applies in the scaled domain
    return _scaled_rastrigin(np.where(np.abs(y) > 0.5, np.floor(2.0 * y + 0.5) / 2.0, y))


def _schwefel_term(y: np.ndarray, dimension: int) -> np.ndarray:
    inside = y * np.sin(np.sqrt(np.abs(y)))
    upper = 500.0 - np.fmod(y, 500.0)
    above = upper * np.sin(np.sqrt(np.abs(upper))) - (y - 500.0) ** 2 / (10000.0 * dimension)
    rest = np.fmod(np.abs(y), 500.0)
    below = (rest - 500.0) * np.sin(np.sqrt(np.abs(500.0 - rest))) - (y + 500.0) ** 2 / (10000.0 * dimension)
    return np.where(y > 500.0, above, np.where(y < -500.0, below, inside))


def schwefel(z: np.ndarray) -> np.ndarray:
    dimension = z.shape[-1]
    y = _ill_conditioning(10.0, dimension) * (z * 1000.0 / 100.0) + SCHWEFEL_OFFSET
    peak = _schwefel_term(np.array(SCHWEFEL_OFFSET), dimension)
    return np.sum(peak - _schwefel_term(y, dimension), axis=-1)


def katsuura(z: np.ndarray) -> np.ndarray:
    dimension = z.shape[-1]
    y = _ill_conditioning(100.0, dimension) * (z * 5.0 / 100.0)
    powers = 2.0 ** np.arange(1, KATSUURA_TERMS + 1)
    scaled = y[..., None] * powers
    inner = np.sum(np.abs(scaled - np.floor(scaled + 0.5)) / powers, axis=-1)
    factors = (1.0 + np.arange(1, dimension + 1) * inner) ** (10.0 / dimension**1.2)
    scale = 10.0 / dimension**2
    return scale * np.prod(factors, axis=-1) - scale


def lunacek_bi_rastrigin(z: np.ndarray) -> np.ndarray:
    dimension = z.shape[-1]
    mu0, d = 2.5, 1.0
    s = 1.0 - 1.0 / (2.0 * np.sqrt(dimension + 20.0) - 8.2)
    mu1 = -np.sqrt((mu0**2 - d) / s)
    # distance to the mu0 funnel; the optimum sits at its centre
    t = 2.0 * (z * 10.0 / 100.0)
    first = np.sum(t**2, axis=-1)
    second = d * dimension + s * np.sum((t + mu0 - mu1) ** 2, axis=-1)
    w = _ill_conditioning(100.0, dimension) * t
    return np.minimum(first, second) + 10.0 * np.sum(1.0 - np.cos(2.0 * np.pi * w), axis=-1)


def expanded_griewank_rosenbrock(z: np.ndarray) -> np.ndarray:
    y = z * 5.0 / 100.0 + 1.0
    a, b = _cyclic_pairs(y)
    g = 100.0 * (a**2 - b) ** 2 + (a - 1.0) ** 2
    return np.sum(g**2 / 4000.0 + (1.0 - np.cos(g)), axis=-1)


def expanded_schaffers_f6(z: np.ndarray) -> np.ndarray:
    a, b = _cyclic_pairs(_asymmetric(z, 0.5))
    r2 = a**2 + b**2
    return np.sum(0.5 + (np.sin(np.sqrt(r2)) ** 2 - 0.5) / (1.0 + 0.001 * r2) ** 2, axis=-1)


BASE_FUNCTIONS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sphere": sphere,
    "elliptic": elliptic,
    "bent_cigar": bent_cigar,
    "discus": discus,
    "different_powers": different_powers,
    "rosenbrock": rosenbrock,
    "schaffers_f7": schaffers_f7,
    "ackley": ackley,
    "weierstrass": weierstrass,
    "griewank": griewank,
    "rastrigin": rastrigin,
    "noncontinuous_rastrigin": noncontinuous_rastrigin,
    "schwefel": schwefel,
    "katsuura": katsuura,
    "lunacek_bi_rastrigin": lunacek_bi_rastrigin,
    "expanded_griewank_rosenbrock": expanded_griewank_rosenbrock,
    "expanded_schaffers_f6": expanded_schaffers_f6,
}


def eval_base(base: str, x: np.ndarray) -> np.ndarray:
    function = BASE_FUNCTIONS.get(base)
    if function is None:
        raise ConfigurationError(f"Unknown base function '{base}'. Available: {sorted(BASE_FUNCTIONS)}")
    return function(np.asarray(x, dtype=float))


class BenchmarkSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    base: str
    dimension: int
    bias: float = 0.0
    shift: Optional[List[float]] = None
    rotation: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _check_decoration(self):
        if self.base not in BASE_FUNCTIONS:
            raise ValueError(f"unknown base function '{self.base}'")
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.shift is not None:
            if len(self.shift) != self.dimension:
                raise ValueError(f"shift has length {len(self.shift)}, expected {self.dimension}")
            shift = np.array(self.shift)
            if np.any(shift <= LOWER_BOUND) or np.any(shift >= UPPER_BOUND):
                raise ValueError("shift must lie strictly inside the bounds")
        if self.rotation is not None:
            rotation = np.array(self.rotation, dtype=float)
            if rotation.shape != (self.dimension, self.dimension):
                raise ValueError(f"rotation has shape {rotation.shape}, expected {(self.dimension, self.dimension)}")
            if not is_orthogonal(rotation):
                raise ValueError("rotation is not orthogonal")
        return self


def is_orthogonal(matrix: np.ndarray, tol: float = 1e-9) -> bool:
    matrix = np.asarray(matrix, dtype=float)
    return bool(np.max(np.abs(matrix.T @ matrix - np.eye(len(matrix)))) < tol)


def make_problem(spec: BenchmarkSpec) -> Problem:
    """
    Build the problem computing base(R (x - shift)) + bias on [-100, 100]^D.
    """
    function = BASE_FUNCTIONS[spec.base]
    shift = None if spec.shift is None else np.array(spec.shift, dtype=float)
    rotation = None if spec.rotation is None else np.array(spec.rotation, dtype=float)

    def objective(x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != spec.dimension:
            raise ValueError(f"{spec.name}: expected {spec.dimension} coordinates, got {x.shape[-1]}")
        z = x - shift if shift is not None else x
        if rotation is not None:
            z = z @ rotation.T
        return function(z)

    return Problem(
        name=spec.name,
        dimension=spec.dimension,
        objective=objective,
        lower_bound=LOWER_BOUND,
        upper_bound=UPPER_BOUND,
        bias=spec.bias,
        optimum=shift if shift is not None else np.zeros(spec.dimension),
        base=spec.base,
        shift=shift,
        rotation=rotation,
    )


def random_rotation(dimension: int, rng: RngStream) -> RotationMatrix:
    """
    Haar-random orthogonal matrix: QR of a Gaussian matrix with the signs of R's diagonal folded into Q.
    """
    if dimension < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
    gaussian = rng.normal(size=(dimension, dimension))
    q, r = np.linalg.qr(gaussian)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


class SuiteEntry(NamedTuple):
    name: str
    base: str
    rotated: bool
    bias: float


SUITE_TABLE: List[SuiteEntry] = [
    SuiteEntry("f1", "sphere", False, -1400.0),
    SuiteEntry("f2", "elliptic", True, -1300.0),
    SuiteEntry("f3", "bent_cigar", True, -1200.0),
    SuiteEntry("f4", "discus", True, -1100.0),
    SuiteEntry("f5", "different_powers", False, -1000.0),
    SuiteEntry("f6", "rosenbrock", True, -900.0),
    SuiteEntry("f7", "schaffers_f7", True, -800.0),
    SuiteEntry("f8", "ackley", True, -700.0),
    SuiteEntry("f9", "weierstrass", True, -600.0),
    SuiteEntry("f10", "griewank", True, -500.0),
    SuiteEntry("f11", "rastrigin", False, -400.0),
    SuiteEntry("f12", "rastrigin", True, -300.0),
    SuiteEntry("f13", "noncontinuous_rastrigin", True, -200.0),
    SuiteEntry("f14", "schwefel", False, -100.0),
    SuiteEntry("f15", "schwefel", True, 100.0),
    SuiteEntry("f16", "katsuura", True, 200.0),
    SuiteEntry("f17", "lunacek_bi_rastrigin", False, 300.0),
    SuiteEntry("f18", "lunacek_bi_rastrigin", True, 400.0),
    SuiteEntry("f19", "expanded_griewank_rosenbrock", False, 500.0),
    SuiteEntry("f20", "expanded_schaffers_f6", False, 600.0),
]

FUNCTION_NAMES: List[str] = [entry.name for entry in SUITE_TABLE]
UNIMODAL_FUNCTIONS: List[str] = FUNCTION_NAMES[:5]


def suite_spec(index: int, dimension: int, master_seed: int) -> BenchmarkSpec:
    entry = SUITE_TABLE[index]
    stream = RngStream(master_seed).child(dimension, index)
    # shift and rotation come from separate children so one never moves the other
    shift = stream.child(0).uniform(-SHIFT_RANGE, SHIFT_RANGE, size=dimension)
    rotation = random_rotation(dimension, stream.child(1)) if entry.rotated else None
    return BenchmarkSpec(
        name=entry.name,
        base=entry.base,
        dimension=dimension,
        bias=entry.bias,
        shift=shift.tolist(),
        rotation=None if rotation is None else rotation.tolist(),
    )


@functools.lru_cache(maxsize=16)
def _cached_suite(dimension: int, master_seed: int) -> tuple:
    logging.debug(f"Building benchmark suite for D={dimension}, master seed {master_seed}")
    return tuple(make_problem(suite_spec(i, dimension, master_seed)) for i in range(len(SUITE_TABLE)))


def suite(dimension: int, master_seed: int) -> List[Problem]:
    if dimension < 1:
        raise ConfigurationError(f"dimension must be >= 1, got {dimension}")
    return list(_cached_suite(int(dimension), int(master_seed)))


def get_problem(name: str, dimension: int, master_seed: int) -> Problem:
    if name not in FUNCTION_NAMES:
        raise ConfigurationError(f"Unknown function '{name}'. Available: {FUNCTION_NAMES}")
    return suite(dimension, master_seed)[FUNCTION_NAMES.index(name)]


def suite_manifest(dimension: int, master_seed: int) -> List[dict]:
    manifest = []
    for entry, problem in zip(SUITE_TABLE, suite(dimension, master_seed)):
        manifest.append({
            "name": entry.name,
            "base": entry.base,
            "rotated": entry.rotated,
            "bias": entry.bias,
            "dimension": dimension,
            "master_seed": master_seed,
            "shift": problem.shift.tolist(),
        })
    return manifest
