from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import SerError, UsageError


class FitnessError(SerError):
    exit_code = 3


@dataclass(frozen=True)
class SearchSpace:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=np.float64)
        hi = np.asarray(self.upper, dtype=np.float64)
        if lo.shape != hi.shape or lo.ndim != 1 or np.any(lo >= hi):
            raise UsageError("search space needs lower < upper in every dimension")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def box(cls, dim: int, low: float, high: float) -> "SearchSpace":
        return cls(np.full(dim, float(low)), np.full(dim, float(high)))

    @classmethod
    def unit(cls, dim: int) -> "SearchSpace":
        return cls.box(dim, 0.0, 1.0)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def clamp(self, x):
        return np.clip(x, self.lower, self.upper)

    def random_points(self, rng, n=None):
        """Uniform draw ``lower + a (upper - lower)``, ``a ~ U[0,1]`` per coordinate."""
        shape = self.dim if n is None else (n, self.dim)
        return self.lower + rng.random(shape) * self.span


@dataclass(frozen=True)
class OptimizerConfig:
    pop_size: int = 30
    max_iter: int = 100
    seed: int = 0
    mode: str = "continuous"  # continuous | binary
    threshold: float = 0.5

    def __post_init__(self):
        if self.pop_size < 2 or self.max_iter < 1:
            raise UsageError("need pop_size >= 2 and max_iter >= 1")
        if self.mode not in ("continuous", "binary"):
            raise UsageError(f"unknown mode {self.mode!r}")
        if not 0.0 < self.threshold < 1.0:
            raise UsageError("threshold must lie in (0, 1)")


@dataclass(frozen=True)
class MrfoConfig(OptimizerConfig):
    somersault_factor: float = 2.0
    greedy: bool = False  # per-agent: keep a move only if it improves that agent

    def __post_init__(self):
        super().__post_init__()
        if self.somersault_factor <= 0:
            raise UsageError("somersault factor must be positive")


@dataclass
class SearchAgent:
    position: np.ndarray
    fitness: float


@dataclass
class Population:
    positions: np.ndarray  # (N, D)
    fitness: np.ndarray  # (N,)
    best: SearchAgent


@dataclass
class FitnessRecord:
    best_fitness: list = field(default_factory=list)
    best_positions: list = field(default_factory=list)
    evaluations: int = 0

    def __len__(self):
        return len(self.best_fitness)


class Evaluator:
    """Counts fitness calls, binarizes in binary mode and tracks the best-so-far."""

    def __init__(self, fitness, space: SearchSpace, cfg: OptimizerConfig):
        self.fitness = fitness
        self.space = space
        self.cfg = cfg
        self.record = FitnessRecord()
        self.best = None

    def __call__(self, positions) -> np.ndarray:
        from .selection import binarize

        out = np.empty(len(positions))
        for j, x in enumerate(positions):
            arg = binarize(x, self.cfg.threshold).bits if self.cfg.mode == "binary" else x
            try:
                out[j] = float(self.fitness(arg))
            except SerError:
                raise
            except Exception as exc:
                raise FitnessError(
                    f"fitness evaluation {self.record.evaluations + 1} failed: {exc}"
                ) from exc
            self.record.evaluations += 1
            if self.best is None or out[j] < self.best.fitness:
                self.best = SearchAgent(np.array(x, dtype=np.float64), out[j])
        return out

    def population(self, positions) -> Population:
        return Population(positions, self(positions), self.best)

    def log_iteration(self) -> None:
        self.record.best_fitness.append(self.best.fitness)
        self.record.best_positions.append(self.best.position.copy())
