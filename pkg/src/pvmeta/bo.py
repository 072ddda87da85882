"""GP-UCB Bayesian optimization over a discrete (azimuth, tilt) grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import gp
from .errors import ValidationError
from .fitscore import DomainGrid
from .gp import GpState, KernelSpec


def phi_t(t: int, domain_size: int, delta: float) -> float:
    """Confidence width schedule ``2 log(|grid| t^2 pi^2 / (6 delta))``."""
    if t < 1 or domain_size < 2 or not 0.0 < delta < 1.0:
        raise ValidationError("phi_t needs t >= 1, |grid| >= 2 and delta in (0, 1)")
    return 2.0 * math.log(domain_size * t * t * math.pi ** 2 / (6.0 * delta))


@dataclass(frozen=True)
class BoConfig:
    budget: int
    grid: DomainGrid
    warm_start_count: int = 10
    delta: float = 0.1
    rng_seed: int = 0
    kernel: KernelSpec = field(default_factory=KernelSpec)
    exclude_visited: bool = False  # restrict the argmax to unvisited points

    def __post_init__(self):
        if self.budget < 1:
            raise ValidationError("budget T must be positive")
        if not 1 <= self.warm_start_count < self.budget:
            raise ValidationError("need 1 <= warm_start_count < T")
        if self.warm_start_count > self.grid.size:
            raise ValidationError("warm start larger than the grid")
        if not 0.0 < self.delta < 1.0:
            raise ValidationError("delta must lie in (0, 1)")
        if self.exclude_visited and self.budget > self.grid.size:
            raise ValidationError("exclude_visited needs T <= |grid|")


@dataclass(frozen=True)
class IterationRecord:
    t: int
    phase: str  # "warm" or "ucb"
    grid_index: int
    azimuth_deg: float
    tilt_deg: float
    phi: float
    score: float
    mu_prev: float
    sigma_prev: float
    incumbent_score: float
    regret: float | None = None


@dataclass(eq=False)
class BoTrace:
    config: BoConfig
    records: list[IterationRecord]
    state: GpState
    incumbent_index: int
    incumbent_score: float
    n_objective_calls: int

    @property
    def grid(self) -> DomainGrid:
        return self.config.grid

    @property
    def incumbent(self) -> tuple[float, float]:
        return self.grid.point(self.incumbent_index)

    def visit_counts(self) -> np.ndarray:
        return np.bincount([r.grid_index for r in self.records], minlength=self.grid.size)

    def posterior_surface(self) -> tuple[np.ndarray, np.ndarray]:
        return gp.posterior(self.state, self.grid.points)

    def posterior_argmax(self) -> int:
        mean, _ = self.posterior_surface()
        return int(np.argmax(mean))


def ucb(state: GpState, grid: DomainGrid, phi: float) -> np.ndarray:
    mean, var = gp.posterior(state, grid.points)
    return mean + math.sqrt(phi) * np.sqrt(var)


def acquire(state: GpState, grid: DomainGrid, phi: float, exclude=None) -> int:
    """Grid index maximizing the UCB; the first (lowest azimuth, tilt) wins ties."""
    values = ucb(state, grid, phi)
    if exclude is not None and len(exclude):
        values[np.asarray(list(exclude), dtype=int)] = -np.inf
    return int(np.argmax(values))


def _better(score, index, best_score, best_index) -> bool:
    return score > best_score or (score == best_score and index < best_index)


def run_bo(objective: Callable[[float, float], float], config: BoConfig,
           optimum_score: float | None = None) -> BoTrace:
    """Warm start with seeded random points, then UCB acquisitions up to T observations.

    Objective values are cached per grid point; a re-acquired point is fed to
    the GP again with its stored value. With ``optimum_score`` the
    instantaneous regret of each step is logged.
    """
    grid = config.grid
    pts = grid.points
    rng = np.random.default_rng(config.rng_seed)
    warm = rng.choice(grid.size, size=config.warm_start_count, replace=False)

    state = GpState.empty(config.kernel)
    cache: dict[int, float] = {}
    records: list[IterationRecord] = []
    best_index, best_score = -1, -math.inf

    for t in range(1, config.budget + 1):
        phi = phi_t(t, grid.size, config.delta)
        if t <= config.warm_start_count:
            phase, idx = "warm", int(warm[t - 1])
        else:
            phase = "ucb"
            idx = acquire(state, grid, phi, exclude=cache.keys() if config.exclude_visited else None)
        mu, var = gp.posterior_at(state, pts[idx])
        if idx not in cache:
            cache[idx] = float(objective(*grid.point(idx)))
        score = cache[idx]
        if best_index < 0 or _better(score, idx, best_score, best_index):
            best_index, best_score = idx, score
        regret = None if optimum_score is None else optimum_score - score
        records.append(IterationRecord(t, phase, idx, *grid.point(idx), phi, score, mu,
                                       math.sqrt(var), best_score, regret))
        state = gp.update(state, pts[idx], score)

    return BoTrace(config, records, state, best_index, best_score, len(cache))


def replay(config: BoConfig, indices, scores) -> GpState:
    """Rebuild the final GP state from a recorded sequence of observations."""
    pts = config.grid.points
    state = GpState.empty(config.kernel)
    for idx, s in zip(indices, scores):
        state = gp.update(state, pts[int(idx)], float(s))
    return state
