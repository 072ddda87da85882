"""Fit score of a candidate orientation and the exhaustive grid-search oracle."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import solar_model
from .data import IrradianceSeries
from .errors import LengthMismatch, ValidationError
from .preprocess import DayGroup, normalize_day
from .solar_model import SurfaceOrientation

_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class DomainGrid:
    """Cross product of azimuth and tilt values, ordered azimuth-major.

    Point ``i`` is ``(azimuth_values[i // n_tilt], tilt_values[i % n_tilt])``,
    so the lowest index is also the lexicographically smallest point.
    """

    azimuth_values: np.ndarray
    tilt_values: np.ndarray

    def __post_init__(self):
        az = np.asarray(self.azimuth_values, dtype=float)
        tilt = np.asarray(self.tilt_values, dtype=float)
        object.__setattr__(self, "azimuth_values", az)
        object.__setattr__(self, "tilt_values", tilt)
        if az.ndim != 1 or tilt.ndim != 1 or az.size * tilt.size < 2:
            raise ValidationError("grid needs at least two points")
        if np.any(np.diff(az) <= 0) or np.any(np.diff(tilt) <= 0):
            raise ValidationError("grid values must be strictly ascending")
        if az[0] < 0 or az[-1] >= 360:
            raise ValidationError("azimuth values must lie in [0, 360)")
        if tilt[0] < 0 or tilt[-1] > 90:
            raise ValidationError("tilt values must lie in [0, 90]")

    @classmethod
    def regular(cls, az_step: float = 1.0, tilt_step: float = 1.0) -> "DomainGrid":
        """Azimuth ``0, s, ...`` below 360 and tilt ``0, s, ...`` up to 90 inclusive."""
        if not az_step > 0 or not tilt_step > 0:
            raise ValidationError("grid steps must be positive")
        n_az = int(np.ceil(360.0 / az_step - 1e-9))
        n_tilt = int(np.floor(90.0 / tilt_step + 1e-9)) + 1
        return cls(np.arange(n_az) * float(az_step), np.arange(n_tilt) * float(tilt_step))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.azimuth_values), len(self.tilt_values)

    @property
    def size(self) -> int:
        return len(self.azimuth_values) * len(self.tilt_values)

    def __len__(self) -> int:
        return self.size

    @property
    def points(self) -> np.ndarray:
        az, tilt = np.meshgrid(self.azimuth_values, self.tilt_values, indexing="ij")
        return np.column_stack([az.ravel(), tilt.ravel()])

    def point(self, index: int) -> tuple[float, float]:
        i, j = divmod(int(index), len(self.tilt_values))
        return float(self.azimuth_values[i]), float(self.tilt_values[j])

    def index_of(self, azimuth: float, tilt: float) -> int:
        i = np.flatnonzero(np.isclose(self.azimuth_values, azimuth, rtol=0, atol=1e-9))
        j = np.flatnonzero(np.isclose(self.tilt_values, tilt, rtol=0, atol=1e-9))
        if not len(i) or not len(j):
            raise KeyError(f"({azimuth}, {tilt}) is not a grid point")
        return int(i[0]) * len(self.tilt_values) + int(j[0])

    def to_dict(self) -> dict:
        return {"azimuth_values": self.azimuth_values.tolist(), "tilt_values": self.tilt_values.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "DomainGrid":
        return cls(np.array(doc["azimuth_values"], float), np.array(doc["tilt_values"], float))


def candidate_profile(orientation: SurfaceOrientation, day_irradiance: IrradianceSeries,
                      albedo: float = solar_model.DEFAULT_ALBEDO,
                      attenuation: str | Callable = "step") -> tuple[np.ndarray, bool]:
    """Normalized POA irradiance of one day for a candidate orientation."""
    poa = solar_model.poa_from_horizontal(
        day_irradiance.solar_zenith_deg, day_irradiance.solar_azimuth_deg,
        day_irradiance.ghi, day_irradiance.dni, day_irradiance.dhi,
        orientation.azimuth_deg, orientation.tilt_deg, albedo=albedo, attenuation=attenuation)
    return normalize_day(poa)


def group_score(prototype, candidate) -> float:
    """Negative mean squared distance between two normalized day profiles."""
    p = np.asarray(prototype, float)
    q = np.asarray(candidate, float)
    if p.shape != q.shape:
        raise LengthMismatch(f"profile lengths differ: {p.shape} vs {q.shape}")
    return -float(np.mean((q - p) ** 2))


class FitObjective:
    """Vectorised fit score over the prototype days of a set of groups.

    Per-group inputs are stacked once; evaluating a single point or a whole
    grid goes through the same arithmetic, so both give bit-identical values.
    """

    def __init__(self, groups: Sequence[DayGroup], irradiance: IrradianceSeries,
                 albedo: float = solar_model.DEFAULT_ALBEDO, attenuation: str | Callable = "step"):
        if not groups:
            raise ValidationError("no day groups to score against")
        days = [irradiance.at(g.prototype_timestamps) for g in groups]
        self.group_ids = [g.group_id for g in groups]
        self.zenith = np.stack([d.solar_zenith_deg for d in days])
        self.sun_azimuth = np.stack([d.solar_azimuth_deg for d in days])
        self.ghi = np.stack([d.ghi for d in days])
        self.dni = np.stack([d.dni for d in days])
        self.dhi = np.stack([d.dhi for d in days])
        self.targets = np.stack([g.prototype_profile for g in groups])
        if self.targets.shape != self.zenith.shape:
            raise LengthMismatch("prototype profiles and irradiance days differ in length")
        self.albedo = albedo
        self.attenuation = attenuation
        self.n_evaluations = 0

    @property
    def n_groups(self) -> int:
        return self.targets.shape[0]

    def group_scores(self, azimuth, tilt) -> np.ndarray:
        """Scores with shape ``(n_groups, n_candidates)``."""
        az = np.atleast_1d(np.asarray(azimuth, float))
        tilt = np.atleast_1d(np.asarray(tilt, float))
        out = np.empty((self.n_groups, len(az)))
        for lo in range(0, len(az), _CHUNK):
            a = az[lo:lo + _CHUNK, None, None]
            b = tilt[lo:lo + _CHUNK, None, None]
            poa = solar_model.poa_from_horizontal(
                self.zenith[None], self.sun_azimuth[None], self.ghi[None], self.dni[None],
                self.dhi[None], a, b, albedo=self.albedo, attenuation=self.attenuation)
            peak = poa.max(axis=-1, keepdims=True)
            norm = np.divide(poa, peak, out=np.zeros_like(poa), where=peak > 0)
            out[:, lo:lo + _CHUNK] = -np.mean((norm - self.targets[None]) ** 2, axis=-1).T
        self.n_evaluations += len(az)
        return out

    def total(self, azimuth, tilt) -> np.ndarray:
        return _sum_rows(self.group_scores(azimuth, tilt))

    def __call__(self, azimuth: float, tilt: float) -> float:
        return float(self.total([azimuth], [tilt])[0])


def _sum_rows(per_group: np.ndarray) -> np.ndarray:
    # fixed left-to-right order keeps totals independent of the batch size
    total = np.zeros(per_group.shape[1])
    for row in per_group:
        total = total + row
    return total


def fit_score(orientation: SurfaceOrientation, groups: Sequence[DayGroup],
              irradiance: IrradianceSeries, **kwargs) -> float:
    return FitObjective(groups, irradiance, **kwargs)(orientation.azimuth_deg, orientation.tilt_deg)


@dataclass(frozen=True, eq=False)
class FitScoreTable:
    grid: DomainGrid
    group_ids: list
    per_group_scores: np.ndarray  # (n_groups, |grid|)
    total_scores: np.ndarray  # (|grid|,)

    @property
    def argmax(self) -> int:
        # np.argmax returns the first maximum: lowest azimuth, then lowest tilt
        return int(np.argmax(self.total_scores))

    @property
    def best(self) -> tuple[float, float]:
        return self.grid.point(self.argmax)

    @property
    def best_score(self) -> float:
        return float(self.total_scores[self.argmax])

    def ties(self) -> np.ndarray:
        return np.flatnonzero(self.total_scores == self.total_scores[self.argmax])


def grid_search(grid: DomainGrid, groups: Sequence[DayGroup], irradiance: IrradianceSeries,
                objective: FitObjective | None = None, **kwargs) -> FitScoreTable:
    objective = objective or FitObjective(groups, irradiance, **kwargs)
    pts = grid.points
    per_group = objective.group_scores(pts[:, 0], pts[:, 1])
    return FitScoreTable(grid, list(objective.group_ids), per_group, _sum_rows(per_group))
