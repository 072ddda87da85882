"""Daily normalization, day grouping and prototypical (clearest) day selection."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .data import IrradianceSeries, PowerProfile, local_days
from .errors import EmptyProfile, NoDaylightSamples


def normalize_day(day_profile) -> tuple[np.ndarray, bool]:
    """Scale a day to its maximum. Returns ``(normalized, flagged)``; all-zero days are flagged."""
    x = np.asarray(day_profile, dtype=float)
    peak = x.max() if x.size else 0.0
    if peak <= 0.0:
        return x.copy(), True
    return x / peak, False


@dataclass(frozen=True, eq=False)
class DayGroup:
    group_id: str
    days: tuple[dt.date, ...]
    day_timestamps: dict = field(repr=False)  # date -> datetime64[s] array (N,)
    day_power: dict = field(repr=False)  # date -> watts (N,)
    prototypical_day: dt.date | None = None
    prototype_profile: np.ndarray | None = field(default=None, repr=False)
    correlations: dict = field(default_factory=dict, repr=False)

    @property
    def prototype_timestamps(self) -> np.ndarray:
        if self.prototypical_day is None:
            raise ValueError(f"group {self.group_id} has no prototype yet")
        return self.day_timestamps[self.prototypical_day]


@dataclass
class DaySplit:
    complete: dict  # date -> sample indices into the profile
    dropped: list  # [(date, reason)]
    samples_per_day: int


def split_days(profile: PowerProfile, utc_offset_hours: int | None = None,
               irradiance: IrradianceSeries | None = None) -> DaySplit:
    """Partition samples into local days and keep only complete ones.

    A day is complete when it has every one of its N lattice samples and, if
    ``irradiance`` is given, an irradiance record at each of those instants.
    """
    if len(profile) == 0:
        raise EmptyProfile("generation profile has no samples")
    if utc_offset_hours is None:
        utc_offset_hours = profile.location.utc_offset_hours
    n = profile.resolution_per_day
    days = local_days(profile.timestamps, utc_offset_hours)
    covered = np.ones(len(profile), bool) if irradiance is None else irradiance.indices_of(profile.timestamps) >= 0
    uniq, start, counts = np.unique(days, return_index=True, return_counts=True)
    complete, dropped = {}, []
    for d, s, c in zip(uniq, start, counts):
        date = d.item()
        if c != n:
            dropped.append((date, f"incomplete: {c} of {n} samples"))
        elif not covered[s:s + c].all():
            dropped.append((date, "missing irradiance samples"))
        else:
            complete[date] = np.arange(s, s + c)
    return DaySplit(complete, dropped, n)


def _group_key(day: dt.date, scheme: str) -> str:
    if scheme == "month":
        return f"{day.year:04d}-{day.month:02d}"
    if scheme == "week":
        year, week, _ = day.isocalendar()
        return f"{year:04d}-W{week:02d}"
    raise ValueError(f"unknown grouping scheme {scheme!r}")


def group_days(profile: PowerProfile, scheme: str = "month", utc_offset_hours: int | None = None,
               irradiance: IrradianceSeries | None = None, split: DaySplit | None = None) -> list[DayGroup]:
    """Partition complete days by calendar month or ISO week (prototype unset)."""
    split = split or split_days(profile, utc_offset_hours, irradiance)
    if not split.complete:
        raise EmptyProfile("no complete days in the generation profile")
    buckets: dict[str, list[dt.date]] = {}
    for day in sorted(split.complete):
        buckets.setdefault(_group_key(day, scheme), []).append(day)
    groups = []
    for key in sorted(buckets):
        days = tuple(buckets[key])
        groups.append(DayGroup(
            group_id=key,
            days=days,
            day_timestamps={d: profile.timestamps[split.complete[d]] for d in days},
            day_power={d: profile.power_w[split.complete[d]] for d in days},
        ))
    return groups


def pearson(x, y) -> float:
    """Pearson correlation, NaN when undefined (fewer than 2 points or a constant series)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if len(x) < 2:
        return math.nan
    dx, dy = x - x.mean(), y - y.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        return math.nan
    return float(dx @ dy) / denom


def day_correlations(group: DayGroup, irradiance: IrradianceSeries) -> dict:
    """DNI/GHI correlation over daylight samples (zenith < 90) for each day; None if undefined."""
    out = {}
    daylight_seen = False
    for day in group.days:
        rec = irradiance.at(group.day_timestamps[day])
        lit = rec.solar_zenith_deg < 90.0
        daylight_seen |= bool(lit.any())
        r = pearson(rec.dni[lit], rec.ghi[lit])
        out[day] = None if math.isnan(r) else r
    if not daylight_seen:
        raise NoDaylightSamples(f"group {group.group_id} has no daylight samples")
    return out


def select_prototypical_day(group: DayGroup, irradiance: IrradianceSeries) -> dt.date:
    """Day whose DNI and GHI are most correlated; earliest date wins ties."""
    corr = day_correlations(group, irradiance)
    return _best_day(corr)


def _best_day(corr: dict) -> dt.date:
    best_day, best = None, -math.inf
    for day in sorted(corr):
        r = corr[day]
        value = -math.inf if r is None else r
        if best_day is None or value > best:
            best_day, best = day, value
    return best_day


def assign_prototype(group: DayGroup, irradiance: IrradianceSeries) -> DayGroup:
    corr = day_correlations(group, irradiance)
    day = _best_day(corr)
    profile, _ = normalize_day(group.day_power[day])
    return replace(group, prototypical_day=day, prototype_profile=profile, correlations=corr)


@dataclass
class Preprocessed:
    groups: list[DayGroup]
    report: dict


def preprocess(profile: PowerProfile, irradiance: IrradianceSeries, scheme: str = "month",
               utc_offset_hours: int | None = None) -> Preprocessed:
    """Split, group and pick prototypes; also builds the JSON-ready report."""
    offset = profile.location.utc_offset_hours if utc_offset_hours is None else utc_offset_hours
    split = split_days(profile, offset, irradiance)
    groups = [assign_prototype(g, irradiance)
              for g in group_days(profile, scheme, offset, irradiance, split=split)]
    flagged = sorted(d for g in groups for d in g.days if normalize_day(g.day_power[d])[1])
    report = {
        "site_id": profile.site_id,
        "scheme": scheme,
        "utc_offset_hours": offset,
        "samples_per_day": split.samples_per_day,
        "groups": [
            {
                "group_id": g.group_id,
                "n_days": len(g.days),
                "prototypical_day": g.prototypical_day.isoformat(),
                "correlations": {d.isoformat(): r for d, r in sorted(g.correlations.items())},
            }
            for g in groups
        ],
        "flagged_all_zero_days": [d.isoformat() for d in flagged],
        "dropped_days": [{"date": d.isoformat(), "reason": why} for d, why in split.dropped],
    }
    return Preprocessed(groups, report)
