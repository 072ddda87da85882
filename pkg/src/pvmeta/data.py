"""Irradiance / generation datasets: CSV ingestion, solar position, synthesis.

Irradiance CSV header::

    timestamp,ghi,dni,dhi,solar_zenith_deg,solar_azimuth_deg,air_temp_c

Generation CSV header::

    timestamp,power_w

Timestamps are ISO-8601 in UTC (``2016-07-15T20:00:00Z``). Lines starting
with ``#`` are comments. NSRDB column names (``GHI``, ``Solar Zenith Angle``,
``Temperature``, split ``Year,Month,Day,Hour,Minute`` columns, ...) are
accepted as aliases.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import solar_model
from .errors import (
    InvalidScenario,
    IrregularSampling,
    MalformedRow,
    MissingColumn,
    NonMonotonicTimestamps,
)
from .solar_model import PanelParams, SolarPosition, SurfaceOrientation

IRRADIANCE_COLUMNS = ("timestamp", "ghi", "dni", "dhi", "solar_zenith_deg",
                      "solar_azimuth_deg", "air_temp_c")
GENERATION_COLUMNS = ("timestamp", "power_w")

_ALIASES = {
    "ghi": "ghi", "dni": "dni", "dhi": "dhi",
    "solar zenith angle": "solar_zenith_deg", "zenith": "solar_zenith_deg",
    "solar azimuth angle": "solar_azimuth_deg", "azimuth": "solar_azimuth_deg",
    "temperature": "air_temp_c", "air temperature": "air_temp_c",
    "power": "power_w", "ac_power": "power_w", "power (w)": "power_w",
    "time": "timestamp", "datetime": "timestamp",
}
_SPLIT_TIME = ("year", "month", "day", "hour", "minute")

EPOCH = np.datetime64("1970-01-01T00:00:00", "s")
SECONDS_PER_DAY = 86400


@dataclass(frozen=True)
class Location:
    latitude: float
    longitude: float

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValueError(f"latitude {self.latitude} outside [-90, 90]")
        if not -180.0 <= self.longitude <= 360.0:
            raise ValueError(f"longitude {self.longitude} outside [-180, 360]")

    @property
    def utc_offset_hours(self) -> int:
        return local_utc_offset(self.longitude)


def local_utc_offset(longitude: float) -> int:
    """Whole-hour offset of the nominal time zone for a longitude."""
    lon = longitude - 360.0 if longitude > 180.0 else longitude
    return int(round(lon / 15.0))


@dataclass(frozen=True)
class IrradianceRecord:
    timestamp: np.datetime64
    ghi: float
    dni: float
    dhi: float
    solar_zenith_deg: float
    solar_azimuth_deg: float
    air_temp_c: float


@dataclass(frozen=True, eq=False)
class IrradianceSeries:
    """Column-oriented sequence of :class:`IrradianceRecord`."""

    timestamps: np.ndarray  # datetime64[s], strictly increasing
    ghi: np.ndarray
    dni: np.ndarray
    dhi: np.ndarray
    solar_zenith_deg: np.ndarray
    solar_azimuth_deg: np.ndarray
    air_temp_c: np.ndarray

    def __len__(self) -> int:
        return len(self.timestamps)

    def __getitem__(self, i):
        if isinstance(i, (int, np.integer)):
            return IrradianceRecord(*(getattr(self, f.name)[i].item() if f.name != "timestamps"
                                      else self.timestamps[i] for f in fields(self)))
        return self.take(np.arange(len(self))[i])

    def __iter__(self) -> Iterator[IrradianceRecord]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other):
        if not isinstance(other, IrradianceSeries):
            return NotImplemented
        return all(np.array_equal(getattr(self, f.name), getattr(other, f.name)) for f in fields(self))

    def take(self, idx) -> "IrradianceSeries":
        return IrradianceSeries(**{f.name: getattr(self, f.name)[idx] for f in fields(self)})

    def at(self, timestamps: np.ndarray) -> "IrradianceSeries":
        """Rows matching ``timestamps`` exactly; raises KeyError if any is absent."""
        idx = self.indices_of(timestamps)
        if np.any(idx < 0):
            missing = np.asarray(timestamps)[idx < 0][0]
            raise KeyError(f"no irradiance sample at {missing}")
        return self.take(idx)

    def indices_of(self, timestamps: np.ndarray) -> np.ndarray:
        """Positions of ``timestamps`` in this series, -1 where absent."""
        ts = np.asarray(timestamps, dtype="datetime64[s]")
        pos = np.searchsorted(self.timestamps, ts)
        pos_c = np.minimum(pos, len(self) - 1)
        hit = (pos < len(self)) & (self.timestamps[pos_c] == ts) if len(self) else np.zeros(len(ts), bool)
        return np.where(hit, pos_c, -1)


@dataclass(frozen=True, eq=False)
class PowerProfile:
    site_id: str
    location: Location
    timestamps: np.ndarray  # datetime64[s]
    power_w: np.ndarray

    def __len__(self) -> int:
        return len(self.timestamps)

    def __eq__(self, other):
        if not isinstance(other, PowerProfile):
            return NotImplemented
        return (self.site_id == other.site_id and self.location == other.location
                and np.array_equal(self.timestamps, other.timestamps)
                and np.array_equal(self.power_w, other.power_w))

    @property
    def interval_s(self) -> int:
        return sampling_interval(self.timestamps)

    @property
    def resolution_per_day(self) -> int:
        return SECONDS_PER_DAY // self.interval_s

    @property
    def samples(self) -> list[tuple[np.datetime64, float]]:
        return list(zip(self.timestamps, self.power_w.tolist()))


def sampling_interval(timestamps: np.ndarray) -> int:
    """Base interval in seconds; every gap must be a multiple of it and divide a day."""
    if len(timestamps) < 2:
        raise IrregularSampling("need at least two samples to infer the sampling interval")
    gaps = np.diff(timestamps).astype(np.int64)
    step = int(gaps.min())
    if np.any(gaps % step):
        raise IrregularSampling("timestamps do not lie on a uniform sampling lattice")
    if SECONDS_PER_DAY % step:
        raise IrregularSampling(f"sampling interval {step}s does not divide a day")
    return step


# --------------------------------------------------------------------------- CSV

def parse_timestamp(text: str) -> np.datetime64:
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    stamp = dt.datetime.fromisoformat(text)
    if stamp.tzinfo is not None:
        stamp = stamp.astimezone(dt.timezone.utc).replace(tzinfo=None)
    return np.datetime64(stamp.replace(microsecond=0), "s")


def format_timestamp(ts: np.datetime64) -> str:
    return str(np.datetime64(ts, "s")) + "Z"


def _data_lines(handle) -> Iterator[tuple[int, str]]:
    for lineno, line in enumerate(handle, start=1):
        if line.strip() and not line.lstrip().startswith("#"):
            yield lineno, line


def _read_table(path, required: Sequence[str]):
    """Yield ``(row_number, line_number, {canonical: text})`` for each data row."""
    path = Path(path)
    with path.open(newline="") as fh:
        lines = _data_lines(fh)
        try:
            header_line, header_text = next(lines)
        except StopIteration:
            raise MissingColumn(required[0], path) from None
        header = next(csv.reader([header_text]))
        canon = []
        for name in header:
            key = name.strip()
            canon.append(key if key in required else _ALIASES.get(key.lower(), key.lower()))
        split_time = "timestamp" not in canon and all(k in canon for k in _SPLIT_TIME)
        for col in required:
            if col == "timestamp" and split_time:
                continue
            if col not in canon:
                raise MissingColumn(col, path)
        rows = []
        for row_no, (lineno, text) in enumerate(lines, start=1):
            values = next(csv.reader([text]))
            if len(values) != len(canon):
                raise MalformedRow(row_no, f"expected {len(canon)} fields, got {len(values)}", lineno)
            rec = dict(zip(canon, values))
            if split_time:
                try:
                    y, mo, d, h, mi = (int(float(rec[k])) for k in _SPLIT_TIME)
                    rec["timestamp"] = dt.datetime(y, mo, d, h, mi).isoformat()
                except ValueError as exc:
                    raise MalformedRow(row_no, f"bad date fields: {exc}", lineno) from None
            rows.append((row_no, lineno, rec))
    return rows


def _number(rec, key, row_no, lineno) -> float:
    try:
        value = float(rec[key])
    except ValueError:
        raise MalformedRow(row_no, f"{key}={rec[key]!r} is not a number", lineno) from None
    if not math.isfinite(value):
        raise MalformedRow(row_no, f"{key} is not finite", lineno)
    return value


def _stamp(rec, row_no, lineno) -> np.datetime64:
    try:
        return parse_timestamp(rec["timestamp"])
    except ValueError as exc:
        raise MalformedRow(row_no, f"bad timestamp {rec['timestamp']!r}: {exc}", lineno) from None


def _check_increasing(stamps: list, rows: list):
    for i in range(1, len(stamps)):
        if stamps[i] <= stamps[i - 1]:
            raise NonMonotonicTimestamps(rows[i], f"{stamps[i]} after {stamps[i - 1]}")


def load_irradiance_csv(path) -> IrradianceSeries:
    table = _read_table(path, IRRADIANCE_COLUMNS)
    cols = {c: [] for c in IRRADIANCE_COLUMNS}
    row_numbers = []
    for row_no, lineno, rec in table:
        cols["timestamp"].append(_stamp(rec, row_no, lineno))
        for key in IRRADIANCE_COLUMNS[1:]:
            cols[key].append(_number(rec, key, row_no, lineno))
        for key in ("ghi", "dni", "dhi"):
            if cols[key][-1] < 0:
                raise MalformedRow(row_no, f"{key}={cols[key][-1]} is negative", lineno)
        if not 0.0 <= cols["solar_zenith_deg"][-1] < 180.0:
            raise MalformedRow(row_no, "solar_zenith_deg outside [0, 180)", lineno)
        if not 0.0 <= cols["solar_azimuth_deg"][-1] < 360.0:
            raise MalformedRow(row_no, "solar_azimuth_deg outside [0, 360)", lineno)
        row_numbers.append(row_no)
    _check_increasing(cols["timestamp"], row_numbers)
    return IrradianceSeries(
        timestamps=np.array(cols["timestamp"], dtype="datetime64[s]"),
        **{k: np.array(cols[k], dtype=float) for k in IRRADIANCE_COLUMNS[1:]},
    )


def load_generation_csv(path, site_id: str, location: Location) -> PowerProfile:
    table = _read_table(path, GENERATION_COLUMNS)
    stamps, power, row_numbers = [], [], []
    for row_no, lineno, rec in table:
        stamps.append(_stamp(rec, row_no, lineno))
        p = _number(rec, "power_w", row_no, lineno)
        if p < 0:
            raise MalformedRow(row_no, f"power_w={p} is negative", lineno)
        power.append(p)
        row_numbers.append(row_no)
    _check_increasing(stamps, row_numbers)
    timestamps = np.array(stamps, dtype="datetime64[s]")
    sampling_interval(timestamps)
    return PowerProfile(site_id, location, timestamps, np.array(power, dtype=float))


def _write_rows(path, header, columns, comment: str | None):
    path = Path(path)
    with path.open("w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow(row)


def _floats(a: np.ndarray) -> list[str]:
    return [repr(x) for x in np.asarray(a, dtype=float).tolist()]


def write_irradiance_csv(path, series: IrradianceSeries, comment: str | None = None):
    columns = [[format_timestamp(t) for t in series.timestamps]]
    columns += [_floats(getattr(series, k)) for k in IRRADIANCE_COLUMNS[1:]]
    _write_rows(path, IRRADIANCE_COLUMNS, columns, comment)


def write_generation_csv(path, profile: PowerProfile, comment: str | None = None):
    columns = [[format_timestamp(t) for t in profile.timestamps], _floats(profile.power_w)]
    _write_rows(path, GENERATION_COLUMNS, columns, comment)


# ------------------------------------------------------------- solar position

def _julian_day(timestamps) -> np.ndarray:
    ts = np.asarray(timestamps, dtype="datetime64[s]")
    return (ts - EPOCH).astype(np.int64) / SECONDS_PER_DAY + 2440587.5


def solar_position_arrays(latitude: float, longitude: float, timestamps):
    """Vectorised NOAA declination / equation-of-time / hour-angle algorithm.

    No refraction correction. Agrees with NREL SPA to well under 0.1 degree for
    years near 2000. Returns ``(zenith_deg, azimuth_deg)``.
    """
    jd = _julian_day(timestamps)
    jc = (jd - 2451545.0) / 36525.0
    l0 = np.mod(280.46646 + jc * (36000.76983 + jc * 0.0003032), 360.0)
    m = 357.52911 + jc * (35999.05029 - 0.0001537 * jc)
    ecc = 0.016708634 - jc * (0.000042037 + 0.0000001267 * jc)
    m_r = np.radians(m)
    center = (np.sin(m_r) * (1.914602 - jc * (0.004817 + 0.000014 * jc))
              + np.sin(2 * m_r) * (0.019993 - 0.000101 * jc)
              + np.sin(3 * m_r) * 0.000289)
    true_long = l0 + center
    omega = np.radians(125.04 - 1934.136 * jc)
    app_long = np.radians(true_long - 0.00569 - 0.00478 * np.sin(omega))
    mean_obliq = 23.0 + (26.0 + (21.448 - jc * (46.815 + jc * (0.00059 - jc * 0.001813))) / 60.0) / 60.0
    obliq = np.radians(mean_obliq + 0.00256 * np.cos(omega))
    decl = np.arcsin(np.sin(obliq) * np.sin(app_long))

    y = np.tan(obliq / 2.0) ** 2
    l0_r = np.radians(l0)
    eot = 4.0 * np.degrees(
        y * np.sin(2 * l0_r) - 2 * ecc * np.sin(m_r) + 4 * ecc * y * np.sin(m_r) * np.cos(2 * l0_r)
        - 0.5 * y * y * np.sin(4 * l0_r) - 1.25 * ecc * ecc * np.sin(2 * m_r))

    minutes_utc = np.mod((jd - 0.5) * 1440.0, 1440.0)
    true_solar = np.mod(minutes_utc + eot + 4.0 * longitude, 1440.0)
    hour_angle = np.radians(true_solar / 4.0 - 180.0)

    lat = np.radians(latitude)
    cos_z = np.sin(lat) * np.sin(decl) + np.cos(lat) * np.cos(decl) * np.cos(hour_angle)
    zenith = np.degrees(np.arccos(np.clip(cos_z, -1.0, 1.0)))
    azimuth = np.degrees(np.arctan2(
        np.sin(hour_angle),
        np.cos(hour_angle) * np.sin(lat) - np.tan(decl) * np.cos(lat))) + 180.0
    azimuth = np.mod(azimuth, 360.0)
    azimuth = np.where(azimuth >= 360.0, azimuth - 360.0, azimuth)
    return zenith, azimuth


def solar_position(location: Location, timestamp) -> SolarPosition:
    zen, az = solar_position_arrays(location.latitude, location.longitude,
                                    np.array([timestamp], dtype="datetime64[s]"))
    return SolarPosition(float(min(zen[0], np.nextafter(180.0, 0))), float(az[0]))


# ------------------------------------------------------------------ synthesis

CLEAR_SKY_DIFFUSE_FRACTION = 0.15


def haurwitz_ghi(zenith_deg) -> np.ndarray:
    """Haurwitz clear-sky GHI, zero with the sun below the horizon."""
    cos_z = np.cos(np.radians(zenith_deg))
    up = cos_z > 0
    safe = np.where(up, cos_z, 1.0)
    return np.where(up, 1098.0 * safe * np.exp(-0.057 / safe), 0.0)


def clear_sky(zenith_deg, diffuse_fraction: float = CLEAR_SKY_DIFFUSE_FRACTION):
    """Clear-sky ``(ghi, dni, dhi)``: Haurwitz GHI split with a fixed diffuse fraction."""
    ghi = haurwitz_ghi(zenith_deg)
    cos_z = np.cos(np.radians(zenith_deg))
    dhi = diffuse_fraction * ghi
    dni = np.where(ghi > 0, (ghi - dhi) / np.where(cos_z > 0, cos_z, 1.0), 0.0)
    return ghi, dni, dhi


@dataclass(frozen=True)
class CloudModel:
    """Per-day sky condition.

    ``clear``: every day clear. ``overcast``: the listed dates lose all beam
    irradiance and keep ``transmittance`` of clear-sky GHI as diffuse.
    ``random_overcast``: each day is overcast with ``probability``, with a
    transmittance drawn uniformly from ``transmittance_range``.
    """

    kind: str = "clear"
    dates: tuple[dt.date, ...] = ()
    probability: float = 0.0
    transmittance: float = 0.3
    transmittance_range: tuple[float, float] = (0.2, 0.6)

    def __post_init__(self):
        if self.kind not in ("clear", "overcast", "random_overcast"):
            raise ValueError(f"unknown cloud model kind {self.kind!r}")
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError("cloud probability must lie in [0, 1]")

    def day_transmittance(self, days: Sequence[dt.date], rng: np.random.Generator) -> np.ndarray:
        """Transmittance per day; NaN marks a clear day."""
        out = np.full(len(days), np.nan)
        if self.kind == "overcast":
            wanted = set(self.dates)
            for i, d in enumerate(days):
                if d in wanted:
                    out[i] = self.transmittance
        elif self.kind == "random_overcast":
            cloudy = rng.random(len(days)) < self.probability
            lo, hi = self.transmittance_range
            levels = rng.uniform(lo, hi, len(days))
            out[cloudy] = levels[cloudy]
        return out


@dataclass(frozen=True)
class SyntheticScenario:
    orientation: SurfaceOrientation
    panel: PanelParams
    location: Location
    start: dt.date
    end: dt.date
    noise_std: float = 0.0
    cloud_model: CloudModel = field(default_factory=CloudModel)
    rng_seed: int = 0
    samples_per_day: int = 24
    albedo: float = solar_model.DEFAULT_ALBEDO
    cell_temp_offset_c: float = 20.0
    annual_mean_temp_c: float = 18.0
    annual_temp_amplitude_c: float = 7.0
    site_id: str = "synthetic"

    def __post_init__(self):
        if self.noise_std < 0:
            raise InvalidScenario("noise_std", "must be nonnegative")
        if self.end < self.start:
            raise InvalidScenario("date_range", "end precedes start")
        if self.samples_per_day < 1 or SECONDS_PER_DAY % self.samples_per_day:
            raise InvalidScenario("samples_per_day", "must divide 86400")

    @property
    def utc_offset_hours(self) -> int:
        return self.location.utc_offset_hours

    @classmethod
    def from_dict(cls, doc: dict) -> "SyntheticScenario":
        """Build from the JSON scenario document; errors name the offending field."""
        def need(mapping, key, prefix=""):
            if not isinstance(mapping, dict) or key not in mapping:
                raise InvalidScenario(prefix + key)
            return mapping[key]

        def num(mapping, key, prefix="", default=None):
            if default is not None and key not in mapping:
                return default
            value = need(mapping, key, prefix)
            try:
                return float(value)
            except (TypeError, ValueError):
                raise InvalidScenario(prefix + key, f"not a number: {value!r}") from None

        gt = need(doc, "ground_truth")
        loc = need(doc, "location")
        rng = need(doc, "date_range")
        try:
            orientation = SurfaceOrientation(num(gt, "azimuth_deg", "ground_truth."),
                                             num(gt, "tilt_deg", "ground_truth."))
            panel = PanelParams(
                nameplate_w=num(gt, "nameplate_w", "ground_truth."),
                temp_coeff_per_c=num(gt, "temp_coeff_per_c", "ground_truth.", -0.004),
                ref_temp_c=num(gt, "ref_temp_c", "ground_truth.", 25.0),
                derate=num(gt, "derate", "ground_truth.", 0.96),
            )
        except ValueError as exc:
            if isinstance(exc, InvalidScenario):
                raise
            raise InvalidScenario("ground_truth", str(exc)) from None
        try:
            location = Location(num(loc, "latitude", "location."), num(loc, "longitude", "location."))
        except ValueError as exc:
            if isinstance(exc, InvalidScenario):
                raise
            raise InvalidScenario("location", str(exc)) from None
        try:
            start = dt.date.fromisoformat(need(rng, "start", "date_range."))
            end = dt.date.fromisoformat(need(rng, "end", "date_range."))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, InvalidScenario):
                raise
            raise InvalidScenario("date_range", str(exc)) from None
        clouds = doc.get("cloud_model", {"kind": "clear"})
        if isinstance(clouds, str):
            clouds = {"kind": clouds}
        try:
            cloud_model = CloudModel(
                kind=clouds.get("kind", "clear"),
                dates=tuple(dt.date.fromisoformat(d) for d in clouds.get("dates", ())),
                probability=float(clouds.get("probability", 0.0)),
                transmittance=float(clouds.get("transmittance", 0.3)),
                transmittance_range=tuple(clouds.get("transmittance_range", (0.2, 0.6))),
            )
        except (AttributeError, TypeError, ValueError) as exc:
            raise InvalidScenario("cloud_model", str(exc)) from None
        if "noise_std" not in doc:
            raise InvalidScenario("noise_std")
        if "rng_seed" not in doc:
            raise InvalidScenario("rng_seed")
        extras = {k: doc[k] for k in ("samples_per_day", "albedo", "cell_temp_offset_c",
                                      "annual_mean_temp_c", "annual_temp_amplitude_c",
                                      "site_id") if k in doc}
        return cls(orientation, panel, location, start, end,
                   noise_std=num(doc, "noise_std"), cloud_model=cloud_model,
                   rng_seed=int(doc["rng_seed"]), **extras)

    def to_dict(self) -> dict:
        return {
            "ground_truth": {
                "azimuth_deg": self.orientation.azimuth_deg,
                "tilt_deg": self.orientation.tilt_deg,
                "nameplate_w": self.panel.nameplate_w,
                "temp_coeff_per_c": self.panel.temp_coeff_per_c,
                "ref_temp_c": self.panel.ref_temp_c,
                "derate": self.panel.derate,
            },
            "location": {"latitude": self.location.latitude, "longitude": self.location.longitude},
            "date_range": {"start": self.start.isoformat(), "end": self.end.isoformat()},
            "noise_std": self.noise_std,
            "cloud_model": {
                "kind": self.cloud_model.kind,
                "dates": [d.isoformat() for d in self.cloud_model.dates],
                "probability": self.cloud_model.probability,
                "transmittance": self.cloud_model.transmittance,
                "transmittance_range": list(self.cloud_model.transmittance_range),
            },
            "rng_seed": self.rng_seed,
            "samples_per_day": self.samples_per_day,
            "albedo": self.albedo,
            "cell_temp_offset_c": self.cell_temp_offset_c,
            "annual_mean_temp_c": self.annual_mean_temp_c,
            "annual_temp_amplitude_c": self.annual_temp_amplitude_c,
            "site_id": self.site_id,
        }


def local_days(timestamps, utc_offset_hours: int) -> np.ndarray:
    """Local calendar date (datetime64[D]) of each UTC timestamp."""
    ts = np.asarray(timestamps, dtype="datetime64[s]")
    return (ts + np.timedelta64(utc_offset_hours * 3600, "s")).astype("datetime64[D]")


def synthesize(scenario: SyntheticScenario) -> tuple[IrradianceSeries, PowerProfile]:
    """Generate irradiance and generation for whole local days in the date range.

    Air temperature is constant within each local day (seasonal sinusoid), so
    the temperature term of the power model only rescales a day's profile.
    """
    rng = np.random.default_rng(scenario.rng_seed)
    n = scenario.samples_per_day
    step = SECONDS_PER_DAY // n
    days = np.arange(np.datetime64(scenario.start, "D"), np.datetime64(scenario.end, "D") + 1)
    local = (days.astype("datetime64[s]")[:, None]
             + (np.arange(n) * step).astype("timedelta64[s]")[None, :])
    timestamps = (local - np.timedelta64(scenario.utc_offset_hours * 3600, "s")).ravel()

    zenith, azimuth = solar_position_arrays(scenario.location.latitude,
                                            scenario.location.longitude, timestamps)
    ghi, dni, dhi = clear_sky(zenith)

    day_list = [d.item() for d in days]
    trans = np.repeat(scenario.cloud_model.day_transmittance(day_list, rng), n)
    overcast = ~np.isnan(trans)
    ghi = np.where(overcast, ghi * np.nan_to_num(trans), ghi)
    dhi = np.where(overcast, ghi, dhi)
    dni = np.where(overcast, 0.0, dni)

    doy = np.array([d.timetuple().tm_yday for d in day_list], dtype=float)
    daily_temp = scenario.annual_mean_temp_c + scenario.annual_temp_amplitude_c * np.sin(
        2.0 * np.pi * (doy - 109.0) / 365.0)
    air_temp = np.repeat(daily_temp, n)

    irradiance = IrradianceSeries(timestamps, ghi, dni, dhi, zenith, azimuth, air_temp)
    poa = solar_model.poa_from_horizontal(zenith, azimuth, ghi, dni, dhi,
                                          scenario.orientation.azimuth_deg,
                                          scenario.orientation.tilt_deg,
                                          albedo=scenario.albedo)
    power = solar_model.ac_power(poa, air_temp + scenario.cell_temp_offset_c, scenario.panel)
    if scenario.noise_std > 0:
        power = np.maximum(power * (1.0 + scenario.noise_std * rng.standard_normal(len(power))), 0.0)
    profile = PowerProfile(scenario.site_id, scenario.location, timestamps, np.asarray(power, float))
    return irradiance, profile
