"""Annual demand trajectories and synthetic hourly load shapes."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from firmgrid.errors import ConfigurationError, InfeasibleError, TraceRangeError
from firmgrid.tracefile import HOURS, read_trace, write_trace


@dataclass(frozen=True)
class AnnualDemandTrajectory:
    base_year: int
    values: tuple[float, ...]  # TWh, one per contiguous year from base_year

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValueError("trajectory needs at least one year")
        if any(v <= 0 for v in self.values):
            raise ValueError("annual demand must be positive")

    @property
    def years(self) -> list[int]:
        return list(range(self.base_year, self.base_year + len(self.values)))

    @property
    def final(self) -> float:
        return self.values[-1]

    def __getitem__(self, year: int) -> float:
        k = year - self.base_year
        if not 0 <= k < len(self.values):
            raise KeyError(year)
        return self.values[k]

    def get(self, year: int, default=None):
        try:
            return self[year]
        except KeyError:
            return default

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.years, self.values))


@dataclass(frozen=True)
class DemandScenario:
    name: str
    base_energy: float  # TWh/yr
    annual_growth_rate: float
    peak: float  # GW

    def __post_init__(self):
        if self.base_energy <= 0:
            raise ValueError("base_energy must be positive")
        if self.peak * HOURS / 1000.0 < self.base_energy * (1 - 1e-12):
            raise InfeasibleError(
                f"peak {self.peak} GW is below the implied average "
                f"{self.base_energy * 1000.0 / HOURS:.2f} GW"
            )

    def trajectory(self, years: int, base_year: int = 2022) -> AnnualDemandTrajectory:
        return extrapolate(self.base_energy, self.annual_growth_rate, years, base_year)


BASELINE_SCENARIO = DemandScenario("current", 222.0, -0.005, 35.0)


def extrapolate(base: float, rate: float, n: int, base_year: int = 2022) -> AnnualDemandTrajectory:
    """Compound growth: ``base * (1 + rate) ** k`` for ``k = 0 .. n``."""
    if rate <= -1:
        raise ValueError(f"invalid growth rate {rate}")
    if n < 0:
        raise ValueError("n must be non-negative")
    return AnnualDemandTrajectory(base_year, tuple(base * (1 + rate) ** k for k in range(n + 1)))


@dataclass(frozen=True)
class DemandBand:
    years: tuple[int, ...]
    low: tuple[float, ...]
    high: tuple[float, ...]

    def gap(self, year: int) -> float:
        k = self.years.index(year)
        return self.high[k] - self.low[k]


def envelope(a: AnnualDemandTrajectory, b: AnnualDemandTrajectory) -> DemandBand:
    if a.years != b.years:
        raise ValueError("trajectories must cover identical year spans")
    return DemandBand(
        tuple(a.years),
        tuple(min(x, y) for x, y in zip(a.values, b.values)),
        tuple(max(x, y) for x, y in zip(a.values, b.values)),
    )


@dataclass(frozen=True)
class ShapeParams:
    """Load shape: seasonal cosine x two-peak diurnal profile x weekly dip x noise.

    ``winter_peak_day`` defaults to mid-July (southern-hemisphere winter).
    ``flat=True`` yields a constant trace at the annual average.
    """

    seasonal_amplitude: float = 0.08
    winter_peak_day: int = 196
    morning_peak_hour: float = 7.5
    morning_amplitude: float = 0.18
    evening_peak_hour: float = 18.5
    evening_amplitude: float = 0.28
    night_depth: float = 0.15
    weekend_factor: float = 0.93
    noise_std: float = 0.015
    flat: bool = False


def _hour_bump(hour: np.ndarray, centre: float, width: float) -> np.ndarray:
    d = np.abs(hour - centre)
    d = np.minimum(d, 24 - d)
    return np.exp(-0.5 * (d / width) ** 2)


def load_shape(params: ShapeParams, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(HOURS)
    day = t // 24
    hour = (t % 24).astype(float)
    seasonal = 1 + params.seasonal_amplitude * np.cos(
        2 * np.pi * (day - params.winter_peak_day) / 365.0
    )
    diurnal = (
        1
        + params.morning_amplitude * _hour_bump(hour, params.morning_peak_hour, 1.5)
        + params.evening_amplitude * _hour_bump(hour, params.evening_peak_hour, 2.0)
        - params.night_depth * _hour_bump(hour, 3.0, 2.5)
    )
    weekly = np.where(day % 7 >= 5, params.weekend_factor, 1.0)
    noise = 1 + params.noise_std * rng.standard_normal(HOURS)
    return seasonal * diurnal * weekly * noise


def synthesize_hourly(
    annual_twh: float,
    peak_gw: float,
    shape: ShapeParams = ShapeParams(),
    seed: int = 0,
) -> np.ndarray:
    """8760-hour load trace in MW whose sum is ``annual_twh`` and max is ``peak_gw``.

    The raw shape is mapped affinely, ``a + b * shape``, which hits both targets
    exactly; a shape too peaky to do so without negative load is rejected.
    """
    mean_mw = annual_twh * 1e6 / HOURS
    peak_mw = peak_gw * 1000.0
    if peak_mw < mean_mw * (1 - 1e-12):
        raise InfeasibleError(
            f"peak {peak_gw} GW is below the implied average {mean_mw / 1000:.3f} GW"
        )
    if shape.flat or np.isclose(peak_mw, mean_mw, rtol=1e-12, atol=0.0):
        return np.full(HOURS, mean_mw)
    raw = load_shape(shape, np.random.default_rng(seed))
    raw_mean = raw.mean()
    scale = (peak_mw - mean_mw) / (raw.max() - raw_mean)
    trace = mean_mw + scale * (raw - raw_mean)
    if trace.min() < 0:
        raise InfeasibleError("peak-to-average ratio too high for this load shape")
    return trace


def read_hourly_demand(path) -> np.ndarray:
    values, _ = read_trace(path)
    if np.any(values < 0):
        raise TraceRangeError(f"{path}: negative demand")
    return values


def write_hourly_demand(path, trace) -> None:
    write_trace(path, trace)


def read_trajectory(path) -> AnnualDemandTrajectory:
    """Two-column CSV (year, TWh) with a header row; years must be contiguous."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ConfigurationError(f"{path}: empty trajectory file")
    data = rows[1:] if not rows[0][0].strip().lstrip("-").isdigit() else rows
    try:
        pairs = [(int(r[0]), float(r[1])) for r in data]
    except (ValueError, IndexError) as exc:
        raise ConfigurationError(f"{path}: {exc}") from exc
    pairs.sort()
    years = [y for y, _ in pairs]
    if years != list(range(years[0], years[0] + len(years))):
        raise ConfigurationError(f"{path}: years must be contiguous")
    return AnnualDemandTrajectory(years[0], tuple(v for _, v in pairs))


def write_trajectory(path, traj: AnnualDemandTrajectory) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("year,twh\n")
        for y, v in zip(traj.years, traj.values):
            fh.write(f"{y},{v!r}\n")


def _bundled(name: str) -> Path:
    return Path(str(resources.files("firmgrid") / "data" / name))


def historical_generation() -> AnnualDemandTrajectory:
    """Eskom annual generation 2010-2023 (illustrative except the 2022 point)."""
    return read_trajectory(_bundled("eskom_generation_history.csv"))


def irp2010_forecast() -> AnnualDemandTrajectory:
    """IRP 2010 demand forecast over the same span, anchored at 385 TWh in 2022."""
    return read_trajectory(_bundled("irp2010_forecast.csv"))
