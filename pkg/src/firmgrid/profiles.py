"""Synthetic and ingested wind/solar capacity-factor traces, and renewable-drought detection."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.signal import lfilter

from firmgrid.errors import ConfigurationError, InfeasibleError, TraceRangeError
from firmgrid.tracefile import HOURS, read_trace, write_trace

TECHNOLOGIES = ("wind", "solar")


@dataclass(frozen=True, eq=False)
class CapacityFactorTrace:
    technology: str
    values: np.ndarray

    def __post_init__(self):
        if self.technology not in TECHNOLOGIES:
            raise ValueError(f"unknown technology {self.technology!r}")
        arr = np.array(self.values, dtype=float)
        if arr.shape != (HOURS,):
            raise ValueError(f"trace must have {HOURS} values, got {arr.shape}")
        if np.any(arr < 0) or np.any(arr > 1):
            raise TraceRangeError("capacity factors must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def mean(self) -> float:
        return float(self.values.mean())


@dataclass(frozen=True)
class SolarParams:
    latitude_deg: float = -29.0
    clear_sky_alpha: float = 5.0  # daily attenuation ~ Beta(alpha, beta)
    clear_sky_beta: float = 1.5
    min_attenuation: float = 0.1


@dataclass(frozen=True)
class WindParams:
    """AR(1) anomaly around a level solved for the target mean, clamped to [0, 1].

    ``persistence`` is the hourly lag-1 autocorrelation (0.98 gives an
    e-folding time of about 50 h) and ``volatility`` the stationary standard
    deviation of the anomaly. The default volatility puts about 9 TWh/yr on
    15 GW of firm plant in the renewable end-state mix.
    """

    persistence: float = 0.98
    volatility: float = 0.08
    seasonal_amplitude: float = 0.03
    windiest_day: int = 196


def clear_sky_envelope(latitude_deg: float = -29.0) -> np.ndarray:
    """Cosine of the solar zenith at each hour midpoint (local solar time), floored at 0."""
    t = np.arange(HOURS)
    day = t // 24 + 1
    hour = t % 24 + 0.5
    lat = np.radians(latitude_deg)
    decl = np.radians(23.44) * np.sin(2 * np.pi * (284 + day) / 365.0)
    omega = np.radians(15.0 * (hour - 12.0))
    cosz = np.sin(lat) * np.sin(decl) + np.cos(lat) * np.cos(decl) * np.cos(omega)
    return np.maximum(cosz, 0.0)


def _solve_level(fn, target: float, lo: float, hi: float) -> float:
    return brentq(lambda k: fn(k) - target, lo, hi, xtol=1e-14, rtol=1e-14, maxiter=500)


def synth_solar(target_mean_cf: float, seed: int, params: SolarParams = SolarParams()) -> CapacityFactorTrace:
    """Clear-sky diurnal envelope times a seeded daily attenuation, scaled to the target mean.

    Output saturates at 1, so the reachable mean is capped by the daylight
    fraction of the year.
    """
    if not 0 < target_mean_cf < 0.5:
        raise ValueError("solar target mean must lie in (0, 0.5)")
    rng = np.random.default_rng(seed)
    daily = rng.beta(params.clear_sky_alpha, params.clear_sky_beta, size=HOURS // 24)
    daily = np.maximum(daily, params.min_attenuation)
    raw = clear_sky_envelope(params.latitude_deg) * np.repeat(daily, 24)
    ceiling = float((raw > 0).mean())
    if target_mean_cf >= ceiling - 1e-6:
        raise InfeasibleError(
            f"target {target_mean_cf} not reachable; daylight fraction is {ceiling:.3f}"
        )

    def mean_at(k):
        return float(np.minimum(k * raw, 1.0).mean())

    hi = 1.0
    while mean_at(hi) < target_mean_cf:
        hi *= 2.0
    k = _solve_level(mean_at, target_mean_cf, 0.0, hi)
    return CapacityFactorTrace("solar", np.minimum(k * raw, 1.0))


def synth_wind(target_mean_cf: float, seed: int, params: WindParams = WindParams()) -> CapacityFactorTrace:
    if not 0 < target_mean_cf < 0.7:
        raise ValueError("wind target mean must lie in (0, 0.7)")
    rng = np.random.default_rng(seed)
    phi = params.persistence
    innov = params.volatility * np.sqrt(1 - phi**2) * rng.standard_normal(HOURS)
    innov[0] = params.volatility * rng.standard_normal()  # stationary start
    anomaly = lfilter([1.0], [1.0, -phi], innov)
    day = np.arange(HOURS) // 24
    anomaly += params.seasonal_amplitude * np.cos(2 * np.pi * (day - params.windiest_day) / 365.0)

    def mean_at(level):
        return float(np.clip(level + anomaly, 0.0, 1.0).mean())

    level = _solve_level(mean_at, target_mean_cf, -2.0, 3.0)
    return CapacityFactorTrace("wind", np.clip(level + anomaly, 0.0, 1.0))


def _technology_from_name(path: Path) -> Optional[str]:
    name = path.name.lower()
    hits = [t for t in TECHNOLOGIES if t in name]
    return hits[0] if len(hits) == 1 else None


def ingest_trace(path, technology: Optional[str] = None) -> CapacityFactorTrace:
    """Read a capacity-factor trace.

    The technology comes from the argument, else a ``# technology: wind``
    header line, else the filename (``*wind*`` / ``*solar*``).
    """
    path = Path(path)
    values, meta = read_trace(path)
    bad = np.flatnonzero((values < 0) | (values > 1))
    if bad.size:
        raise TraceRangeError(f"{path}: value {values[bad[0]]} at row {bad[0] + 1} outside [0, 1]")
    tech = technology or meta.get("technology") or _technology_from_name(path)
    if tech is None:
        raise ConfigurationError(f"{path}: cannot tell whether this is a wind or solar trace")
    return CapacityFactorTrace(tech, values)


def write_profile(path, trace: CapacityFactorTrace) -> None:
    write_trace(path, trace.values, {"technology": trace.technology})


@dataclass(frozen=True)
class DeficitPeriod:
    start_hour: int
    end_hour: int  # inclusive
    mean_deficit: float  # GW

    @property
    def hours(self) -> int:
        return self.end_hour - self.start_hour + 1


def detect_droughts(renewable_mw, demand_mw, firm_threshold_mw: float) -> list[DeficitPeriod]:
    """Maximal runs of hours where demand minus renewable supply exceeds the threshold."""
    renewable = np.asarray(renewable_mw, dtype=float)
    demand = np.asarray(demand_mw, dtype=float)
    if renewable.shape != demand.shape:
        raise ValueError("renewable and demand traces differ in length")
    if firm_threshold_mw < 0:
        raise ValueError("firm threshold must be non-negative")
    deficit = demand - renewable
    mask = deficit > firm_threshold_mw
    if not mask.any():
        return []
    edges = np.diff(np.concatenate(([0], mask.astype(np.int8), [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return [
        DeficitPeriod(int(s), int(e), float(deficit[s : e + 1].mean() / 1000.0))
        for s, e in zip(starts, ends)
    ]
