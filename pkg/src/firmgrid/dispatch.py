"""Chronological hourly merit-order dispatch with battery storage and firm generation.

Merit order each hour: wind + solar, then baseload (capacity x availability),
then storage discharge, then firm-dispatchable plant; whatever remains is
unserved. Storage charges only from renewable surplus. Surplus that cannot be
stored is curtailed.

Storage losses are split evenly between the legs: charging stores
``charge * sqrt(rte)`` and delivering ``discharge`` draws ``discharge / sqrt(rte)``
from the store, so the round trip returns ``rte``. ``soc`` is end-of-hour.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from firmgrid.errors import UndefinedInputError
from firmgrid.profiles import CapacityFactorTrace
from firmgrid.tracefile import HOURS


@dataclass(frozen=True)
class GenerationMix:
    baseload_capacity: float = 0.0  # GW
    baseload_availability: float = 1.0
    wind_capacity: float = 0.0  # GW
    solar_capacity: float = 0.0  # GW
    storage_power: float = 0.0  # GW
    storage_energy: float = 0.0  # GWh
    storage_round_trip_efficiency: float = 0.85
    firm_capacity: float = 0.0  # GW

    def __post_init__(self):
        for name in (
            "baseload_capacity",
            "wind_capacity",
            "solar_capacity",
            "storage_power",
            "storage_energy",
            "firm_capacity",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 <= self.baseload_availability <= 1:
            raise ValueError("baseload availability must lie in [0, 1]")
        if not 0 < self.storage_round_trip_efficiency <= 1:
            raise ValueError("round-trip efficiency must lie in (0, 1]")

    @property
    def leg_efficiency(self) -> float:
        return math.sqrt(self.storage_round_trip_efficiency)


# Renewable end state with the retained baseload (Medupi, Kusile, hydro).
END_STATE_MIX = GenerationMix(
    baseload_capacity=12.9,
    baseload_availability=0.70,
    wind_capacity=49.0,
    solar_capacity=14.0,
    storage_power=6.0,
    storage_energy=24.0,
    firm_capacity=15.0,
)


@dataclass(frozen=True)
class UnservedStats:
    energy: float  # TWh
    hours: int
    max_consecutive: int


@dataclass(frozen=True, eq=False)
class DispatchResult:
    """Hourly dispatch in MW (``soc`` in MWh, end of hour)."""

    mix: GenerationMix
    demand: np.ndarray
    wind: np.ndarray  # available wind output
    solar: np.ndarray  # available solar output
    baseload: np.ndarray
    charge: np.ndarray
    discharge: np.ndarray
    soc: np.ndarray
    firm: np.ndarray
    unserved: np.ndarray
    curtailment: np.ndarray
    initial_soc: float = 0.0  # MWh

    def energy_by_class(self) -> dict[str, float]:
        """Annual energy in TWh; wind and solar net of curtailment and charging."""
        served_renewable = self.wind + self.solar - self.curtailment - self.charge
        return {
            "renewable": float(served_renewable.sum() / 1e6),
            "baseload": float(self.baseload.sum() / 1e6),
            "storage_discharge": float(self.discharge.sum() / 1e6),
            "firm": float(self.firm.sum() / 1e6),
            "unserved": float(self.unserved.sum() / 1e6),
            "curtailment": float(self.curtailment.sum() / 1e6),
            "storage_charge": float(self.charge.sum() / 1e6),
            "demand": float(self.demand.sum() / 1e6),
        }

    def balance_residual(self) -> np.ndarray:
        """Relative hourly balance error."""
        supply = (
            self.wind
            + self.solar
            + self.baseload
            + self.discharge
            + self.firm
            + self.unserved
            - self.charge
            - self.curtailment
        )
        return np.abs(supply - self.demand) / np.maximum(np.abs(self.demand), 1.0)

    def summary(self) -> dict:
        stats = unserved_stats(self)
        energy = self.energy_by_class()
        return {
            "energy_twh": energy,
            "firm_utilization": (
                firm_utilization(self, self.mix.firm_capacity) / 100.0
                if self.mix.firm_capacity > 0
                else 0.0
            ),
            "unserved_energy_twh": stats.energy,
            "load_shedding_hours": stats.hours,
            "max_consecutive_deficit_hours": stats.max_consecutive,
        }

    def to_csv(self, path) -> None:
        cols = ("demand", "wind", "solar", "baseload", "charge", "discharge", "soc", "firm", "unserved", "curtailment")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("hour",) + tuple(f"{c}_mwh" if c == "soc" else f"{c}_mw" for c in cols))
            arrays = [getattr(self, c) for c in cols]
            for h in range(len(self.demand)):
                writer.writerow([h] + [repr(float(a[h])) for a in arrays])

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.summary(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _as_array(trace) -> np.ndarray:
    if isinstance(trace, CapacityFactorTrace):
        return trace.values
    return np.asarray(trace, dtype=float)


def simulate_year(
    demand,
    mix: GenerationMix,
    wind_trace,
    solar_trace,
    initial_soc: float = 0.5,
) -> DispatchResult:
    """Dispatch one year (or any equal-length horizon) hour by hour.

    ``initial_soc`` is a fraction of ``mix.storage_energy``.
    """
    demand = np.asarray(demand, dtype=float)
    wind_cf = _as_array(wind_trace)
    solar_cf = _as_array(solar_trace)
    n = demand.shape[0]
    if demand.ndim != 1 or wind_cf.shape != (n,) or solar_cf.shape != (n,):
        raise ValueError(
            f"trace length mismatch: demand {demand.shape}, wind {wind_cf.shape}, solar {solar_cf.shape}"
        )
    if not 0 <= initial_soc <= 1:
        raise ValueError("initial_soc must be a fraction in [0, 1]")

    wind = mix.wind_capacity * 1000.0 * wind_cf
    solar = mix.solar_capacity * 1000.0 * solar_cf
    renewable = wind + solar
    used = np.minimum(renewable, demand)
    surplus = renewable - used
    residual = demand - used
    baseload = np.minimum(mix.baseload_capacity * 1000.0 * mix.baseload_availability, residual)
    residual = residual - baseload

    charge = np.zeros(n)
    discharge = np.zeros(n)
    soc = np.zeros(n)
    energy_cap = mix.storage_energy * 1000.0
    soc0 = initial_soc * energy_cap
    if mix.storage_power > 0 and energy_cap > 0:
        power = mix.storage_power * 1000.0
        eta = mix.leg_efficiency
        level = soc0
        res_l = residual.tolist()
        sur_l = surplus.tolist()
        for h in range(n):
            need = res_l[h]
            if need > 0:
                out = min(need, power, level * eta)
                level = max(level - out / eta, 0.0)
                discharge[h] = out
            else:
                inflow = min(sur_l[h], power, (energy_cap - level) / eta)
                level = min(level + inflow * eta, energy_cap)
                charge[h] = inflow
            soc[h] = level
        residual = residual - discharge
    else:
        soc[:] = soc0

    firm = np.minimum(mix.firm_capacity * 1000.0, residual)
    unserved = residual - firm
    return DispatchResult(
        mix=mix,
        demand=demand,
        wind=wind,
        solar=solar,
        baseload=baseload,
        charge=charge,
        discharge=discharge,
        soc=soc,
        firm=firm,
        unserved=unserved,
        curtailment=surplus - charge,
        initial_soc=soc0,
    )


def firm_utilization(result: DispatchResult, firm_capacity: float) -> float:
    """Firm-plant capacity factor in percent over the simulated hours."""
    if firm_capacity <= 0:
        raise UndefinedInputError("firm capacity must be positive")
    return 100.0 * float(result.firm.sum()) / (firm_capacity * 1000.0 * len(result.firm))


def unserved_stats(result: DispatchResult) -> UnservedStats:
    short = result.unserved > 0
    longest = run = 0
    for flag in short.tolist():
        run = run + 1 if flag else 0
        longest = max(longest, run)
    return UnservedStats(
        energy=float(result.unserved.sum() / 1e6),
        hours=int(short.sum()),
        max_consecutive=longest,
    )


def firm_duration_curve(result: DispatchResult) -> np.ndarray:
    """Firm output sorted from highest to lowest hour, MW."""
    return np.sort(result.firm)[::-1]
