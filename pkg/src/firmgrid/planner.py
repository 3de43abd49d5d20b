"""Replacement sizing, firm-capacity floor accounting, build scheduling, site
reuse and replanning."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from firmgrid.demand import AnnualDemandTrajectory
from firmgrid.errors import InfeasibleError, UndefinedInputError
from firmgrid.fleet import TECHNOLOGIES, EafModel, Fleet

SCHEMA_VERSION = 1
DEFAULT_MAX_ANNUAL_RATE = 2.5  # GW/yr of firm commissioning
DEFAULT_MAX_PLANT_GW = 1.5
FIRM_TECHNOLOGY = "ocgt"
_EPS = 1e-9


def replacement_capacity(decommissioned: float, legacy_cf: float, new_eaf: float) -> float:
    """Capacity of new plant delivering the same energy as the retired plant."""
    if new_eaf <= 0:
        raise UndefinedInputError("new_eaf must be positive")
    return decommissioned * legacy_cf / new_eaf


# How each technology counts toward the firm floor: "derated" (nameplate x EAF),
# "nameplate", or "excluded".
FLOOR_CONVENTIONS: dict[str, dict[str, str]] = {
    "derated": {
        "coal": "derated",
        "nuclear": "derated",
        "hydro": "nameplate",
        "pumped_storage": "nameplate",
        "ocgt": "nameplate",
    },
    # Energy-limited pumped storage and fuel-constrained legacy peakers left out.
    "baseload_only": {
        "coal": "derated",
        "nuclear": "derated",
        "hydro": "nameplate",
    },
    "nameplate": {
        "coal": "nameplate",
        "nuclear": "nameplate",
        "hydro": "nameplate",
        "pumped_storage": "nameplate",
        "ocgt": "nameplate",
    },
}
DEFAULT_CONVENTION = "derated"


def _convention(convention) -> Mapping[str, str]:
    if isinstance(convention, str):
        try:
            return FLOOR_CONVENTIONS[convention]
        except KeyError:
            raise ValueError(f"unknown floor convention {convention!r}") from None
    return convention


def effective_firm_capacity(fleet: Fleet, year: int, convention=DEFAULT_CONVENTION) -> float:
    rules = _convention(convention)
    total = 0.0
    for p in fleet.plants:
        rule = rules.get(p.tech.id, "excluded")
        if rule == "excluded" or not p.active(year):
            continue
        if rule == "derated":
            total += p.nameplate * fleet.eaf_models[p.tech.id].for_plant(p, year)
        else:
            total += p.nameplate
    return total / 1000.0


def firm_floor_gap(fleet: Fleet, year: int, floor: float, convention=DEFAULT_CONVENTION) -> float:
    """Shortfall in GW of effective firm capacity below ``floor``."""
    if floor < 0:
        raise ValueError("floor must be non-negative")
    return max(0.0, floor - effective_firm_capacity(fleet, year, convention))


def floor_gap_by_convention(fleet: Fleet, year: int, floor: float) -> dict[str, float]:
    return {name: firm_floor_gap(fleet, year, floor, name) for name in FLOOR_CONVENTIONS}


@dataclass(frozen=True)
class ProgramTargets:
    horizon: int = 25
    firm_target: float = 15.0  # GW
    wind: float = 49.0  # GW
    solar: float = 14.0  # GW
    storage: float = 24.0  # GWh
    firm_floor: float = 35.0  # GW

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1 year")
        for name in ("firm_target", "wind", "solar", "storage", "firm_floor"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class BuildEntry:
    year: int
    technology: str
    capacity: float
    unit: str = "GW"
    site_id: Optional[str] = None

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError("schedule capacities must be positive")


@dataclass(frozen=True)
class PlanBasis:
    """What the schedule assumed: fleet (with EAF models), demand outlook and
    the floor accounting convention."""

    fleet: Fleet
    demand: Optional[AnnualDemandTrajectory] = None
    base_energy: float = 222.0  # TWh the floor is sized against
    convention: str = DEFAULT_CONVENTION

    def demand_scale(self, year: int) -> float:
        if self.demand is None:
            return 1.0
        years = self.demand.years
        y = min(max(year, years[0]), years[-1])
        return self.demand[y] / self.base_energy

    def requirement(self, year: int, floor: float) -> float:
        """New firm capacity needed in ``year`` to hold the (demand-scaled) floor."""
        need = floor * self.demand_scale(year)
        return max(0.0, need - effective_firm_capacity(self.fleet, year, self.convention))


@dataclass(frozen=True)
class Observations:
    demand: Optional[AnnualDemandTrajectory] = None
    eaf_models: Optional[Mapping[str, EafModel]] = None
    decommission_changes: Optional[Mapping[str, int]] = None

    def apply(self, basis: PlanBasis) -> PlanBasis:
        fleet = basis.fleet
        if self.decommission_changes:
            fleet = fleet.with_decommission_changes(self.decommission_changes)
        if self.eaf_models:
            fleet = fleet.with_eaf_models(self.eaf_models)
        demand = self.demand if self.demand is not None else basis.demand
        return replace(basis, fleet=fleet, demand=demand)


@dataclass(frozen=True, eq=False)
class BuildSchedule:
    entries: tuple[BuildEntry, ...]
    start_year: int = 2022
    horizon: int = 25
    basis: Optional[PlanBasis] = None
    residual_gap: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        entries = tuple(sorted(self.entries, key=lambda e: (e.year, e.technology, e.site_id or "")))
        end = self.start_year + self.horizon
        for e in entries:
            if not self.start_year < e.year <= end:
                raise ValueError(f"entry year {e.year} outside {self.start_year + 1}..{end}")
        object.__setattr__(self, "entries", entries)

    @property
    def end_year(self) -> int:
        return self.start_year + self.horizon

    @property
    def years(self) -> range:
        return range(self.start_year + 1, self.end_year + 1)

    def total(self, technology: str) -> float:
        return sum(e.capacity for e in self.entries if e.technology == technology)

    def by_year(self, technology: str) -> dict[int, float]:
        out = {y: 0.0 for y in self.years}
        for e in self.entries:
            if e.technology == technology:
                out[e.year] += e.capacity
        return out

    def average_annual(self, technology: str) -> float:
        """Mean additions per year over the whole program horizon."""
        return self.total(technology) / self.horizon

    def average_over_commissioning_years(self, technology: str) -> float:
        years = {e.year for e in self.entries if e.technology == technology}
        return self.total(technology) / len(years) if years else 0.0

    def same_entries(self, other: "BuildSchedule", tol: float = 1e-9) -> bool:
        if len(self.entries) != len(other.entries):
            return False
        return all(
            (a.year, a.technology, a.unit, a.site_id) == (b.year, b.technology, b.unit, b.site_id)
            and abs(a.capacity - b.capacity) <= tol
            for a, b in zip(self.entries, other.entries)
        )

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "start_year": self.start_year,
            "horizon": self.horizon,
            "entries": [
                {
                    "year": e.year,
                    "technology": e.technology,
                    "capacity": e.capacity,
                    "unit": e.unit,
                    "site_id": e.site_id,
                }
                for e in self.entries
            ],
            "residual_gap": {str(y): g for y, g in sorted(self.residual_gap.items())},
        }

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("year", "technology", "capacity", "unit", "site_id"))
            for e in self.entries:
                writer.writerow((e.year, e.technology, repr(e.capacity), e.unit, e.site_id or ""))

    @classmethod
    def from_csv(cls, path, start_year: int = 2022, horizon: int = 25) -> "BuildSchedule":
        with open(path, newline="", encoding="utf-8") as fh:
            entries = [
                BuildEntry(
                    int(r["year"]),
                    r["technology"],
                    float(r["capacity"]),
                    r["unit"],
                    r["site_id"] or None,
                )
                for r in csv.DictReader(fh)
            ]
        return cls(tuple(entries), start_year, horizon)


def _lead(technology: str, lead_times: Optional[Mapping[str, int]]) -> int:
    if lead_times and technology in lead_times:
        return int(lead_times[technology])
    return TECHNOLOGIES[technology].construction_lead_time


def _first_year(start_year: int, lead: int) -> int:
    # Program year k covers calendar year start_year + k, k = 1 .. horizon.
    return start_year + max(lead, 1)


def firm_program(
    firm_target: float,
    initial_gap: float,
    horizon: int,
    lead: int,
    start_year: int = 2022,
    max_annual_rate: float = DEFAULT_MAX_ANNUAL_RATE,
    technology: str = FIRM_TECHNOLOGY,
) -> list[BuildEntry]:
    """Firm additions: the gap caught up at ``max_annual_rate`` from the first
    year the lead time allows, then the rest of the target spread evenly."""
    if initial_gap < 0:
        raise ValueError("initial gap must be non-negative")
    if firm_target <= 0:
        if initial_gap > 0:
            raise InfeasibleError("a shortfall cannot be closed with a zero firm target")
        return []
    if lead >= horizon:
        raise InfeasibleError(f"lead time {lead} y leaves no commissioning year in a {horizon} y horizon")
    if initial_gap > firm_target + _EPS:
        raise InfeasibleError(
            f"initial gap {initial_gap} GW exceeds the firm target {firm_target} GW"
        )
    if max_annual_rate <= 0:
        raise ValueError("max_annual_rate must be positive")
    years = list(range(_first_year(start_year, lead), start_year + horizon + 1))
    adds = dict.fromkeys(years, 0.0)
    remaining_gap = initial_gap
    i = 0
    while remaining_gap > _EPS:
        if i >= len(years):
            raise InfeasibleError(
                f"gap of {initial_gap} GW cannot be recovered at {max_annual_rate} GW/yr "
                f"within the horizon"
            )
        step = min(max_annual_rate, remaining_gap)
        adds[years[i]] = step
        remaining_gap -= step
        i += 1
    rest = firm_target - min(initial_gap, firm_target)
    if rest > _EPS:
        tail = years[i:]
        if not tail:
            raise InfeasibleError("no years left after the catch-up for the remaining target")
        per_year = rest / len(tail)
        if per_year > max_annual_rate + _EPS:
            raise InfeasibleError(
                f"remaining {rest} GW needs {per_year:.3f} GW/yr, above the {max_annual_rate} GW/yr limit"
            )
        for y in tail:
            adds[y] = per_year
    return [BuildEntry(y, technology, c, "GW") for y, c in adds.items() if c > _EPS]


def renewable_buildout(
    targets: ProgramTargets,
    horizon: Optional[int] = None,
    start_year: int = 2022,
    lead_times: Optional[Mapping[str, int]] = None,
) -> BuildSchedule:
    """Even annual increments reaching the wind, solar and storage end state."""
    horizon = targets.horizon if horizon is None else horizon
    if horizon < 1:
        raise ValueError("horizon must be at least 1 year")
    entries = []
    for tech, amount, unit in (
        ("wind", targets.wind, "GW"),
        ("solar", targets.solar, "GW"),
        ("bess", targets.storage, "GWh"),
    ):
        if amount <= 0:
            continue
        first = _first_year(start_year, _lead(tech, lead_times))
        years = range(first, start_year + horizon + 1)
        if not years:
            raise InfeasibleError(f"{tech}: lead time leaves no commissioning year")
        entries.extend(BuildEntry(y, tech, amount / len(years), unit) for y in years)
    return BuildSchedule(tuple(entries), start_year, horizon)


def build_program(
    targets: ProgramTargets,
    initial_gap: float = 0.0,
    lead_times: Optional[Mapping[str, int]] = None,
    start_year: int = 2022,
    max_annual_rate: float = DEFAULT_MAX_ANNUAL_RATE,
    basis: Optional[PlanBasis] = None,
) -> BuildSchedule:
    firm = firm_program(
        targets.firm_target,
        initial_gap,
        targets.horizon,
        _lead(FIRM_TECHNOLOGY, lead_times),
        start_year,
        max_annual_rate,
    )
    renewables = renewable_buildout(targets, targets.horizon, start_year, lead_times)
    return BuildSchedule(tuple(firm) + renewables.entries, start_year, targets.horizon, basis)


# -- site reuse -----------------------------------------------------------


@dataclass(frozen=True)
class RetiredSite:
    site_id: str
    capacity: float  # GW of retired nameplate
    retirement_year: int


@dataclass(frozen=True)
class NewPlant:
    year: int
    capacity: float  # GW


@dataclass(frozen=True)
class SiteAssignment:
    assigned: dict[str, float]
    placements: tuple[tuple[NewPlant, str], ...]
    unassigned: tuple[NewPlant, ...]

    @property
    def total_assigned(self) -> float:
        return sum(self.assigned.values())

    @property
    def total_unassigned(self) -> float:
        return sum(p.capacity for p in self.unassigned)


def retired_sites(fleet: Fleet, start_year: int, end_year: int, technology: str = "coal") -> list[RetiredSite]:
    return [
        RetiredSite(p.site_id, p.nameplate / 1000.0, p.decommission_year)
        for p in fleet.select(technology=technology)
        if p.active(start_year) and p.decommission_year <= end_year
    ]


def split_into_plants(
    entries: Iterable[BuildEntry],
    max_plant_gw: float = DEFAULT_MAX_PLANT_GW,
    technology: str = FIRM_TECHNOLOGY,
) -> list[NewPlant]:
    """Break annual firm additions into equal plants no larger than ``max_plant_gw``."""
    plants = []
    for e in entries:
        if e.technology != technology:
            continue
        n = max(1, math.ceil(e.capacity / max_plant_gw - _EPS))
        plants.extend(NewPlant(e.year, e.capacity / n) for _ in range(n))
    return plants


def assign_sites(retired: Sequence[RetiredSite], new_firm: Sequence) -> SiteAssignment:
    """Place each new plant whole on the eligible site with the most headroom.

    ``new_firm`` holds NewPlant items or schedule entries (each entry is one
    plant). A site is eligible once its coal plant has retired (retirement
    year on or before commissioning). Plants that fit nowhere are reported
    unassigned.
    """
    new_firm = [p if isinstance(p, NewPlant) else NewPlant(p.year, p.capacity) for p in new_firm]
    headroom = {}
    retire_year = {}
    for s in retired:
        headroom[s.site_id] = headroom.get(s.site_id, 0.0) + s.capacity
        retire_year[s.site_id] = max(retire_year.get(s.site_id, s.retirement_year), s.retirement_year)
    assigned = dict.fromkeys(headroom, 0.0)
    placements = []
    unassigned = []
    for plant in sorted(new_firm, key=lambda p: p.year):
        eligible = [sid for sid in headroom if retire_year[sid] <= plant.year]
        best = min(eligible, key=lambda sid: (-(headroom[sid] - assigned[sid]), sid), default=None)
        if best is not None and headroom[best] - assigned[best] >= plant.capacity - _EPS:
            assigned[best] += plant.capacity
            placements.append((plant, best))
        else:
            unassigned.append(plant)
    return SiteAssignment(
        {sid: gw for sid, gw in assigned.items() if gw > 0}, tuple(placements), tuple(unassigned)
    )


# -- replanning -----------------------------------------------------------


def replan(
    current: BuildSchedule,
    observed: Observations,
    targets: ProgramTargets,
    as_of_year: int,
    lead_times: Optional[Mapping[str, int]] = None,
    max_annual_rate: float = DEFAULT_MAX_ANNUAL_RATE,
    enforce_floor: bool = False,
) -> BuildSchedule:
    """Revise future firm additions after observing demand, EAF or retirement changes.

    Entries up to ``as_of_year`` are kept. The change in the floor requirement
    between the schedule's basis and the observed basis is added to the
    cumulative future firm additions (never going below zero and never undoing
    a year already reached). New capacity above what was already scheduled
    cannot commission inside the lead time and no year exceeds
    ``max_annual_rate`` unless it was already scheduled higher; anything that
    cannot be placed is reported in ``residual_gap``. With ``enforce_floor``
    the schedule is also lifted to meet the floor outright where possible.
    The returned schedule carries the observed basis, so replanning again with
    the same observations changes nothing.
    """
    if current.basis is None:
        raise ValueError(
            "schedule has no planning basis to compare observations against; "
            "pass basis= to build_program"
        )
    old = current.basis
    new = observed.apply(old)
    floor = targets.firm_floor
    lead = _lead(FIRM_TECHNOLOGY, lead_times)

    past = [e for e in current.entries if e.year <= as_of_year]
    future_other = [
        e for e in current.entries if e.year > as_of_year and e.technology != FIRM_TECHNOLOGY
    ]
    built_firm = sum(e.capacity for e in past if e.technology == FIRM_TECHNOLOGY)
    scheduled = current.by_year(FIRM_TECHNOLOGY)
    years = [y for y in current.years if y > as_of_year]

    target_cum = {}
    running = cum_sched = 0.0
    for y in years:
        cum_sched += scheduled[y]
        delta = new.requirement(y, floor) - old.requirement(y, floor)
        want = max(running, cum_sched + delta, 0.0)
        if enforce_floor:
            want = max(want, new.requirement(y, floor) - built_firm)
        target_cum[y] = want
        running = want

    adds = {}
    carried = 0.0
    achieved = prev = 0.0
    residual = {}
    for y in years:
        desired = target_cum[y] - prev + carried
        prev = target_cum[y]
        cap = scheduled[y] if y < as_of_year + lead else max(max_annual_rate, scheduled[y])
        a = min(max(desired, 0.0), cap)
        carried = max(desired - a, 0.0)
        adds[y] = a
        achieved += a
        short = target_cum[y] - achieved
        if enforce_floor:
            short = max(short, new.requirement(y, floor) - built_firm - achieved)
        residual[y] = max(0.0, short)

    firm_entries = [BuildEntry(y, FIRM_TECHNOLOGY, a, "GW") for y, a in adds.items() if a > _EPS]
    return BuildSchedule(
        tuple(past + future_other + firm_entries),
        current.start_year,
        current.horizon,
        new,
        {y: g for y, g in residual.items() if g > _EPS},
    )
