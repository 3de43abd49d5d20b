"""Generating fleet registry, age-dependent availability and retirement accounting."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from firmgrid.errors import ConfigurationError, UndefinedInputError

HOURS_PER_YEAR = 8760
DEFAULT_LIFETIME_YEARS = 50
BASE_YEAR = 2022

DISPATCH_CLASSES = ("variable", "baseload", "storage", "firm_dispatchable")
FLEET_CSV_COLUMNS = (
    "name",
    "technology",
    "nameplate_mw",
    "commission_year",
    "decommission_year",
    "site_id",
)


@dataclass(frozen=True)
class TechnologyClass:
    """Technology metadata.

    ``unit_capital_cost`` is USD/kW, except for storage where it is USD per kWh
    of energy capacity (``cost_basis == "energy"``).
    """

    id: str
    dispatch_class: str
    unit_capital_cost: float
    construction_lead_time: int
    unit_size_min: float
    unit_size_max: float

    def __post_init__(self):
        if self.dispatch_class not in DISPATCH_CLASSES:
            raise ValueError(f"unknown dispatch class {self.dispatch_class!r}")
        if self.unit_capital_cost <= 0:
            raise ValueError(f"{self.id}: unit capital cost must be positive")
        if self.construction_lead_time < 0:
            raise ValueError(f"{self.id}: lead time must be non-negative")
        if self.unit_size_min > self.unit_size_max:
            raise ValueError(f"{self.id}: unit_size_min exceeds unit_size_max")

    @property
    def cost_basis(self) -> str:
        return "energy" if self.dispatch_class == "storage" else "power"


# Capital costs for coal, nuclear, wind, solar, bess and ocgt are the values used
# in the replacement-cost comparison. Hydro and pumped storage are catalogue
# entries only and never priced in a report.
TECHNOLOGIES: dict[str, TechnologyClass] = {
    t.id: t
    for t in (
        TechnologyClass("coal", "baseload", 6876.0, 14, 990.0, 4800.0),
        TechnologyClass("nuclear", "baseload", 7406.0, 14, 1000.0, 2000.0),
        TechnologyClass("hydro", "baseload", 3083.0, 5, 10.0, 1000.0),
        TechnologyClass("pumped_storage", "storage", 150.0, 8, 100.0, 1500.0),
        TechnologyClass("wind", "variable", 2098.0, 1, 10.0, 500.0),
        TechnologyClass("solar", "variable", 1448.0, 1, 10.0, 500.0),
        TechnologyClass("bess", "storage", 400.0, 1, 1.0, 1000.0),
        TechnologyClass("ocgt", "firm_dispatchable", 867.0, 2, 100.0, 1500.0),
    )
}


@dataclass(frozen=True)
class Plant:
    name: str
    tech: TechnologyClass
    nameplate: float  # MW
    commission_year: int
    decommission_year: Optional[int] = None
    site_id: str = ""

    def __post_init__(self):
        if self.decommission_year is None:
            object.__setattr__(
                self, "decommission_year", self.commission_year + DEFAULT_LIFETIME_YEARS
            )
        if self.nameplate <= 0:
            raise ValueError(f"{self.name}: nameplate must be positive")
        if self.decommission_year <= self.commission_year:
            raise ValueError(f"{self.name}: decommission year must follow commissioning")
        if not self.site_id:
            object.__setattr__(self, "site_id", self.name)

    def active(self, year: int) -> bool:
        return self.commission_year <= year < self.decommission_year

    def age(self, year: int) -> int:
        return year - self.commission_year


@dataclass(frozen=True)
class EafModel:
    """Availability curve indexed by calendar year or by plant age.

    Piecewise-linear through the anchors, flat before the first anchor,
    extrapolated along the last segment after the final anchor and clamped
    to [0, 1].
    """

    kind: str = "constant"
    anchors: tuple[tuple[float, float], ...] = ((0.0, 1.0),)
    basis: str = "year"

    def __post_init__(self):
        if self.kind not in ("constant", "linear_decline", "piecewise"):
            raise ValueError(f"unknown EAF model kind {self.kind!r}")
        if self.basis not in ("year", "age"):
            raise ValueError(f"unknown EAF basis {self.basis!r}")
        anchors = tuple(sorted((float(x), float(v)) for x, v in self.anchors))
        if not anchors:
            raise ValueError("EAF model needs at least one anchor")
        if self.kind == "constant" and len(anchors) != 1:
            raise ValueError("constant EAF model takes exactly one anchor")
        if self.kind == "linear_decline" and len(anchors) != 2:
            raise ValueError("linear_decline EAF model takes exactly two anchors")
        values = [v for _, v in anchors]
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError("EAF anchor values must lie in [0, 1]")
        if any(b > a for a, b in zip(values, values[1:])):
            raise ValueError("EAF anchors must be non-increasing")
        if len({x for x, _ in anchors}) != len(anchors):
            raise ValueError("duplicate EAF anchor positions")
        object.__setattr__(self, "anchors", anchors)

    @classmethod
    def constant(cls, value: float) -> "EafModel":
        return cls("constant", ((0.0, value),))

    def value(self, x: float) -> float:
        xs = [a for a, _ in self.anchors]
        vs = [v for _, v in self.anchors]
        if len(xs) == 1 or x <= xs[0]:
            return vs[0]
        if x >= xs[-1]:
            slope = (vs[-1] - vs[-2]) / (xs[-1] - xs[-2])
            out = vs[-1] + slope * (x - xs[-1])
        else:
            out = float(np.interp(x, xs, vs))
        return min(1.0, max(0.0, out))

    def for_plant(self, plant: Plant, year: int) -> float:
        return self.value(plant.age(year) if self.basis == "age" else year)


def calibrated_eaf_models() -> dict[str, EafModel]:
    """Default availability curves: coal fleet 0.80 -> 0.53 over two decades to
    2022, Koeberg 0.85 (2016) -> 0.65 (2022); other classes fully available."""
    return {
        "coal": EafModel("linear_decline", ((BASE_YEAR - 20, 0.80), (BASE_YEAR, 0.53))),
        "nuclear": EafModel("linear_decline", ((2016, 0.85), (BASE_YEAR, 0.65))),
        "hydro": EafModel.constant(1.0),
        "pumped_storage": EafModel.constant(1.0),
        "ocgt": EafModel.constant(1.0),
        "wind": EafModel.constant(1.0),
        "solar": EafModel.constant(1.0),
        "bess": EafModel.constant(1.0),
    }


@dataclass(frozen=True)
class Fleet:
    plants: tuple[Plant, ...]
    eaf_models: Mapping[str, EafModel] = field(default_factory=calibrated_eaf_models)

    def __post_init__(self):
        object.__setattr__(self, "plants", tuple(self.plants))
        names = [p.name for p in self.plants]
        if len(set(names)) != len(names):
            raise ValueError("plant names must be unique")
        sites = [p.site_id for p in self.plants]
        if len(set(sites)) != len(sites):
            raise ValueError("site ids must be unique per plant")

    def select(
        self,
        dispatch_class: Optional[str] = None,
        technology: Optional[str] = None,
        exclude: Iterable[str] = (),
    ) -> list[Plant]:
        excluded = set(exclude)
        return [
            p
            for p in self.plants
            if p.name not in excluded
            and (dispatch_class is None or p.tech.dispatch_class == dispatch_class)
            and (technology is None or p.tech.id == technology)
        ]

    def with_decommission_changes(self, changes: Mapping[str, int]) -> "Fleet":
        unknown = set(changes) - {p.name for p in self.plants}
        if unknown:
            raise ValueError(f"unknown plants in decommission changes: {sorted(unknown)}")
        plants = tuple(
            replace(p, decommission_year=int(changes[p.name])) if p.name in changes else p
            for p in self.plants
        )
        return Fleet(plants, self.eaf_models)

    def with_eaf_models(self, models: Mapping[str, EafModel]) -> "Fleet":
        return Fleet(self.plants, {**self.eaf_models, **models})


def load_fleet_csv(
    path, technologies: Mapping[str, TechnologyClass] = TECHNOLOGIES, eaf_models=None
) -> Fleet:
    """Read a fleet CSV; a blank decommission_year means commissioning + 50 years."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(FLEET_CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ConfigurationError(f"{path}: missing columns {sorted(missing)}")
        plants = []
        for lineno, row in enumerate(reader, start=2):
            tech = technologies.get(row["technology"].strip())
            if tech is None:
                raise ConfigurationError(
                    f"{path}:{lineno}: unknown technology {row['technology']!r}"
                )
            try:
                decom = row["decommission_year"].strip()
                plants.append(
                    Plant(
                        name=row["name"].strip(),
                        tech=tech,
                        nameplate=float(row["nameplate_mw"]),
                        commission_year=int(row["commission_year"]),
                        decommission_year=int(decom) if decom else None,
                        site_id=row["site_id"].strip(),
                    )
                )
            except ValueError as exc:
                raise ConfigurationError(f"{path}:{lineno}: {exc}") from exc
    models = calibrated_eaf_models() if eaf_models is None else eaf_models
    return Fleet(tuple(plants), models)


def write_fleet_csv(fleet: Fleet, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FLEET_CSV_COLUMNS)
        for p in fleet.plants:
            writer.writerow(
                [p.name, p.tech.id, p.nameplate, p.commission_year, p.decommission_year, p.site_id]
            )


def bundled_fleet_path() -> Path:
    return Path(str(resources.files("firmgrid") / "data" / "fleet_2022.csv"))


def baseline_fleet() -> Fleet:
    """The 2022 fleet: 39.8 GW coal, Koeberg, hydro, pumped storage and peakers."""
    return load_fleet_csv(bundled_fleet_path())


RETAINED_COAL = ("Medupi", "Kusile")


def fleet_capacity(
    fleet: Fleet, year: int, dispatch_class: Optional[str] = None, technology: Optional[str] = None
) -> float:
    """Nameplate in GW of plants in service during ``year``."""
    mw = sum(p.nameplate for p in fleet.select(dispatch_class, technology) if p.active(year))
    return mw / 1000.0


def cumulative_retired(
    fleet: Fleet,
    start_year: int,
    horizon_years: int,
    dispatch_class: Optional[str] = None,
    technology: Optional[str] = None,
) -> np.ndarray:
    """GW retired since ``start_year`` from plants in service at the start.

    Element ``k`` covers retirements up to and including year ``start_year + k``,
    for ``k = 0 .. horizon_years``.
    """
    if horizon_years < 1:
        raise ValueError("horizon_years must be at least 1")
    in_service = [p for p in fleet.select(dispatch_class, technology) if p.active(start_year)]
    out = np.zeros(horizon_years + 1)
    for k in range(horizon_years + 1):
        year = start_year + k
        out[k] = sum(p.nameplate for p in in_service if p.decommission_year <= year) / 1000.0
    return out


def fleet_eaf(
    fleet: Fleet,
    year: int,
    dispatch_class: Optional[str] = None,
    technology: Optional[str] = None,
) -> float:
    """Capacity-weighted availability of plants in service during ``year``."""
    plants = [p for p in fleet.select(dispatch_class, technology) if p.active(year)]
    if not plants:
        raise UndefinedInputError(f"no plants in service in {year}")
    total = 0.0
    weighted = 0.0
    for p in plants:
        model = fleet.eaf_models.get(p.tech.id)
        if model is None:
            raise ConfigurationError(f"no EAF model for technology {p.tech.id!r}")
        weighted += p.nameplate * model.for_plant(p, year)
        total += p.nameplate
    return weighted / total


def capacity_factor(energy_twh: float, capacity_gw: float, hours: float = HOURS_PER_YEAR) -> float:
    """Capacity factor in percent."""
    if capacity_gw <= 0:
        raise UndefinedInputError("capacity must be positive")
    return 100.0 * energy_twh * 1000.0 / (capacity_gw * hours)


def fleet_age_stats(
    fleet: Fleet,
    year: int,
    exclusions: Iterable[str] = (),
    technology: Optional[str] = None,
) -> dict[str, float]:
    plants = fleet.select(technology=technology, exclude=exclusions)
    if not plants:
        raise UndefinedInputError("no plants left after exclusions")
    ages = [p.age(year) for p in plants]
    return {"mean": sum(ages) / len(ages), "min": min(ages), "max": max(ages)}
