"""Scenario orchestration: fleet, demand, profiles, dispatch, planning and costs
in one deterministic run, plus plot-ready CSV series."""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from firmgrid import __version__
from firmgrid.config import ScenarioConfig
from firmgrid.costing import CostReport, compare_pathways
from firmgrid.demand import (
    AnnualDemandTrajectory,
    DemandBand,
    envelope,
    extrapolate,
    read_hourly_demand,
    read_trajectory,
    synthesize_hourly,
    historical_generation,
    irp2010_forecast,
)
from firmgrid.dispatch import DispatchResult, firm_duration_curve, simulate_year
from firmgrid.errors import FirmgridError, UndefinedInputError
from firmgrid.fleet import Fleet, baseline_fleet, cumulative_retired, fleet_eaf, load_fleet_csv
from firmgrid.planner import (
    FIRM_TECHNOLOGY,
    BuildSchedule,
    PlanBasis,
    SiteAssignment,
    assign_sites,
    build_program,
    floor_gap_by_convention,
    retired_sites,
    split_into_plants,
)
from firmgrid.profiles import ingest_trace, synth_solar, synth_wind

SCHEMA_VERSION = 1
FIRM_UTILIZATION_LIMIT = 0.10


class ScenarioError(FirmgridError):
    """A module error raised while running a named scenario."""


@dataclass(frozen=True)
class RunWarning:
    code: str
    message: str


@dataclass(frozen=True)
class YearSeeds:
    demand: Optional[int]
    wind: Optional[int]
    solar: Optional[int]


def year_seeds(cfg: ScenarioConfig, index: int) -> YearSeeds:
    """Independent per-year seeds derived from the configured seeds."""

    def child(seed, salt):
        if seed is None:
            return None
        return int(np.random.SeedSequence([seed, index, salt]).generate_state(1)[0])

    return YearSeeds(child(cfg.demand_seed, 0), child(cfg.profile_seed, 1), child(cfg.profile_seed, 2))


def _dispatch_year(cfg: ScenarioConfig, index: int) -> tuple[int, YearSeeds, DispatchResult]:
    seeds = year_seeds(cfg, index)
    if cfg.demand_trace is not None:
        demand = read_hourly_demand(cfg.demand_trace)
    else:
        demand = synthesize_hourly(cfg.annual_twh, cfg.peak_gw, seed=seeds.demand)
    wind = ingest_trace(cfg.wind_trace, "wind") if cfg.wind_trace else synth_wind(cfg.wind_cf, seeds.wind)
    solar = ingest_trace(cfg.solar_trace, "solar") if cfg.solar_trace else synth_solar(cfg.solar_cf, seeds.solar)
    return index, seeds, simulate_year(demand, cfg.mix, wind, solar, cfg.initial_soc)


def _dispatch_task(args):
    return _dispatch_year(*args)


@dataclass(eq=False)
class RunReport:
    name: str
    config_name: str
    dispatch: list[dict]
    costs: CostReport
    schedule: BuildSchedule
    sites: SiteAssignment
    floor_gap: dict[str, float]
    demand: AnnualDemandTrajectory
    warnings: list[RunWarning]
    # Kept for plot emission; not serialised.
    fleet: Fleet = field(repr=False, default=None)
    results: list[DispatchResult] = field(repr=False, default_factory=list)
    start_year: int = 2022
    horizon: int = 25
    history: Optional[AnnualDemandTrajectory] = field(repr=False, default=None)
    forecast: Optional[AnnualDemandTrajectory] = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "firmgrid_version": __version__,
            "scenario": self.name,
            "config": self.config_name,
            "dispatch": self.dispatch,
            "costs": self.costs.to_dict(),
            "schedule": self.schedule.to_dict(),
            "sites": {
                "assigned_gw": dict(sorted(self.sites.assigned.items())),
                "unassigned_gw": self.sites.total_unassigned,
            },
            "floor_gap_gw": self.floor_gap,
            "demand_twh": {str(y): v for y, v in self.demand.as_dict().items()},
            "warnings": [asdict(w) for w in self.warnings],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / "report.json"
        path.write_text(self.to_json(), encoding="utf-8")
        self.schedule.to_csv(out / "schedule.csv")
        (out / "cost_table.txt").write_text(self.costs.table(), encoding="utf-8")
        return path


def load_fleet(cfg: ScenarioConfig) -> Fleet:
    fleet = load_fleet_csv(cfg.fleet_path) if cfg.fleet_path else baseline_fleet()
    return fleet.with_eaf_models(cfg.eaf_models) if cfg.eaf_models else fleet


def run_dispatch(cfg: ScenarioConfig) -> list[tuple[int, YearSeeds, DispatchResult]]:
    """Simulate every configured year; results are ordered by year index whatever the worker count."""
    jobs = [(cfg, k) for k in range(cfg.dispatch_years)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            out = list(pool.map(_dispatch_task, jobs))
    else:
        out = [_dispatch_task(j) for j in jobs]
    return sorted(out, key=lambda r: r[0])


def run_plan(cfg: ScenarioConfig, fleet: Fleet, demand: AnnualDemandTrajectory) -> tuple[BuildSchedule, SiteAssignment]:
    basis = PlanBasis(fleet, demand, cfg.annual_twh, cfg.floor_convention)
    schedule = build_program(
        cfg.targets,
        cfg.initial_gap,
        cfg.lead_times or None,
        cfg.start_year,
        cfg.max_annual_rate,
        basis,
    )
    sites = retired_sites(fleet, cfg.start_year, cfg.start_year + cfg.horizon)
    firm = [e for e in schedule.entries if e.technology == FIRM_TECHNOLOGY]
    return schedule, assign_sites(sites, split_into_plants(firm))


def run_costs(cfg: ScenarioConfig, schedule: Optional[BuildSchedule] = None) -> CostReport:
    t = cfg.targets
    renewable = {"wind": t.wind, "solar": t.solar, "bess": t.storage, "ocgt": t.firm_target}
    return compare_pathways(
        {"coal": cfg.baseload_replacement_gw},
        {"nuclear": cfg.baseload_replacement_gw},
        renewable,
        cfg.costs,
        schedule,
    )


def run_scenario(cfg: ScenarioConfig, dispatch: bool = True) -> RunReport:
    """Run the full pipeline; module errors are re-raised with the scenario name."""
    try:
        return _run(cfg, dispatch)
    except FirmgridError as exc:
        raise ScenarioError(f"scenario {cfg.name!r}: {exc}") from exc


def _run(cfg: ScenarioConfig, dispatch: bool) -> RunReport:
    fleet = load_fleet(cfg)
    demand = extrapolate(cfg.annual_twh, cfg.growth_rate, cfg.horizon, cfg.start_year)
    warnings: list[RunWarning] = []

    results = run_dispatch(cfg) if dispatch else []
    summaries = []
    for index, seeds, res in results:
        s = res.summary()
        s["year_index"] = index
        s["seeds"] = asdict(seeds)
        summaries.append(s)
        if s["unserved_energy_twh"] > 0:
            warnings.append(
                RunWarning(
                    "LOAD_SHEDDING",
                    f"year {index}: {s['unserved_energy_twh']:.3f} TWh unserved over "
                    f"{s['load_shedding_hours']} h",
                )
            )
        if s["firm_utilization"] > FIRM_UTILIZATION_LIMIT:
            warnings.append(
                RunWarning(
                    "FIRM_UTILIZATION_HIGH",
                    f"year {index}: firm utilization {100 * s['firm_utilization']:.1f}% exceeds 10%",
                )
            )

    schedule, sites = run_plan(cfg, fleet, demand)
    if sites.total_unassigned > 0:
        warnings.append(
            RunWarning(
                "UNASSIGNED_SITE_CAPACITY",
                f"{sites.total_unassigned:.2f} GW of new firm plant has no retired coal site",
            )
        )
    gaps = floor_gap_by_convention(fleet, cfg.start_year, cfg.targets.firm_floor)
    if gaps[cfg.floor_convention] > cfg.initial_gap + 1e-9:
        warnings.append(
            RunWarning(
                "FLOOR_GAP",
                f"firm floor gap of {gaps[cfg.floor_convention]:.2f} GW in {cfg.start_year} "
                f"({cfg.floor_convention}) exceeds the scheduled catch-up of {cfg.initial_gap:.2f} GW",
            )
        )

    history = read_trajectory(cfg.history_path) if cfg.history_path else historical_generation()
    forecast = read_trajectory(cfg.forecast_path) if cfg.forecast_path else irp2010_forecast()
    return RunReport(
        name=cfg.name,
        config_name=cfg.source.name,
        dispatch=summaries,
        costs=run_costs(cfg, schedule),
        schedule=schedule,
        sites=sites,
        floor_gap=gaps,
        demand=demand,
        warnings=warnings,
        fleet=fleet,
        results=[r for _, _, r in results],
        start_year=cfg.start_year,
        horizon=cfg.horizon,
        history=history,
        forecast=forecast,
    )


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _eaf_or_blank(fleet: Fleet, year: int, **kw):
    try:
        return round(fleet_eaf(fleet, year, **kw), 6)
    except UndefinedInputError:
        return ""


def emit_plot_data(report: RunReport, out_dir) -> dict[str, Path]:
    """Write one CSV per figure: retirements, fleet EAF, demand envelope, firm duration."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    start, horizon, fleet = report.start_year, report.horizon, report.fleet
    files = {}

    total = cumulative_retired(fleet, start, horizon)
    coal = cumulative_retired(fleet, start, horizon, technology="coal")
    files["retirement_curve"] = out / "retirement_curve.csv"
    _write_rows(
        files["retirement_curve"],
        ("year", "years_from_start", "retired_gw", "coal_retired_gw"),
        [(start + k, k, round(float(total[k]), 6), round(float(coal[k]), 6)) for k in range(horizon + 1)],
    )

    files["fleet_eaf"] = out / "fleet_eaf.csv"
    _write_rows(
        files["fleet_eaf"],
        ("year", "coal_eaf", "nuclear_eaf", "baseload_eaf"),
        [
            (
                y,
                _eaf_or_blank(fleet, y, technology="coal"),
                _eaf_or_blank(fleet, y, technology="nuclear"),
                _eaf_or_blank(fleet, y, dispatch_class="baseload"),
            )
            for y in range(start - 20, start + horizon + 1)
        ],
    )

    files["demand_envelope"] = out / "demand_envelope.csv"
    rows = []
    if report.history is not None and report.forecast is not None:
        common = sorted(set(report.history.years) & set(report.forecast.years))
        if common:
            a = AnnualDemandTrajectory(common[0], tuple(report.history[y] for y in common))
            b = AnnualDemandTrajectory(common[0], tuple(report.forecast[y] for y in common))
            band: DemandBand = envelope(a, b)
            rows = [
                (y, a[y], b[y], lo, hi)
                for y, lo, hi in zip(band.years, band.low, band.high)
            ]
    _write_rows(files["demand_envelope"], ("year", "actual_twh", "forecast_twh", "low_twh", "high_twh"), rows)

    files["demand_scenario"] = out / "demand_scenario.csv"
    _write_rows(
        files["demand_scenario"],
        ("year", "twh"),
        [(y, round(v, 6)) for y, v in report.demand.as_dict().items()],
    )

    files["firm_duration_curve"] = out / "firm_duration_curve.csv"
    curves = [firm_duration_curve(r) for r in report.results]
    n = len(curves[0]) if curves else 0
    _write_rows(
        files["firm_duration_curve"],
        ("rank", "fraction_of_hours") + tuple(f"year_{k}_mw" for k in range(len(curves))),
        [(h + 1, round((h + 1) / n, 8)) + tuple(round(float(c[h]), 3) for c in curves) for h in range(n)],
    )
    return files
