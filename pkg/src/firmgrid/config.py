"""YAML scenario configuration: schema, validation findings and typed loading.

Every physical quantity carries its unit in the key name (``peak_gw``,
``annual_twh``, ``storage_energy_gwh``). Relative paths resolve against the
directory of the config file.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import yaml

from firmgrid.costing import FUEL_PRESETS, CostAssumptions
from firmgrid.dispatch import GenerationMix
from firmgrid.errors import ConfigurationError, FirmgridError
from firmgrid.fleet import TECHNOLOGIES, EafModel
from firmgrid.planner import FLOOR_CONVENTIONS, ProgramTargets
from firmgrid.tracefile import HOURS


class ConfigParseError(FirmgridError):
    """The config file could not be read or is not valid YAML."""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


NUM = (int, float)

# section -> key -> (accepted types, default)
SCHEMA: dict[str, dict[str, tuple[tuple[type, ...], Any]]] = {
    "scenario": {
        "name": ((str,), "scenario"),
        "start_year": ((int,), 2022),
        "horizon_years": ((int,), 25),
    },
    "fleet": {
        "path": ((str, type(None)), None),
        "floor_convention": ((str,), "derated"),
        "eaf_models": ((dict, type(None)), None),
    },
    "demand": {
        "annual_twh": (NUM, 222.0),
        "peak_gw": (NUM, 35.0),
        "growth_rate": (NUM, -0.005),
        "trace_path": ((str, type(None)), None),
        "seed": ((int, type(None)), None),
        "history_path": ((str, type(None)), None),
        "forecast_path": ((str, type(None)), None),
    },
    "profiles": {
        "wind_cf": (NUM, 0.326),
        "solar_cf": (NUM, 0.265),
        "seed": ((int, type(None)), None),
        "wind_trace_path": ((str, type(None)), None),
        "solar_trace_path": ((str, type(None)), None),
    },
    "mix": {
        "baseload_gw": (NUM, 12.9),
        "baseload_availability": (NUM, 0.70),
        "wind_gw": (NUM, 49.0),
        "solar_gw": (NUM, 14.0),
        "storage_power_gw": (NUM, 6.0),
        "storage_energy_gwh": (NUM, 24.0),
        "storage_round_trip_efficiency": (NUM, 0.85),
        "firm_gw": (NUM, 15.0),
        "initial_soc": (NUM, 0.5),
    },
    "dispatch": {
        "years": ((int,), 1),
        "workers": ((int,), 1),
    },
    "targets": {
        "firm_target_gw": (NUM, 15.0),
        "wind_gw": (NUM, 49.0),
        "solar_gw": (NUM, 14.0),
        "storage_gwh": (NUM, 24.0),
        "firm_floor_gw": (NUM, 35.0),
        "initial_gap_gw": (NUM, 0.0),
        "max_annual_rate_gw": (NUM, 2.5),
        "lead_times_years": ((dict, type(None)), None),
    },
    "costs": {
        "fx_zar_per_usd": (NUM, 19.0),
        "annual_energy_twh": (NUM, 222.0),
        "coal_generation_twh": (NUM, 176.6),
        "coal_fuel_usd_per_mwh": (NUM, 12.46),
        "gas_price_usd_per_gj": (NUM, 20.0),
        "fuel_preset": ((str,), "calibrated"),
        "firm_fuel_intensity_gj_per_mwh": ((int, float, type(None)), None),
        "discount_rate": (NUM, 0.0),
        "baseload_replacement_gw": (NUM, 25.0),
    },
    "output": {
        "dir": ((str, type(None)), None),
    },
}


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    line: Optional[int] = None
    column: Optional[int] = None

    def __str__(self) -> str:
        where = f"{self.line}:{self.column}: " if self.line is not None else ""
        return f"{where}[{self.code}] {self.message}"


def _read_yaml(path: Path):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ConfigParseError(f"{path}: {exc.problem or exc}", line, col) from exc
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    return node, data


def _marks(node) -> dict[tuple[str, ...], tuple[int, int]]:
    """1-based (line, column) of every mapping key, indexed by key path."""
    out: dict[tuple[str, ...], tuple[int, int]] = {}

    def walk(n, prefix):
        if isinstance(n, yaml.MappingNode):
            for k, v in n.value:
                path = prefix + (str(k.value),)
                out[path] = (k.start_mark.line + 1, k.start_mark.column + 1)
                walk(v, path)

    if node is not None:
        walk(node, ())
    return out


def _resolve(base: Path, value: Optional[str]) -> Optional[Path]:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else base / p


def _merged(data: dict) -> dict[str, dict[str, Any]]:
    merged = {}
    for section, keys in SCHEMA.items():
        given = data.get(section) or {}
        merged[section] = {k: given.get(k, default) for k, (_, default) in keys.items()}
    return merged


def validate(path) -> list[Finding]:
    """Check a config file; an empty list means it is valid.

    Raises ConfigParseError (with line and column) for unreadable or
    malformed YAML. Never writes anything.
    """
    path = Path(path)
    node, data = _read_yaml(path)
    marks = _marks(node)
    findings: list[Finding] = []

    def add(code, message, *key):
        line, col = marks.get(tuple(key), (None, None))
        findings.append(Finding(code, message, line, col))

    if data is None:
        data = {}
    if not isinstance(data, dict):
        return [Finding("schema", "top level must be a mapping of sections", 1, 1)]

    for section, body in data.items():
        if section not in SCHEMA:
            add("unknown-section", f"unknown section {section!r}", section)
            continue
        if body is None:
            continue
        if not isinstance(body, dict):
            add("schema", f"section {section!r} must be a mapping", section)
            continue
        for key, value in body.items():
            if key not in SCHEMA[section]:
                add("unknown-key", f"unknown key {section}.{key}", section, key)
                continue
            types, _ = SCHEMA[section][key]
            if isinstance(value, bool) or not isinstance(value, types):
                add("type", f"{section}.{key} has the wrong type ({type(value).__name__})", section, key)
    if findings:
        return findings

    cfg = _merged(data)
    base = path.parent

    for section, key in (
        ("fleet", "path"),
        ("demand", "trace_path"),
        ("demand", "history_path"),
        ("demand", "forecast_path"),
        ("profiles", "wind_trace_path"),
        ("profiles", "solar_trace_path"),
    ):
        p = _resolve(base, cfg[section][key])
        if p is not None and not p.is_file():
            add("missing-file", f"{section}.{key}: {p} does not exist", section, key)

    d = cfg["demand"]
    if d["annual_twh"] <= 0:
        add("range", "demand.annual_twh must be positive", "demand", "annual_twh")
    elif d["peak_gw"] * HOURS / 1000.0 < d["annual_twh"]:
        avg = d["annual_twh"] * 1000.0 / HOURS
        add(
            "infeasible-peak",
            f"peak {d['peak_gw']} GW is below the average {avg:.1f} GW implied by {d['annual_twh']} TWh",
            "demand",
            "peak_gw",
        )
    if d["growth_rate"] <= -1:
        add("range", "demand.growth_rate must exceed -1", "demand", "growth_rate")
    if d["trace_path"] is None and d["seed"] is None:
        add("missing-seed", "demand.seed is required when the hourly trace is synthesised", "demand")

    pr = cfg["profiles"]
    synthesised = pr["wind_trace_path"] is None or pr["solar_trace_path"] is None
    if synthesised and pr["seed"] is None:
        add("missing-seed", "profiles.seed is required when traces are synthesised", "profiles")
    if not 0 < pr["wind_cf"] < 0.7:
        add("range", "profiles.wind_cf must lie in (0, 0.7)", "profiles", "wind_cf")
    if not 0 < pr["solar_cf"] < 0.5:
        add("range", "profiles.solar_cf must lie in (0, 0.5)", "profiles", "solar_cf")

    m = cfg["mix"]
    for key, value in m.items():
        if value < 0:
            add("range", f"mix.{key} must be non-negative", "mix", key)
    for key in ("baseload_availability", "initial_soc"):
        if not 0 <= m[key] <= 1:
            add("range", f"mix.{key} must lie in [0, 1]", "mix", key)
    if not 0 < m["storage_round_trip_efficiency"] <= 1:
        add("range", "mix.storage_round_trip_efficiency must lie in (0, 1]", "mix", "storage_round_trip_efficiency")

    if cfg["scenario"]["horizon_years"] < 1:
        add("range", "scenario.horizon_years must be at least 1", "scenario", "horizon_years")
    if cfg["dispatch"]["years"] < 1:
        add("range", "dispatch.years must be at least 1", "dispatch", "years")
    if cfg["dispatch"]["workers"] < 1:
        add("range", "dispatch.workers must be at least 1", "dispatch", "workers")

    t = cfg["targets"]
    for key, value in t.items():
        if isinstance(value, NUM) and value < 0:
            add("range", f"targets.{key} must be non-negative", "targets", key)
    for tech, lead in (t["lead_times_years"] or {}).items():
        if tech not in TECHNOLOGIES:
            add("unknown-technology", f"lead time given for unknown technology {tech!r}", "targets", "lead_times_years", tech)
        elif not isinstance(lead, int) or isinstance(lead, bool) or lead < 0:
            add("type", f"lead time for {tech} must be a non-negative integer", "targets", "lead_times_years", tech)

    fl = cfg["fleet"]
    if fl["floor_convention"] not in FLOOR_CONVENTIONS:
        add("unknown-convention", f"floor convention must be one of {sorted(FLOOR_CONVENTIONS)}", "fleet", "floor_convention")
    for tech, spec in (fl["eaf_models"] or {}).items():
        try:
            eaf_model_from_config(spec)
        except (ValueError, TypeError) as exc:
            add("eaf-model", f"fleet.eaf_models.{tech}: {exc}", "fleet", "eaf_models", tech)

    c = cfg["costs"]
    for key in ("fx_zar_per_usd", "annual_energy_twh", "coal_fuel_usd_per_mwh", "gas_price_usd_per_gj"):
        if c[key] <= 0:
            add("range", f"costs.{key} must be positive", "costs", key)
    if c["fuel_preset"] not in FUEL_PRESETS:
        add("unknown-preset", f"fuel preset must be one of {sorted(FUEL_PRESETS)}", "costs", "fuel_preset")
    return findings


def eaf_model_from_config(spec) -> EafModel:
    """A number means a constant model; otherwise a mapping with kind, anchors and basis."""
    if isinstance(spec, NUM) and not isinstance(spec, bool):
        return EafModel.constant(float(spec))
    if not isinstance(spec, dict):
        raise TypeError("expected a number or a mapping")
    anchors = tuple(tuple(a) for a in spec.get("anchors", ()))
    return EafModel(spec.get("kind", "piecewise"), anchors, spec.get("basis", "year"))


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    source: Path
    start_year: int
    horizon: int
    fleet_path: Optional[Path]
    floor_convention: str
    eaf_models: dict[str, EafModel]
    annual_twh: float
    peak_gw: float
    growth_rate: float
    demand_trace: Optional[Path]
    demand_seed: Optional[int]
    history_path: Optional[Path]
    forecast_path: Optional[Path]
    wind_cf: float
    solar_cf: float
    profile_seed: Optional[int]
    wind_trace: Optional[Path]
    solar_trace: Optional[Path]
    mix: GenerationMix
    initial_soc: float
    dispatch_years: int
    workers: int
    targets: ProgramTargets
    initial_gap: float
    max_annual_rate: float
    lead_times: dict[str, int] = field(default_factory=dict)
    costs: CostAssumptions = CostAssumptions()
    baseload_replacement_gw: float = 25.0
    out_dir: Optional[Path] = None

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, demand_seed=seed, profile_seed=seed)


def load_config(path) -> ScenarioConfig:
    """Validate and load a config; raises ConfigurationError listing all findings."""
    path = Path(path)
    findings = validate(path)
    if findings:
        raise ConfigurationError("; ".join(str(f) for f in findings))
    _, data = _read_yaml(path)
    cfg = _merged(data or {})
    base = path.parent
    s, fl, d, pr, m, t, c = (
        cfg[k] for k in ("scenario", "fleet", "demand", "profiles", "mix", "targets", "costs")
    )
    mix = GenerationMix(
        baseload_capacity=m["baseload_gw"],
        baseload_availability=m["baseload_availability"],
        wind_capacity=m["wind_gw"],
        solar_capacity=m["solar_gw"],
        storage_power=m["storage_power_gw"],
        storage_energy=m["storage_energy_gwh"],
        storage_round_trip_efficiency=m["storage_round_trip_efficiency"],
        firm_capacity=m["firm_gw"],
    )
    targets = ProgramTargets(
        horizon=s["horizon_years"],
        firm_target=t["firm_target_gw"],
        wind=t["wind_gw"],
        solar=t["solar_gw"],
        storage=t["storage_gwh"],
        firm_floor=t["firm_floor_gw"],
    )
    costs = CostAssumptions(
        fx_rate=c["fx_zar_per_usd"],
        horizon=s["horizon_years"],
        discount_rate=c["discount_rate"],
        annual_system_energy=c["annual_energy_twh"],
        coal_generation=c["coal_generation_twh"],
        coal_fuel_unit_cost=c["coal_fuel_usd_per_mwh"],
        gas_fuel_price=c["gas_price_usd_per_gj"],
        fuel_preset=c["fuel_preset"],
        firm_fuel_intensity=c["firm_fuel_intensity_gj_per_mwh"],
    )
    return ScenarioConfig(
        name=s["name"],
        source=path,
        start_year=s["start_year"],
        horizon=s["horizon_years"],
        fleet_path=_resolve(base, fl["path"]),
        floor_convention=fl["floor_convention"],
        eaf_models={k: eaf_model_from_config(v) for k, v in (fl["eaf_models"] or {}).items()},
        annual_twh=float(d["annual_twh"]),
        peak_gw=float(d["peak_gw"]),
        growth_rate=float(d["growth_rate"]),
        demand_trace=_resolve(base, d["trace_path"]),
        demand_seed=d["seed"],
        history_path=_resolve(base, d["history_path"]),
        forecast_path=_resolve(base, d["forecast_path"]),
        wind_cf=float(pr["wind_cf"]),
        solar_cf=float(pr["solar_cf"]),
        profile_seed=pr["seed"],
        wind_trace=_resolve(base, pr["wind_trace_path"]),
        solar_trace=_resolve(base, pr["solar_trace_path"]),
        mix=mix,
        initial_soc=float(m["initial_soc"]),
        dispatch_years=cfg["dispatch"]["years"],
        workers=cfg["dispatch"]["workers"],
        targets=targets,
        initial_gap=float(t["initial_gap_gw"]),
        max_annual_rate=float(t["max_annual_rate_gw"]),
        lead_times=dict(t["lead_times_years"] or {}),
        costs=costs,
        baseload_replacement_gw=float(c["baseload_replacement_gw"]),
        out_dir=_resolve(base, cfg["output"]["dir"]),
    )
