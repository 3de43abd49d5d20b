"""Command-line interface.

Exit status: 0 success, 3 invalid or unparseable config, 4 runtime error
(argparse itself exits 2 on bad usage).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from importlib import resources
from pathlib import Path

from firmgrid.config import ConfigParseError, ScenarioConfig, load_config, validate
from firmgrid.errors import ConfigurationError, FirmgridError
from firmgrid.runner import emit_plot_data, run_costs, run_dispatch, run_plan, run_scenario, load_fleet
from firmgrid.demand import extrapolate

EXIT_OK = 0
EXIT_INVALID = 3
EXIT_RUNTIME = 4
OUT_ENV = "FIRMGRID_OUT"


def example_config_path() -> Path:
    return Path(str(resources.files("firmgrid") / "data" / "example_config.yaml"))


def output_dir(args, cfg: ScenarioConfig) -> Path:
    """--out, then the config's output.dir, then $FIRMGRID_OUT, then ./out."""
    if args.out:
        return Path(args.out)
    if cfg.out_dir is not None:
        return cfg.out_dir
    return Path(os.environ.get(OUT_ENV) or "out")


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config or example_config_path())
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _rows_to_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _table(header, rows) -> str:
    cells = [tuple(str(c) for c in header)] + [tuple(str(c) for c in r) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def cmd_validate(args) -> int:
    path = args.config or example_config_path()
    findings = validate(path)
    if args.format == "json":
        _emit(json.dumps([f.__dict__ for f in findings], indent=2))
    else:
        for f in findings:
            _emit(f"{path}:{f}")
        if not findings:
            _emit(f"{path}: ok")
    return EXIT_INVALID if findings else EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load(args)
    results = run_dispatch(cfg)
    keys = ("firm_utilization", "unserved_energy_twh", "load_shedding_hours", "max_consecutive_deficit_hours")
    summaries = []
    for index, seeds, res in results:
        s = res.summary()
        s["year_index"] = index
        summaries.append(s)
    if args.format == "json":
        _emit(json.dumps(summaries, indent=2, sort_keys=True))
    else:
        rows = [(s["year_index"],) + tuple(round(s[k], 6) if isinstance(s[k], float) else s[k] for k in keys) for s in summaries]
        header = ("year_index",) + keys
        _emit(_rows_to_csv(header, rows) if args.format == "csv" else _table(header, rows))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for index, _, res in results:
            res.to_csv(out / f"dispatch_year_{index}.csv")
    return EXIT_OK


def cmd_plan(args) -> int:
    cfg = _load(args)
    fleet = load_fleet(cfg)
    demand = extrapolate(cfg.annual_twh, cfg.growth_rate, cfg.horizon, cfg.start_year)
    schedule, sites = run_plan(cfg, fleet, demand)
    if args.format == "json":
        _emit(json.dumps(schedule.to_dict(), indent=2, sort_keys=True))
    else:
        rows = [(e.year, e.technology, round(e.capacity, 6), e.unit, e.site_id or "") for e in schedule.entries]
        header = ("year", "technology", "capacity", "unit", "site_id")
        _emit(_rows_to_csv(header, rows) if args.format == "csv" else _table(header, rows))
        if sites.total_unassigned > 0:
            sys.stderr.write(f"warning: {sites.total_unassigned:.2f} GW of firm plant has no retired site\n")
    return EXIT_OK


def cmd_costs(args) -> int:
    cfg = _load(args)
    report = run_costs(cfg)
    if args.format == "json":
        _emit(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    elif args.format == "csv":
        rows = []
        for r in report.rows:
            for line in r.capex.lines:
                rows.append((r.name, line.technology, line.unit_cost, line.capacity, line.unit, line.total, line.annual))
            rows.append((r.name, "total", "", "", "", r.capex.total, r.capex.annual))
        _emit(_rows_to_csv(("pathway", "technology", "unit_cost", "capacity", "unit", "total_busd", "annual_busd"), rows))
    else:
        _emit(report.table())
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    report = run_scenario(cfg)
    path = report.write(output_dir(args, cfg))
    for w in report.warnings:
        sys.stderr.write(f"warning [{w.code}] {w.message}\n")
    if args.format == "json":
        _emit(report.to_json())
    else:
        _emit(str(path))
    return EXIT_OK


def cmd_emit_plots(args) -> int:
    cfg = _load(args)
    report = run_scenario(cfg)
    files = emit_plot_data(report, output_dir(args, cfg))
    for name in sorted(files):
        _emit(str(files[name]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario YAML (default: bundled example)")
    common.add_argument("--out", help=f"output directory (default: config output.dir, ${OUT_ENV}, ./out)")
    common.add_argument("--seed", type=int, help="override demand and profile seeds")
    common.add_argument("--format", choices=("json", "csv", "table"), default="table")

    parser = argparse.ArgumentParser(prog="firmgrid", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, text in (
        ("validate", cmd_validate, "check a scenario config"),
        ("simulate", cmd_simulate, "hourly dispatch only"),
        ("plan", cmd_plan, "build schedule only"),
        ("costs", cmd_costs, "pathway cost comparison"),
        ("run", cmd_run, "full pipeline, writes report.json"),
        ("emit-plots", cmd_emit_plots, "write plot-ready CSV series"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.set_defaults(func=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigParseError, ConfigurationError) as exc:
        sys.stderr.write(f"invalid config: {exc}\n")
        return EXIT_INVALID
    except (FirmgridError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
