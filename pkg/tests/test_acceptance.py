"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (lines also appear in the terminal
summary) or ``python3 tests/test_acceptance.py`` for the lines alone.
"""

import contextlib
import io
import json
import sys
import tempfile
from pathlib import Path

import numpy as np

from firmgrid.cli import main as cli_main
from firmgrid.costing import coal_fuel_cost, firm_fuel_cost, fuel_report
from firmgrid.demand import envelope, historical_generation, irp2010_forecast, synthesize_hourly
from firmgrid.dispatch import END_STATE_MIX, GenerationMix, firm_utilization, simulate_year
from firmgrid.fleet import baseline_fleet, capacity_factor, cumulative_retired
from firmgrid.planner import ProgramTargets, build_program, replacement_capacity
from firmgrid.profiles import synth_solar, synth_wind

sys.path.insert(0, str(Path(__file__).parent))
import test_planner  # noqa: E402

RESULTS: list[str] = []


def record(number, title, checks):
    """``checks`` is a list of (label, value, expected, tolerance); tolerance None means exact."""
    failed = []
    parts = []
    for label, value, expected, tol in checks:
        ok = value == expected if tol is None else abs(value - expected) <= tol
        shown = f"{label}={value:.4g}" if isinstance(value, float) else f"{label}={value}"
        parts.append(shown)
        if not ok:
            failed.append(f"{label}: got {value!r}, want {expected!r}" + ("" if tol is None else f" +/- {tol}"))
    status = "FAIL" if failed else "PASS"
    line = f"{status} [{number}] {title}: " + ", ".join(parts)
    if failed:
        line += " | " + "; ".join(failed)
    RESULTS.append(line)
    print(line)
    assert not failed, line


def _cli_json(*args):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main(list(args))
    assert code == 0
    return json.loads(buf.getvalue())


def test_01_cost_table():
    data = _cli_json("costs", "--format", "json")
    p = data["pathways"]
    lines = {line["technology"]: line["total"] for line in p["renewable"]["lines"]}
    record(
        1,
        "cost table",
        [
            ("coal", p["coal"]["total_busd"], 171, 1),
            ("nuclear", p["nuclear"]["total_busd"], 185, 1),
            ("wind", lines["wind"], 102, 1),
            ("solar", lines["solar"], 20, 1),
            ("bess", lines["bess"], 10, 1),
            ("ocgt", lines["ocgt"], 13, 1),
            ("renewable", p["renewable"]["total_busd"], 145, 1),
            ("coal/yr", p["coal"]["annual_busd"], 6.8, 0.1),
            ("nuclear/yr", p["nuclear"]["annual_busd"], 7.4, 0.1),
            ("renewable/yr", p["renewable"]["annual_busd"], 5.8, 0.1),
            ("coal USD/MWh", p["coal"]["usd_per_mwh"], 31, 1),
            ("nuclear USD/MWh", p["nuclear"]["usd_per_mwh"], 33, 1),
            ("renewable USD/MWh", p["renewable"]["usd_per_mwh"], 26, 1),
            ("coal ZAR/kWh", p["coal"]["zar_per_kwh"], 0.58, 0.01),
            ("nuclear ZAR/kWh", p["nuclear"]["zar_per_kwh"], 0.63, 0.01),
            ("renewable ZAR/kWh", p["renewable"]["zar_per_kwh"], 0.50, 0.01),
        ],
    )


def test_02_capacity_factors():
    rows = [
        ("coal", 176.6, 39.8, 50.7),
        ("nuclear", 10.1, 1.9, 60.7),
        ("hydro+pumped", 14.0, 3.3, 48.4),
        ("wind", 9.7, 3.4, 32.6),
        ("solar", 6.5, 2.8, 26.5),
        ("dispatchable", 3.6, 3.4, 12.1),
    ]
    record(2, "capacity factors", [(n, capacity_factor(e, c), cf, 0.1) for n, e, c, cf in rows])


def test_03_replacement_sizing():
    value = replacement_capacity(35, 0.507, 0.70)
    record(3, "replacement sizing", [("exact", value, 25.35, 1e-9), ("vs 25 GW", value, 25.0, 0.5)])


def test_04_firm_program():
    s = build_program(ProgramTargets())
    avg = s.average_annual("ocgt")
    cost = avg * 867  # GW x USD/kW -> million USD
    record(
        4,
        "firm program",
        [
            ("GW/yr", avg, 0.75, 0.0115),
            ("M USD/yr", cost, 650, 10),
            ("GW/yr over commissioning years", s.average_over_commissioning_years("ocgt"), 0.75, 0.0115),
        ],
    )


def test_05_decommissioning():
    series = cumulative_retired(baseline_fleet(), 2022, 25)
    record(5, "decommissioning", [("+15 y", series[15], 28, 1), ("+25 y", series[25], 35, 1)])


def test_06_fuel_economics():
    r = fuel_report()
    record(
        6,
        "fuel economics",
        [
            ("coal fuel", coal_fuel_cost(176.6, 12.46), 2.2, 0.05),
            ("firm fuel", firm_fuel_cost(9, 20, r["intensity_gj_per_mwh"]), 0.75, 0.01),
            ("(a) B USD", r["incremental"]["absolute"], 1.65, 0.05),
            ("(a) %", r["incremental"]["percent"], 75, 1),
            ("(b) B USD", r["literal"]["absolute"], 1.45, 0.05),
            ("(b) %", r["literal"]["percent"], 66, 1),
        ],
    )


def test_07_demand_envelope():
    band = envelope(historical_generation(), irp2010_forecast())
    record(7, "demand envelope", [("2022 gap TWh", band.gap(2022), 165.0, None)])


def _greedy_oracle(demand, mix, wind, solar):
    out = []
    for d, w, s in zip(demand, wind, solar):
        left = d - min(mix.wind_capacity * 1000 * w + mix.solar_capacity * 1000 * s, d)
        base = min(mix.baseload_capacity * 1000 * mix.baseload_availability, left)
        left -= base
        firm = min(mix.firm_capacity * 1000, left)
        out.append((base, firm, left - firm))
    return out


def test_08_dispatch_properties():
    mix = END_STATE_MIX
    utilization = []
    worst_balance = 0.0
    soc_ok = True
    adequacy_cases = 0
    adequacy_ok = True
    for seed in range(1, 21):
        demand = synthesize_hourly(222, 35, seed=seed)
        wind = synth_wind(0.326, seed)
        solar = synth_solar(0.265, seed)
        res = simulate_year(demand, mix, wind, solar)
        worst_balance = max(worst_balance, float(res.balance_residual().max()))
        soc_ok &= bool(np.all(res.soc >= 0) and np.all(res.soc <= mix.storage_energy * 1000))
        utilization.append(firm_utilization(res, mix.firm_capacity))
        # The end-state mix itself does not meet the premise (9.03 + 15 + 6 < 35 GW),
        # so the implication is checked on the same year with firm sized to meet it.
        for m in (mix, None):
            if m is None:
                need = demand.max() / 1000 - mix.baseload_capacity * mix.baseload_availability - mix.storage_power
                m = GenerationMix(**{**mix.__dict__, "firm_capacity": max(need, 0.0)})
            if m.baseload_capacity * m.baseload_availability + m.firm_capacity + m.storage_power >= demand.max() / 1000:
                adequacy_cases += 1
                full = simulate_year(demand, m, wind, solar, initial_soc=1.0)
                adequacy_ok &= bool(full.unserved.sum() == 0)

    rng = np.random.default_rng(0)
    oracle_ok = True
    for _ in range(200):
        small = GenerationMix(
            baseload_capacity=rng.uniform(0, 20),
            baseload_availability=rng.uniform(0, 1),
            wind_capacity=rng.uniform(0, 20),
            solar_capacity=rng.uniform(0, 20),
            firm_capacity=rng.uniform(0, 20),
        )
        d, w, s = rng.uniform(0, 40_000, 24), rng.uniform(0, 1, 24), rng.uniform(0, 1, 24)
        res = simulate_year(d, small, w, s, 0.0)
        got = list(zip(res.baseload.tolist(), res.firm.tolist(), res.unserved.tolist()))
        oracle_ok &= got == _greedy_oracle(d.tolist(), small, w.tolist(), s.tolist())

    print(f"    firm utilization over 20 years: mean {np.mean(utilization):.2f} %, max {max(utilization):.2f} %")
    record(
        8,
        "dispatch properties",
        [
            ("(i) balance ok", worst_balance < 1e-9, True, None),
            ("(ii) soc ok", soc_ok, True, None),
            ("(iii) firm util < 10 %", max(utilization) < 10.0, True, None),
            ("(iv) adequacy cases", adequacy_cases >= 20 and adequacy_ok, True, None),
            ("(v) oracle ok", oracle_ok, True, None),
        ],
    )


def test_09_planner_properties():
    outcomes = {}
    for name in (
        "test_replan_is_idempotent",
        "test_site_assignment_respects_headroom_and_conserves",
        "test_no_commissioning_before_lead_time",
    ):
        fn = getattr(test_planner, name)
        examples = fn._hypothesis_internal_use_settings.max_examples
        try:
            fn()
            outcomes[name] = examples >= 1000
        except AssertionError:
            outcomes[name] = False
    record(9, "planner properties", [(k.replace("test_", ""), v, True, None) for k, v in outcomes.items()])


def test_10_determinism():
    with tempfile.TemporaryDirectory() as tmp:
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf), contextlib.redirect_stderr(io.StringIO()):
            assert cli_main(["run", "--out", f"{tmp}/a"]) == 0
            assert cli_main(["run", "--out", f"{tmp}/b"]) == 0
        same = Path(f"{tmp}/a/report.json").read_bytes() == Path(f"{tmp}/b/report.json").read_bytes()
    record(10, "determinism", [("byte-identical", same, True, None)])


if __name__ == "__main__":
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                pass
