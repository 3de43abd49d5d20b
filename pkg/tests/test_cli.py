import json

import pytest

from firmgrid.cli import example_config_path, main
from firmgrid.config import ConfigParseError, load_config, validate
from firmgrid.runner import emit_plot_data, run_scenario


def write(tmp_path, text, name="c.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_bundled_config_is_valid():
    assert validate(example_config_path()) == []


def test_infeasible_peak_finding(tmp_path):
    path = write(tmp_path, "demand:\n  annual_twh: 222\n  peak_gw: 20\n  seed: 1\nprofiles:\n  seed: 1\n")
    (f,) = validate(path)
    assert f.code == "infeasible-peak" and f.line == 3


def test_missing_file_and_seed_findings(tmp_path):
    path = write(tmp_path, "demand:\n  seed: 1\nprofiles:\n  wind_trace_path: gone.csv\n")
    codes = sorted(f.code for f in validate(path))
    assert codes == ["missing-file", "missing-seed"]


def test_unknown_key_and_type(tmp_path):
    path = write(tmp_path, "mix:\n  wind_gw: lots\n  wnd_gw: 3\n")
    found = {f.code: f for f in validate(path)}
    assert found["type"].line == 2 and found["unknown-key"].line == 3


def test_parse_error_has_position(tmp_path):
    path = write(tmp_path, "demand:\n  peak_gw: [1,\n")
    with pytest.raises(ConfigParseError) as info:
        validate(path)
    assert info.value.line is not None and info.value.column is not None
    with pytest.raises(ConfigParseError):
        validate(tmp_path / "absent.yaml")


def test_validate_writes_nothing(tmp_path):
    path = write(tmp_path, "demand:\n  seed: 1\nprofiles:\n  seed: 1\n")
    before = sorted(p.name for p in tmp_path.iterdir())
    validate(path)
    assert sorted(p.name for p in tmp_path.iterdir()) == before


def test_exit_codes(tmp_path, capsys):
    good = write(tmp_path, "demand:\n  seed: 1\nprofiles:\n  seed: 1\n", "good.yaml")
    bad = write(tmp_path, "demand:\n  peak_gw: 1\n", "bad.yaml")
    broken = write(tmp_path, "x: [\n", "broken.yaml")
    assert main(["validate", "--config", str(good)]) == 0
    assert main(["validate", "--config", str(bad)]) == 3
    assert main(["validate", "--config", str(broken)]) == 3
    assert main(["run", "--config", str(bad), "--out", str(tmp_path / "o")]) == 3
    trace = write(tmp_path, "0.5\n" * 10, "short_wind.csv")
    runtime = write(tmp_path, f"demand:\n  seed: 1\nprofiles:\n  seed: 1\n  wind_trace_path: {trace.name}\n", "rt.yaml")
    assert main(["simulate", "--config", str(runtime)]) == 4


def test_costs_table_output(capsys):
    assert main(["costs"]) == 0
    out = capsys.readouterr().out
    assert "171.9" in out and "145.7" in out and "0.50" in out


def test_costs_json_and_csv(capsys):
    main(["costs", "--format", "json"])
    data = json.loads(capsys.readouterr().out)
    assert data["pathways"]["nuclear"]["total_busd"] == pytest.approx(185.15)
    main(["costs", "--format", "csv"])
    assert capsys.readouterr().out.startswith("pathway,technology")


def test_plan_and_simulate(tmp_path, capsys):
    assert main(["plan", "--format", "csv"]) == 0
    assert "2047,ocgt,0.625,GW" in capsys.readouterr().out
    assert main(["simulate", "--format", "json", "--seed", "3", "--out", str(tmp_path)]) == 0
    years = json.loads(capsys.readouterr().out)
    assert len(years) == 3 and (tmp_path / "dispatch_year_0.csv").exists()


def test_run_is_byte_identical(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path / "a")]) == 0
    assert main(["run", "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    report = json.loads(a)
    assert report["schema_version"] == 1
    assert all(set(w) == {"code", "message"} for w in report["warnings"])


def test_parallel_years_match_serial(tmp_path):
    text = "demand:\n  seed: 5\nprofiles:\n  seed: 5\ndispatch:\n  years: 3\n  workers: {}\n"
    serial = run_scenario(load_config(write(tmp_path, text.format(1), "s.yaml")))
    parallel = run_scenario(load_config(write(tmp_path, text.format(3), "p.yaml")))
    assert serial.to_dict()["dispatch"] == parallel.to_dict()["dispatch"]


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("FIRMGRID_OUT", str(tmp_path / "env"))
    cfg = write(tmp_path, "demand:\n  seed: 1\nprofiles:\n  seed: 1\ndispatch:\n  years: 1\n")
    assert main(["run", "--config", str(cfg)]) == 0
    assert (tmp_path / "env" / "report.json").exists()


def test_zero_mix_sheds_all_load(tmp_path):
    text = (
        "demand:\n  seed: 1\nprofiles:\n  seed: 1\n"
        "mix:\n  baseload_gw: 0\n  wind_gw: 0\n  solar_gw: 0\n  storage_power_gw: 0\n"
        "  storage_energy_gwh: 0\n  firm_gw: 0\n"
    )
    report = run_scenario(load_config(write(tmp_path, text)))
    (year,) = report.dispatch
    assert year["unserved_energy_twh"] == pytest.approx(222, rel=1e-9)
    assert "LOAD_SHEDDING" in {w.code for w in report.warnings}


def test_paper_baseline_cost_table():
    report = run_scenario(load_config(example_config_path()), dispatch=False)
    assert report.costs.row("coal").capex.total == pytest.approx(171.9)
    assert report.costs.row("renewable").capex.total == pytest.approx(145.679)


def test_emit_plot_data(tmp_path):
    report = run_scenario(load_config(example_config_path()))
    files = emit_plot_data(report, tmp_path)
    assert set(files) == {"retirement_curve", "fleet_eaf", "demand_envelope", "demand_scenario", "firm_duration_curve"}
    rows = files["retirement_curve"].read_text().splitlines()
    assert rows[16].split(",")[:3] == ["2037", "15", "28.52"]
    for line in files["demand_envelope"].read_text().splitlines()[1:]:
        _, _, _, lo, hi = line.split(",")
        assert float(lo) <= float(hi)


def test_constant_eaf_gives_flat_series(tmp_path):
    text = "demand:\n  seed: 1\nprofiles:\n  seed: 1\nfleet:\n  eaf_models:\n    coal: 0.7\n"
    report = run_scenario(load_config(write(tmp_path, text)), dispatch=False)
    files = emit_plot_data(report, tmp_path / "plots")
    coal = {line.split(",")[1] for line in files["fleet_eaf"].read_text().splitlines()[1:]} - {""}
    assert coal == {"0.7"}
