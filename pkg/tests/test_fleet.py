import numpy as np
import pytest
from hypothesis import given, strategies as st

from firmgrid.errors import ConfigurationError, UndefinedInputError
from firmgrid.fleet import (
    RETAINED_COAL,
    TECHNOLOGIES,
    EafModel,
    Fleet,
    Plant,
    TechnologyClass,
    baseline_fleet,
    capacity_factor,
    cumulative_retired,
    fleet_age_stats,
    fleet_capacity,
    fleet_eaf,
    load_fleet_csv,
    write_fleet_csv,
)

COAL = TECHNOLOGIES["coal"]
BASELINE = baseline_fleet()


def plant(name, mw, start, end=None, tech=COAL):
    return Plant(name, tech, mw, start, end, site_id=f"S-{name}")


# ---- technology and plant records ----


def test_technology_rejects_bad_fields():
    with pytest.raises(ValueError):
        TechnologyClass("x", "baseload", 0.0, 1, 1, 2)
    with pytest.raises(ValueError):
        TechnologyClass("x", "baseload", 1.0, -1, 1, 2)
    with pytest.raises(ValueError):
        TechnologyClass("x", "baseload", 1.0, 1, 3, 2)
    with pytest.raises(ValueError):
        TechnologyClass("x", "peaker", 1.0, 1, 1, 2)


def test_storage_is_priced_per_kwh():
    assert TECHNOLOGIES["bess"].cost_basis == "energy"
    assert TECHNOLOGIES["ocgt"].cost_basis == "power"


def test_default_lifetime_is_fifty_years():
    assert plant("a", 100, 1980).decommission_year == 2030


def test_plant_validation():
    with pytest.raises(ValueError):
        plant("a", 0, 1980)
    with pytest.raises(ValueError):
        plant("a", 100, 1980, 1980)


def test_fleet_rejects_duplicate_names_and_sites():
    with pytest.raises(ValueError):
        Fleet((plant("a", 1, 2000), Plant("a", COAL, 1, 2000, site_id="other")))
    with pytest.raises(ValueError):
        Fleet((plant("a", 1, 2000), Plant("b", COAL, 1, 2000, site_id="S-a")))


# ---- bundled dataset ----


def test_coal_capacity_2022(fleet):
    assert fleet_capacity(fleet, 2022, technology="coal") == pytest.approx(39.8, abs=1e-9)
    assert len(fleet.select(technology="coal")) == 15


def test_coal_unit_sizes_match_reported_range(fleet):
    sizes = [p.nameplate for p in fleet.select(technology="coal")]
    assert min(sizes) == 990 and max(sizes) == 4800
    assert np.mean(sizes) == pytest.approx(2653.3, abs=0.1)  # 39.8 GW / 15


def test_retained_plants_are_the_newest_9_6_gw(fleet):
    retained = [p for p in fleet.plants if p.name in RETAINED_COAL]
    assert sum(p.nameplate for p in retained) == 9600
    assert all(p.decommission_year > 2047 for p in retained)


def test_nuclear_retires_2044_hydro_survives(fleet):
    (koeberg,) = fleet.select(technology="nuclear")
    assert koeberg.decommission_year == 2044
    assert fleet_capacity(fleet, 2050, technology="hydro") == pytest.approx(0.6)
    assert fleet_capacity(fleet, 2050, technology="pumped_storage") == pytest.approx(2.7)


def test_capacity_empty_and_after_last_retirement(fleet):
    assert fleet_capacity(Fleet(()), 2030) == 0
    assert fleet_capacity(fleet, 2100, technology="coal") == 0


def test_capacity_monotone_without_additions(fleet):
    caps = [fleet_capacity(fleet, y, technology="coal") for y in range(2022, 2080)]
    assert all(b <= a + 1e-12 for a, b in zip(caps, caps[1:]))


def test_age_stats(fleet):
    full = fleet_age_stats(fleet, 2023, technology="coal")
    assert full["mean"] == pytest.approx(36.0, abs=1.0)
    older = fleet_age_stats(fleet, 2023, RETAINED_COAL, technology="coal")
    assert older["mean"] == pytest.approx(41.0, abs=1.0)
    assert (older["min"], older["max"]) == (22, 57)


def test_age_stats_single_plant_and_empty():
    f = Fleet((plant("a", 500, 2000),))
    assert fleet_age_stats(f, 2023) == {"mean": 23.0, "min": 23, "max": 23}
    with pytest.raises(UndefinedInputError):
        fleet_age_stats(f, 2023, exclusions=["a"])


# ---- retirements ----


def test_cumulative_retired_milestones(fleet):
    series = cumulative_retired(fleet, 2022, 25)
    assert series[0] == 0
    assert series[15] == pytest.approx(28.52, abs=1e-9)
    assert series[25] == pytest.approx(35.5, abs=1e-9)


def test_cumulative_retired_no_decommissions():
    f = Fleet((plant("a", 500, 2000, 2090),))
    assert np.all(cumulative_retired(f, 2022, 10) == 0)


def test_cumulative_retired_hand_example():
    # a retires 2024, b 2026; c is not in service at the start and never counts.
    f = Fleet((plant("a", 300, 1990, 2024), plant("b", 200, 1990, 2026), plant("c", 999, 2025, 2027)))
    assert cumulative_retired(f, 2022, 5).tolist() == [0, 0, 0.3, 0.3, 0.5, 0.5]


def test_cumulative_retired_requires_horizon():
    with pytest.raises(ValueError):
        cumulative_retired(Fleet(()), 2022, 0)


@given(st.integers(0, 40), st.sampled_from([None, "coal", "nuclear", "ocgt"]))
def test_nameplate_conservation(k, tech):
    f = BASELINE
    start = fleet_capacity(f, 2022, technology=tech)
    retired = cumulative_retired(f, 2022, 40, technology=tech)
    assert retired[k] + fleet_capacity(f, 2022 + k, technology=tech) == pytest.approx(start, abs=1e-9)


# ---- availability ----


def test_calibrated_eaf_endpoints(fleet):
    assert fleet_eaf(fleet, 2002, technology="coal") == pytest.approx(0.80)
    assert fleet_eaf(fleet, 2022, technology="coal") == pytest.approx(0.53)
    assert fleet_eaf(fleet, 2016, technology="nuclear") == pytest.approx(0.85)
    assert fleet_eaf(fleet, 2022, technology="nuclear") == pytest.approx(0.65)


def test_eaf_model_shape():
    m = EafModel("piecewise", ((10, 0.9), (20, 0.7), (30, 0.6)))
    assert m.value(0) == 0.9  # flat before first anchor
    assert m.value(15) == pytest.approx(0.8)
    assert m.value(40) == pytest.approx(0.5)  # last segment extended
    assert m.value(200) == 0.0  # clamped


def test_eaf_model_validation():
    with pytest.raises(ValueError):
        EafModel("piecewise", ((0, 0.5), (1, 0.6)))
    with pytest.raises(ValueError):
        EafModel("constant", ((0, 1.2),))
    with pytest.raises(ValueError):
        EafModel("linear_decline", ((0, 0.9),))


def test_constant_model_gives_constant_eaf():
    f = Fleet((plant("a", 500, 1990),), {"coal": EafModel.constant(0.7)})
    assert [fleet_eaf(f, y) for y in (1995, 2010, 2030)] == [0.7, 0.7, 0.7]


def test_eaf_is_capacity_weighted():
    f = Fleet(
        (plant("a", 300, 1990), plant("b", 100, 2000)),
        {"coal": EafModel("piecewise", ((0, 0.9), (40, 0.5)), basis="age")},
    )
    # ages 30 and 20 -> 0.6 and 0.7
    assert fleet_eaf(f, 2020) == pytest.approx((300 * 0.6 + 100 * 0.7) / 400)


def test_eaf_missing_model_and_empty_selection():
    f = Fleet((plant("a", 500, 1990),), {})
    with pytest.raises(ConfigurationError):
        fleet_eaf(f, 2000)
    with pytest.raises(UndefinedInputError):
        fleet_eaf(f, 1950)


@given(st.integers(1950, 2020), st.floats(0.0, 1.0))
def test_single_plant_eaf_equals_model(commission, top):
    model = EafModel("piecewise", ((0, top), (30, top / 2)), basis="age")
    p = plant("a", 123, commission, commission + 60)
    f = Fleet((p,), {"coal": model})
    year = commission + 10
    assert fleet_eaf(f, year) == pytest.approx(model.for_plant(p, year))


# ---- capacity factor ----


@pytest.mark.parametrize(
    "energy, capacity, expected",
    [(176.6, 39.8, 50.7), (10.1, 1.9, 60.7), (14.0, 3.3, 48.4), (9.7, 3.4, 32.6), (6.5, 2.8, 26.5), (3.6, 3.4, 12.1)],
)
def test_capacity_factor_fleet_table(energy, capacity, expected):
    assert capacity_factor(energy, capacity) == pytest.approx(expected, abs=0.1)


def test_capacity_factor_full_year_and_zero():
    assert capacity_factor(8.76, 1.0) == pytest.approx(100.0)
    assert capacity_factor(0.0, 5.0) == 0.0
    with pytest.raises(UndefinedInputError):
        capacity_factor(1.0, 0.0)


@given(st.floats(0, 500), st.floats(0.1, 100), st.floats(0.1, 10))
def test_capacity_factor_linear_in_energy_inverse_in_capacity(e, c, k):
    assert capacity_factor(k * e, c) == pytest.approx(k * capacity_factor(e, c), rel=1e-9, abs=1e-9)
    assert capacity_factor(e, k * c) == pytest.approx(capacity_factor(e, c) / k, rel=1e-9, abs=1e-9)


# ---- csv ----


def test_fleet_csv_round_trip(tmp_path, fleet):
    path = tmp_path / "fleet.csv"
    write_fleet_csv(fleet, path)
    again = load_fleet_csv(path)
    assert again.plants == fleet.plants


def test_fleet_csv_blank_decommission_uses_default(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("name,technology,nameplate_mw,commission_year,decommission_year,site_id\nA,coal,100,1990,,S1\n")
    assert load_fleet_csv(path).plants[0].decommission_year == 2040


def test_fleet_csv_errors_name_the_line(tmp_path):
    path = tmp_path / "f.csv"
    path.write_text("name,technology,nameplate_mw,commission_year,decommission_year,site_id\nA,coal,x,1990,,S1\n")
    with pytest.raises(ConfigurationError, match=":2:"):
        load_fleet_csv(path)
    path.write_text("name,technology\nA,coal\n")
    with pytest.raises(ConfigurationError, match="missing columns"):
        load_fleet_csv(path)
    path.write_text("name,technology,nameplate_mw,commission_year,decommission_year,site_id\nA,geothermal,1,1990,,S1\n")
    with pytest.raises(ConfigurationError, match="unknown technology"):
        load_fleet_csv(path)


def test_with_decommission_changes(fleet):
    moved = fleet.with_decommission_changes({"Komati": 2030})
    assert fleet_capacity(moved, 2025, technology="coal") > fleet_capacity(fleet, 2025, technology="coal")
    with pytest.raises(ValueError):
        fleet.with_decommission_changes({"Nowhere": 2030})
