import json
import math

import pytest

from macroq import constraints as c
from macroq.errors import ConfigError, DomainError, UnitMismatchError


@pytest.fixture(scope="module")
def reqs():
    return c.load_requirements()


def mission(**values):
    return c.MissionConfig("test", dict(values))


def item(report, name):
    return next(i for i in report.items if i.name == name)


def test_baseline_environment_temperature_margin(reqs):
    rep = c.check_requirements(c.load_mission(), reqs)
    it = item(rep, "environment_temperature")
    assert it.status == "pass"
    assert it.margin == pytest.approx(4.0)


def test_warm_environment_fails_science_only(reqs):
    rep = c.check_requirements(mission(environment_temperature=(45.0, "K")), reqs)
    assert item(rep, "environment_temperature").status == "fail"
    assert item(rep, "environment_temperature_interference").status == "pass"
    assert item(rep, "environment_temperature_interference").margin == pytest.approx(0.0)


def test_units_are_converted(reqs):
    rep = c.check_requirements(mission(particle_radius=(0.0565, "um")), reqs)
    it = item(rep, "particle_radius")
    assert it.status == "pass" and it.value == pytest.approx(56.5)


def test_empty_config_is_all_unknown(reqs):
    rep = c.check_requirements(mission(), reqs)
    assert len(rep.items) == len(reqs.requirements)
    assert all(i.status == "unknown" and i.value is None for i in rep.items)
    assert not rep.passed()
    assert rep.tier_status() == {"interference": False, "science": False}


def test_report_is_exhaustive(reqs):
    rep = c.check_requirements(c.load_mission(), reqs)
    assert [i.name for i in rep.items] == [r.name for r in reqs.requirements]
    assert {i.status for i in rep.items} <= {"pass", "fail", "unknown"}
    text = rep.to_text()
    assert all(r.name in text for r in reqs.requirements)
    json.dumps(rep.to_dict())


def test_unit_mismatch_raises(reqs):
    with pytest.raises(UnitMismatchError):
        c.check_requirements(mission(environment_temperature=(16.0, "kg")), reqs)


@pytest.mark.parametrize(
    "op, value, threshold, ok",
    [
        ("<", 20.0, 20.0, False),
        ("<=", 20.0, 20.0, True),
        (">", 3.0, 2.0, True),
        (">=", 1.9, 2.0, False),
        ("==", 0.0, 0.0, True),
        ("range", 120.0, (30.0, 120.0), True),
        ("range", 121.0, (30.0, 120.0), False),
    ],
)
def test_comparisons(op, value, threshold, ok):
    assert c._evaluate(op, value, threshold)[0] is ok


def test_bad_requirement_definitions(tmp_path):
    with pytest.raises(ConfigError):
        c.Requirement("x", "~", 1.0, "K")
    with pytest.raises(ConfigError):
        c.Requirement("x", "range", (2.0, 1.0), "K")
    with pytest.raises(ConfigError):
        c.RequirementSet("s", (c.Requirement("x", "<", 1.0, "K"), c.Requirement("x", "<", 2.0, "K")))
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"values": {"environment_temperature": 16}}))
    with pytest.raises(ConfigError, match="values.environment_temperature"):
        c.load_mission(p)
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        c.load_requirements(p)


def test_finesse_limits():
    ir = c.finesse_limit(1064e-9, 1e-6, 0.055)
    uv = c.finesse_limit(200e-9, 1e-6, 0.055)
    assert ir == pytest.approx(30.387768940177644, rel=1e-12)
    assert uv == pytest.approx(5.711986642890533, rel=1e-12)
    assert ir / uv == pytest.approx(5.32, rel=1e-12)
    assert c.finesse_limit(1064e-9, 0.0, 0.055) == math.inf
    with pytest.raises(DomainError):
        c.finesse_limit(1064e-9, -1e-6, 0.055)


def table(lines, totals=(), tolerance=0.5):
    return c.budget_from_dict({"name": "t", "unit": "kg", "lines": list(lines), "totals": list(totals)}, tolerance)


def test_single_line_margin():
    rep = c.check_budget(table([{"name": "a", "cbe": 4, "margin": 0.05, "printed": 4.2}]))
    (cell,) = rep.cells
    assert cell.computed == pytest.approx(4.20) and cell.ok


def test_tolerance_edge():
    ok = c.check_budget(table([{"name": "a", "cbe": 10, "margin": 0.0, "printed": 10.5}]))
    bad = c.check_budget(table([{"name": "a", "cbe": 10, "margin": 0.0, "printed": 10.51}]))
    assert ok.ok and not bad.ok


def test_empty_table():
    rep = c.check_budget(table([], [{"name": "Total", "components": "all", "cbe": 0, "printed": 0}]))
    assert rep.ok and all(cell.computed == 0 for cell in rep.cells)


def test_totals_with_optional_lines():
    lines = [
        {"name": "a", "cbe": 10, "margin": 0.1, "printed": 11},
        {"name": "b", "cbe": 5, "margin": 0.2, "printed": 6, "optional": True},
    ]
    totals = [
        {"name": "Total", "components": "non_optional", "cbe": 10, "printed": 11},
        {"name": "Total (optional)", "components": "optional", "cbe": 5, "printed": 6},
    ]
    assert c.check_budget(table(lines, totals)).ok
    with pytest.raises(ConfigError):
        c.check_budget(table(lines, [{"name": "T", "components": ["zzz"], "cbe": 1}]))


def test_negative_budget_values_rejected():
    with pytest.raises(DomainError):
        c.BudgetLine("a", -1.0)


def test_shipped_budgets_failures():
    rep = c.check_budgets(c.load_budgets())
    failed = {(f.table, f.row, f.column) for f in rep.failures()}
    assert failed == {
        ("mass_total", "Payload", "cbe+margin"),
        ("mass_payload", "CMOS readout electronics", "cbe+margin"),
        ("mass_payload", "Total", "cbe"),
        ("mass_payload", "Total", "cbe+margin"),
        ("power_payload", "Total (maximal)", "cbe+margin"),
        ("power_payload", "Total (science mode)", "cbe+margin"),
    }
    assert "6 of" in rep.to_text()
