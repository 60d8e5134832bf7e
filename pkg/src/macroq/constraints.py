"""Mission requirement and budget checks.

Requirements, mission configurations and budget tables are JSON files;
every numeric value carries a unit from :mod:`macroq.units`. Missing
configuration values are reported as unknown, never as passing.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from macroq import units
from macroq.errors import ConfigError, DomainError

OPS = ("<", "<=", ">", ">=", "==", "range")
BUDGET_TOLERANCE = 0.5


def _read_json(path, default_name):
    if path is None:
        text = resources.files("macroq").joinpath(f"data/{default_name}").read_text(encoding="utf-8")
        source = f"built-in {default_name}"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    try:
        return json.loads(text), source
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON ({exc})", path=source) from exc


# -- requirements -----------------------------------------------------------


@dataclass(frozen=True)
class Requirement:
    name: str
    op: str
    value: float | tuple[float, float]
    unit: str
    tier: str = "science"
    quantity: str = ""  # config key; defaults to name
    group: str = ""
    soft: bool = False
    note: str = ""

    def __post_init__(self):
        if self.op not in OPS:
            raise ConfigError(f"unknown comparison {self.op!r}; expected one of {OPS}", path=self.name)
        units.dimension(self.unit)
        if self.op == "range" and not (isinstance(self.value, tuple) and self.value[0] <= self.value[1]):
            raise ConfigError("range needs [low, high]", path=self.name)
        if not self.quantity:
            object.__setattr__(self, "quantity", self.name)


@dataclass(frozen=True)
class RequirementSet:
    name: str
    requirements: tuple[Requirement, ...]
    version: int = 1

    def __post_init__(self):
        seen = set()
        for r in self.requirements:
            if r.name in seen:
                raise ConfigError(f"duplicate requirement {r.name!r}", path=self.name)
            seen.add(r.name)

    @property
    def tiers(self) -> list[str]:
        return sorted({r.tier for r in self.requirements})


def load_requirements(path: str | Path | None = None) -> RequirementSet:
    raw, source = _read_json(path, "requirements.json")
    try:
        items = []
        for i, entry in enumerate(raw["requirements"]):
            value = entry["value"]
            value = tuple(float(v) for v in value) if isinstance(value, list) else float(value)
            extra = {k: entry[k] for k in ("tier", "quantity", "group", "soft", "note") if k in entry}
            try:
                items.append(Requirement(entry["name"], entry["op"], value, entry["unit"], **extra))
            except ConfigError as exc:
                raise ConfigError(str(exc), path=f"{source}: requirements[{i}]") from exc
        return RequirementSet(raw.get("name", source), tuple(items), int(raw.get("version", 1)))
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"malformed requirement set (missing {exc})", path=source) from exc


@dataclass(frozen=True)
class MissionConfig:
    name: str
    values: dict = field(default_factory=dict)  # quantity -> (value, unit)


def load_mission(path: str | Path | None = None) -> MissionConfig:
    """Read ``{"name", "values": {quantity: {"value", "unit"}}}``; units are mandatory."""
    raw, source = _read_json(path, "mission_baseline.json")
    values = {}
    for key, entry in raw.get("values", {}).items():
        if not isinstance(entry, dict) or "value" not in entry or "unit" not in entry:
            raise ConfigError("each value needs 'value' and 'unit'", path=f"{source}: values.{key}")
        units.dimension(entry["unit"])
        values[key] = (float(entry["value"]), entry["unit"])
    return MissionConfig(raw.get("name", source), values)


@dataclass(frozen=True)
class ItemResult:
    name: str
    tier: str
    status: str  # "pass", "fail" or "unknown"
    value: float | None  # in the requirement's unit
    op: str
    threshold: float | tuple[float, float]
    unit: str
    margin: float | None  # positive means satisfied with room to spare
    soft: bool = False
    note: str = ""


@dataclass(frozen=True)
class RequirementReport:
    mission: str
    requirement_set: str
    items: tuple[ItemResult, ...]

    def passed(self, tier: str | None = None) -> bool:
        """All items (of ``tier``) pass; unknown items count as not passing."""
        chosen = [i for i in self.items if tier is None or i.tier == tier]
        return bool(chosen) and all(i.status == "pass" for i in chosen)

    def tier_status(self) -> dict[str, bool]:
        return {t: self.passed(t) for t in sorted({i.tier for i in self.items})}

    def to_dict(self) -> dict:
        return {
            "mission": self.mission,
            "requirement_set": self.requirement_set,
            "overall": self.passed(),
            "tiers": self.tier_status(),
            "items": [i.__dict__ | {"threshold": list(i.threshold) if isinstance(i.threshold, tuple) else i.threshold}
                      for i in self.items],
        }

    def to_text(self) -> str:
        lines = [f"requirements {self.requirement_set} vs mission {self.mission}"]
        for i in self.items:
            thr = f"[{i.threshold[0]:g}, {i.threshold[1]:g}]" if isinstance(i.threshold, tuple) else f"{i.threshold:g}"
            val = "-" if i.value is None else f"{i.value:g}"
            mar = "" if i.margin is None else f" margin {i.margin:+g} {i.unit}"
            soft = " (soft)" if i.soft else ""
            lines.append(f"  {i.status.upper():7s} [{i.tier}] {i.name}: {val} {i.op} {thr} {i.unit}{mar}{soft}")
        for tier, ok in self.tier_status().items():
            lines.append(f"tier {tier}: {'PASS' if ok else 'FAIL'}")
        lines.append(f"overall: {'PASS' if self.passed() else 'FAIL'}")
        return "\n".join(lines)


def _evaluate(op, value, threshold):
    """Return (passes, margin) with margin in the threshold's unit."""
    if op == "range":
        lo, hi = threshold
        margin = min(value - lo, hi - value)
        return margin >= 0, margin
    if op == "==":
        scale = max(abs(threshold), 1.0)
        return math.isclose(value, threshold, rel_tol=1e-9, abs_tol=1e-12 * scale), 0.0 - abs(value - threshold)
    margin = threshold - value if op in ("<", "<=") else value - threshold
    strict = op in ("<", ">")
    return (margin > 0) if strict else (margin >= 0), margin


def check_requirements(mission: MissionConfig, reqs: RequirementSet) -> RequirementReport:
    """Evaluate every requirement against the mission values.

    Raises :class:`~macroq.errors.UnitMismatchError` when a configured value
    has a unit of a different dimension than its requirement.
    """
    results = []
    for r in reqs.requirements:
        if r.quantity not in mission.values:
            results.append(ItemResult(r.name, r.tier, "unknown", None, r.op, r.value, r.unit, None, r.soft, r.note))
            continue
        raw, unit = mission.values[r.quantity]
        value = units.convert(raw, unit, r.unit)
        ok, margin = _evaluate(r.op, value, r.value)
        results.append(
            ItemResult(r.name, r.tier, "pass" if ok else "fail", value, r.op, r.value, r.unit, margin, r.soft, r.note)
        )
    return RequirementReport(mission.name, reqs.name, tuple(results))


def finesse_limit(wavelength: float, rel_length_stability: float, cavity_length: float) -> float:
    """Largest finesse whose linewidth still exceeds the length-noise frequency jitter.

    ``pi wavelength / (2 (dL/L) L)``; infinite for a perfectly stable cavity.
    """
    if not (wavelength > 0 and cavity_length > 0):
        raise DomainError("wavelength and cavity length must be positive")
    if not rel_length_stability >= 0:
        raise DomainError(f"relative length stability must be non-negative, got {rel_length_stability}")
    if rel_length_stability == 0:
        return math.inf
    return math.pi * wavelength / (2.0 * rel_length_stability * cavity_length)


# -- budgets ----------------------------------------------------------------


@dataclass(frozen=True)
class BudgetLine:
    name: str
    cbe: float
    margin: float | None = None  # fraction; None where the table has no margin column
    printed: float | None = None  # CBE + margin as printed
    optional: bool = False
    summary: bool = False  # a summary row with its own margin, excluded from "all"

    def __post_init__(self):
        if not self.cbe >= 0:
            raise DomainError(f"budget line {self.name!r}: CBE must be non-negative")
        if self.margin is not None and not self.margin >= 0:
            raise DomainError(f"budget line {self.name!r}: margin must be non-negative")


@dataclass(frozen=True)
class BudgetTotal:
    name: str
    components: tuple[str, ...]
    cbe: float | None = None  # declared CBE total
    printed: float | None = None  # declared CBE + margin total
    average_margin: float | None = None


@dataclass(frozen=True)
class BudgetTable:
    name: str
    unit: str
    lines: tuple[BudgetLine, ...] = ()
    totals: tuple[BudgetTotal, ...] = ()
    tolerance: float = BUDGET_TOLERANCE
    title: str = ""
    declared: dict = field(default_factory=dict)  # row -> value printed without derivation
    crossrefs: tuple = ()  # (row, value, "table/row/column")
    reference: tuple = ()  # (row, value, components) plain sums


@dataclass(frozen=True)
class BudgetCell:
    table: str
    row: str
    column: str  # "cbe+margin", "cbe", "crossref" or "sum"
    computed: float
    printed: float
    ok: bool

    @property
    def diff(self) -> float:
        return self.computed - self.printed


@dataclass(frozen=True)
class BudgetReport:
    cells: tuple[BudgetCell, ...]
    notes: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cells)

    def failures(self) -> list[BudgetCell]:
        return [c for c in self.cells if not c.ok]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "cells": [c.__dict__ | {"diff": c.diff} for c in self.cells],
            "notes": list(self.notes),
        }

    def to_text(self) -> str:
        lines = []
        for c in self.cells:
            mark = "ok  " if c.ok else "FAIL"
            lines.append(
                f"  {mark} {c.table} / {c.row} [{c.column}]: computed {c.computed:.2f}, printed {c.printed:.2f}"
                f" (diff {c.diff:+.2f})"
            )
        lines.extend(f"  note: {n}" for n in self.notes)
        lines.append(f"budget: {'PASS' if self.ok else 'FAIL'} ({len(self.failures())} of {len(self.cells)} cells off)")
        return "\n".join(lines)


def _resolve_components(spec, lines):
    if spec == "all":
        return tuple(l.name for l in lines if not l.summary)
    if spec == "non_optional":
        return tuple(l.name for l in lines if not (l.optional or l.summary))
    if spec == "optional":
        return tuple(l.name for l in lines if l.optional)
    return tuple(spec)


def budget_from_dict(raw: dict, tolerance: float = BUDGET_TOLERANCE) -> BudgetTable:
    name = raw["name"]
    lines = tuple(
        BudgetLine(
            l["name"],
            float(l["cbe"]),
            None if l.get("margin") is None else float(l["margin"]),
            None if l.get("printed") is None else float(l["printed"]),
            bool(l.get("optional", False)),
            bool(l.get("summary", False)),
        )
        for l in raw.get("lines", [])
    )
    totals = tuple(
        BudgetTotal(
            t["name"],
            _resolve_components(t.get("components", "all"), lines),
            t.get("cbe"),
            t.get("printed"),
            t.get("average_margin"),
        )
        for t in raw.get("totals", [])
    )
    return BudgetTable(
        name,
        raw.get("unit", ""),
        lines,
        totals,
        float(raw.get("tolerance", tolerance)),
        raw.get("title", ""),
        {d["name"]: float(d["value"]) for d in raw.get("declared", [])},
        tuple((c["name"], float(c["value"]), c["ref"]) for c in raw.get("crossrefs", [])),
        tuple((r["name"], float(r["value"]), tuple(r["components"])) for r in raw.get("reference", [])),
    )


def load_budgets(path: str | Path | None = None) -> list[BudgetTable]:
    raw, source = _read_json(path, "budgets.json")
    try:
        tol = float(raw.get("tolerance", BUDGET_TOLERANCE))
        return [budget_from_dict(t, tol) for t in raw["tables"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed budget file ({exc})", path=source) from exc


def _rows(table: BudgetTable) -> dict:
    """Printed values by row: {row: {"cbe": .., "printed": ..}}."""
    rows = {l.name: {"cbe": l.cbe, "printed": l.printed} for l in table.lines}
    for t in table.totals:
        rows[t.name] = {"cbe": t.cbe, "printed": t.printed}
    for name, value in table.declared.items():
        rows.setdefault(name, {})["declared"] = value
    return rows


def check_budget(table: BudgetTable) -> BudgetReport:
    """Recompute CBE + margin per line and every total from the printed rows it sums.

    Each printed cell is checked once: lines against ``CBE (1 + margin)``,
    totals against the sum of the printed values of their components, so
    an error in one line is not reported again in every total above it.
    """
    tol = table.tolerance
    cells, notes = [], []
    rows = _rows(table)

    def add(row, column, computed, printed):
        cells.append(BudgetCell(table.name, row, column, computed, printed, abs(computed - printed) <= tol))

    for line in table.lines:
        if line.margin is not None and line.printed is not None:
            add(line.name, "cbe+margin", line.cbe * (1.0 + line.margin), line.printed)
    for total in table.totals:
        missing = [c for c in total.components if c not in rows]
        if missing:
            raise ConfigError(f"total {total.name!r} refers to unknown rows {missing}", path=table.name)
        if total.cbe is not None:
            add(total.name, "cbe", sum(rows[c]["cbe"] or 0.0 for c in total.components), float(total.cbe))
        if total.printed is not None:
            add(total.name, "cbe+margin", sum(rows[c]["printed"] or 0.0 for c in total.components), float(total.printed))
        if total.average_margin is not None and total.cbe is not None and total.printed is not None:
            implied = total.printed / total.cbe - 1.0 if total.cbe else 0.0
            notes.append(
                f"{table.name} / {total.name}: stated average margin {total.average_margin:.0%}, "
                f"printed totals imply {implied:.1%}"
            )
    for row, value, parts in table.reference:
        add(row, "sum", sum(parts), value)
    for row in table.declared:
        if row not in {l.name for l in table.lines} | {t.name for t in table.totals}:
            notes.append(f"{table.name} / {row}: declared {table.declared[row]:g} {table.unit}, not derivable")
    return BudgetReport(tuple(cells), tuple(notes))


def check_budgets(tables: list[BudgetTable]) -> BudgetReport:
    """Check every table and resolve cross-table references (``table/row/column``)."""
    by_name = {t.name: t for t in tables}
    cells, notes = [], []
    for t in tables:
        rep = check_budget(t)
        cells.extend(rep.cells)
        notes.extend(rep.notes)
        for row, value, ref in t.crossrefs:
            try:
                other, other_row, column = ref.split("/")
                target = _rows(by_name[other])[other_row][column]
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"unresolvable reference {ref!r}", path=f"{t.name} / {row}") from exc
            cells.append(BudgetCell(t.name, row, "crossref", float(target), value, abs(target - value) <= t.tolerance))
    return BudgetReport(tuple(cells), tuple(notes))
