"""Command-line front end.

Every run writes ``metadata.json`` next to its outputs with the resolved
parameters, code version, seed, input file contents and output checksums.
Timestamps appear only there, so ``macroq rerun DIR`` reproduces every other
file byte for byte.

Exit codes: 0 success, 2 validation or usage failure (including failed
requirement or budget checks), 1 internal error.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import datetime
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from macroq import __version__
from macroq import constraints as con
from macroq import decoherence as dec
from macroq import figures as figs
from macroq import interferometry as itf
from macroq import kernels
from macroq import montecarlo as mc
from macroq import optomech as om
from macroq import svg
from macroq import units
from macroq import wavepacket as wp
from macroq.errors import ConfigError, MacroqError
from macroq.phys_core import CONST, default_state

EXIT_OK, EXIT_INTERNAL, EXIT_VALIDATION = 0, 1, 2
FORMATS = ("csv", "svg", "json")
METADATA = "metadata.json"


class CheckFailed(Exception):
    """Outputs were written but the checked items did not all pass."""


# -- output helpers ---------------------------------------------------------


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.12g}"


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)  # "inf" / "nan"
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


class Run:
    """Writes outputs of one command and its metadata."""

    def __init__(self, out: Path, command: str, argv: list[str], formats: tuple[str, ...]):
        self.out = out
        self.command = command
        self.argv = argv
        self.formats = formats
        self.params: dict = {}
        self.seed = None
        self.inputs: dict[str, str] = {}
        self.extra: dict = {}
        self.files: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def add_input(self, path) -> str:
        text = Path(path).read_text(encoding="utf-8")
        self.inputs[str(path)] = text
        return text

    def write(self, name: str, text: str):
        (self.out / name).write_text(text, encoding="utf-8", newline="")
        if name not in self.files:
            self.files.append(name)

    def core(self) -> dict:
        return {
            "macroq_version": __version__,
            "command": self.command,
            "argv": self.argv,
            "params": self.params,
            "seed": self.seed,
            "inputs": self.inputs,
            "extra": self.extra,
        }

    def config_hash(self) -> str:
        """Hash of everything that determines the outputs (argv excluded: flag spelling does not)."""
        core = {k: v for k, v in self.core().items() if k != "argv"}
        return hashlib.sha256(json_text(core).encode()).hexdigest()

    def finish(self):
        meta = self.core()
        meta["config_hash"] = self.config_hash()
        meta["kernel_backend"] = kernels.BACKEND
        meta["numpy_version"] = np.__version__
        meta["outputs"] = {
            f: hashlib.sha256((self.out / f).read_bytes()).hexdigest() for f in sorted(self.files)
        }
        meta["created_utc"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        (self.out / METADATA).write_text(json_text(meta), encoding="utf-8")


def _formats(args, default):
    if args.format is None:
        return default
    chosen = tuple(f.strip() for f in args.format.split(",") if f.strip())
    bad = [f for f in chosen if f not in FORMATS]
    if bad or not chosen:
        raise ConfigError(f"--format takes a comma list of {', '.join(FORMATS)}; got {args.format!r}")
    return chosen


def _overrides(args, run: Run) -> dict:
    out = {}
    if args.config:
        try:
            raw = json.loads(run.add_input(args.config))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON ({exc})", path=args.config) from exc
        raw = raw.get("set", raw) if isinstance(raw, dict) else raw
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object of parameter overrides", path=args.config)
        out.update(raw)
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def _series(data: figs.FigureData):
    return [(label, data.rows[:, i], data.rows[:, j]) for label, i, j in data.series]


# -- commands -----------------------------------------------------------------


def cmd_figure(args, run: Run):
    curves = [dec.load_model_curve(p) for p in args.overlay or []]
    for p in args.overlay or []:
        run.add_input(p)
    if curves and args.figure_id not in (2, 12):
        raise ConfigError("--overlay applies to figures 2 and 12 only")
    data, params = figs.run_figure(args.figure_id, _overrides(args, run), curves)
    run.params = params.keyed()
    run.extra = {"figure": data.figure_id, "notes": list(data.notes)}
    stem = f"figure_{data.figure_id}"
    if "csv" in run.formats:
        run.write(f"{stem}.csv", csv_text(data.columns, data.rows))
    if "json" in run.formats:
        run.write(
            f"{stem}.json",
            json_text({"figure": data.figure_id, "title": data.title, "columns": data.columns,
                       "rows": data.rows, "notes": data.notes}),
        )
    if "svg" in run.formats:
        run.write(
            f"{stem}.svg",
            svg.line_chart(_series(data), data.title, data.xlabel, data.ylabel, data.logx, data.logy),
        )
    print(f"figure {data.figure_id}: {data.rows.shape[0]} rows -> {run.out}")


def _sweep_point(job):
    quantity, variable, x, base = job
    return figs.sweep_value(quantity, variable, x, figs.Params(base))


def _existing_rows(path: Path, header: str, expected: list[str]) -> list[str]:
    """Complete rows already on disk that match the grid prefix, in order."""
    if not path.exists():
        return []
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if not lines or lines[0] != header:
        return []
    body = lines[1:-1]  # the last element is "" or a partially written row
    kept = []
    for line, x in zip(body, expected):
        if line.split(",", 1)[0] != x:
            break
        kept.append(line)
    return kept


def cmd_sweep(args, run: Run):
    grid = figs.parse_range(args.range)
    base = figs.Params.build(None, _overrides(args, run))
    columns = figs.sweep_columns(args.quantity)
    varname, token = figs.parse_name(args.variable)
    figs.coerce(args.variable, 1.0)  # validate numeric variable
    run.params = base.keyed()
    run.extra = {"quantity": args.quantity, "variable": args.variable, "grid": [fmt(x) for x in grid]}
    header = ",".join([args.variable, *columns])
    path = run.out / "sweep.csv"
    old_meta = run.out / METADATA
    resumable = False
    if old_meta.exists():
        try:
            resumable = json.loads(old_meta.read_text(encoding="utf-8")).get("config_hash") == run.config_hash()
        except json.JSONDecodeError:
            resumable = False
    done = _existing_rows(path, header, run.extra["grid"]) if resumable else []
    # store metadata before computing so an interrupted run can be resumed
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join([header, *done]) + "\n")
    run.files.append("sweep.csv")
    (run.out / METADATA).write_text(json_text({**run.core(), "config_hash": run.config_hash()}), encoding="utf-8")
    todo = [(args.quantity, args.variable, float(x), base.values) for x in grid[len(done):]]
    with path.open("a", encoding="utf-8", newline="") as fh:
        if args.workers > 1 and len(todo) > 1:
            with concurrent.futures.ProcessPoolExecutor(args.workers) as pool:
                results = pool.map(_sweep_point, todo)
                for (_, _, x, _), vals in zip(todo, results):
                    fh.write(",".join(fmt(v) for v in (x, *vals)) + "\n")
                    fh.flush()
        else:
            for job in todo:
                fh.write(",".join(fmt(v) for v in (job[2], *_sweep_point(job))) + "\n")
                fh.flush()
    if "svg" in run.formats and grid.size:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        series = [(c, data[:, 0], data[:, i + 1]) for i, c in enumerate(columns)]
        logx = grid.size > 2 and grid[0] > 0 and np.allclose(grid[1] / grid[0], grid[-1] / grid[-2], rtol=1e-9) \
            and not np.allclose(np.diff(grid), grid[1] - grid[0], rtol=1e-9)
        run.write("sweep.svg", svg.line_chart(series, f"{args.quantity} vs {args.variable}", args.variable,
                                              args.quantity, bool(logx), False))
    print(f"sweep {args.quantity}: {grid.size} points ({len(done)} resumed) -> {path}")


# experiment plans ---------------------------------------------------------


def _quantity(raw: dict, key: str, where: str, unit: str, default=None, required=False):
    """Read ``{"value", "unit"}`` (or a bare number for dimensionless) and return SI/canonical."""
    path = f"{where}.{key}"
    if key not in raw:
        if required:
            raise ConfigError("missing required key", path=path)
        return default
    v = raw[key]
    if isinstance(v, dict):
        if set(v) - {"value", "unit"} or "value" not in v or "unit" not in v:
            raise ConfigError('expected {"value": number, "unit": string}', path=path)
        try:
            return units.convert(float(v["value"]), v["unit"], unit)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), path=path) from exc
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number or a unit object, got {v!r}", path=path)
    if units.dimension(unit) != units.dimension("1"):
        raise ConfigError(f"units are mandatory here (e.g. {{\"value\": {v}, \"unit\": \"{unit}\"}})", path=path)
    return float(v)


def _section(raw, key, where):
    v = raw.get(key, {})
    if not isinstance(v, dict):
        raise ConfigError("expected an object", path=f"{where}.{key}")
    return v


PLAN_KEYS = {"kind", "seed", "mass", "grating", "timing", "state", "Lambda_true", "mode", "N",
             "sigma_detect", "resolution", "confidence", "repetitions", "t", "noise_model"}


def parse_plan(raw, seed_override=None) -> tuple[str, dict]:
    """Validate a plan object; returns (kind, resolved dict in SI units)."""
    if not isinstance(raw, dict):
        raise ConfigError("plan must be a JSON object", path="plan")
    unknown = sorted(set(raw) - PLAN_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys {unknown}", path="plan")
    kind = raw.get("kind", "interference")
    if kind not in ("interference", "expansion"):
        raise ConfigError("kind must be 'interference' or 'expansion'", path="plan.kind")
    seed = raw.get("seed", seed_override) if seed_override is None else seed_override
    if seed is None:
        raise ConfigError("a seed is mandatory (set it in the plan or pass --seed)", path="plan.seed")
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an integer in [0, 2^64)", path="plan.seed")
    mass = _quantity(raw, "mass", "plan", "kg", required=True)
    if not mass > 0:
        raise ConfigError("must be positive", path="plan.mass")
    state = _section(raw, "state", "plan")
    omega = _quantity(state, "omega", "plan.state", "rad/s", default=1e5)
    N = raw.get("N", 24_000)
    if isinstance(N, bool) or not isinstance(N, int) or N < 2:
        raise ConfigError("N must be an integer >= 2", path="plan.N")
    out = {"seed": seed, "mass_kg": mass, "omega_rad_s": omega, "N": N,
           "Lambda_true_per_m2_s": _quantity(raw, "Lambda_true", "plan", "m^-2 s^-1", default=0.0)}
    if kind == "expansion":
        out["t_s"] = _quantity(raw, "t", "plan", "s", default=wp.T_EXPAND_DEFAULT)
        out["sigma_detect_m"] = _quantity(raw, "sigma_detect", "plan", "m", default=wp.SIGMA_DETECT_DEFAULT)
        out["noise_model"] = raw.get("noise_model", "samples")
        if out["noise_model"] not in wp.NOISE_MODELS:
            raise ConfigError(f"must be one of {wp.NOISE_MODELS}", path="plan.noise_model")
        reps = raw.get("repetitions", 1)
        if isinstance(reps, bool) or not isinstance(reps, int) or reps < 1:
            raise ConfigError("must be a positive integer", path="plan.repetitions")
        out["repetitions"] = reps
        return kind, out
    g = _section(raw, "grating", "plan")
    t = _section(raw, "timing", "plan")
    out.update(
        wavelength_g_m=_quantity(g, "wavelength", "plan.grating", "m", default=200e-9),
        waist_m=_quantity(g, "waist", "plan.grating", "m", default=1e-3),
        phi0=_quantity(g, "phi0", "plan.grating", "1", default=4.2),
        t1_s=_quantity(t, "t1", "plan.timing", "s", required=True),
        t2_s=_quantity(t, "t2", "plan.timing", "s", required=True),
        sigma_detect_m=_quantity(raw, "sigma_detect", "plan", "m", default=mc.SIGMA_DETECT_DEFAULT),
        resolution_m=_quantity(raw, "resolution", "plan", "m", default=0.0),
        confidence=_quantity(raw, "confidence", "plan", "1", default=0.99),
        mode=raw.get("mode", "quantum"),
    )
    if out["mode"] not in itf.MODES:
        raise ConfigError(f"must be one of {itf.MODES}", path="plan.mode")
    return kind, out


def _interference(plan: dict, run: Run):
    try:
        grating = itf.GratingConfig(plan["wavelength_g_m"], plan["waist_m"], plan["phi0"])
    except MacroqError as exc:
        raise ConfigError(str(exc), path="plan.grating") from exc
    try:
        timing = itf.TimingConfig(plan["t1_s"], plan["t2_s"])
    except MacroqError as exc:
        raise ConfigError(str(exc), path="plan.timing") from exc
    ep = mc.ExperimentPlan(
        plan["mass_kg"], grating, timing, default_state(plan["mass_kg"], plan["omega_rad_s"]), plan["seed"],
        plan["Lambda_true_per_m2_s"], plan["mode"], plan["N"], plan["sigma_detect_m"], plan["resolution_m"],
    )
    curve = mc.visibility_curve(ep)
    res = mc.reconstruct(ep, curve, plan["confidence"])
    blur = math.hypot(ep.resolution, ep.sigma_detect)
    v_analytic = itf.visibility(ep.mass, grating, timing, ep.state, ep.Lambda_true, ep.mode, blur)
    iv = res.lambda_interval
    report = {
        "kind": "interference",
        "plan": plan,
        "seed": res.seed,
        "generator": res.generator,
        "period_m": res.period,
        "visibility": {
            "estimate": res.visibility,
            "bootstrap_stderr": res.visibility_stderr,
            "analytic": v_analytic,
            "z_score": (res.visibility - v_analytic) / res.visibility_stderr,
        },
        "Lambda_per_m2_s": {
            "injected": ep.Lambda_true,
            "lower": iv.lower,
            "point": iv.point,
            "upper": iv.upper,
            "flag": iv.flag,
            "confidence": plan["confidence"],
        },
        "histogram": "histogram.csv",
    }
    run.write("report.json", json_text(report))
    rows = zip(res.bin_edges[:-1] * 1e9, res.bin_edges[1:] * 1e9, res.counts)
    run.write("histogram.csv", csv_text(("bin_lo_nm", "bin_hi_nm", "counts"), rows))
    if "svg" in run.formats:
        centers = 0.5 * (res.bin_edges[1:] + res.bin_edges[:-1]) * 1e9
        run.write("histogram.svg", svg.line_chart([("counts", centers, res.counts)], "Detected positions",
                                                  "x (nm)", "counts"))
    print(f"V = {res.visibility:.4f} +/- {res.visibility_stderr:.4f} (analytic {v_analytic:.4f}); "
          f"Lambda in [{iv.lower:.3g}, {iv.upper:.3g}] m^-2 s^-1")


def _expansion(plan: dict, run: Run):
    m, t = plan["mass_kg"], plan["t_s"]
    state = default_state(m, plan["omega_rad_s"])
    cfg = wp.ExpansionConfig(state, m, t, plan["Lambda_true_per_m2_s"])
    mplan = wp.WidthMeasurementPlan(plan["N"], plan["sigma_detect_m"])
    per_lambda = wp.decoherence_excess(wp.ExpansionConfig(state, m, t, 1.0))
    rng = mc.streams(plan["seed"])[0]
    rows = []
    for i in range(plan["repetitions"]):
        r = wp.synthetic_expansion(cfg, mplan, rng, plan["noise_model"])
        rows.append((i, r.Lambda_injected, r.excess_squared / per_lambda, r.significance, r.significance_full))
    report = {
        "kind": "expansion",
        "plan": plan,
        "seed": plan["seed"],
        "generator": mc.GENERATOR_ID,
        "Lambda_min_per_m2_s": wp.lambda_min(m, mplan, t, state),
        "width_error_m": wp.width_error(mplan),
        "w_s_m": math.sqrt(wp.ws_squared(cfg)),
        "mean_significance": float(np.mean([r[3] for r in rows])),
        "runs": "expansion.csv",
    }
    run.write("report.json", json_text(report))
    run.write("expansion.csv", csv_text(
        ("repetition", "Lambda_injected_per_m2_s", "Lambda_recovered_per_m2_s", "significance",
         "significance_full"), rows))
    print(f"expansion: {len(rows)} runs, mean significance {report['mean_significance']:.3g}")


def cmd_experiment(args, run: Run, plan_raw=None):
    if plan_raw is None:
        try:
            plan_raw = json.loads(run.add_input(args.plan))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON ({exc})", path=args.plan) from exc
    kind, plan = parse_plan(plan_raw, args.seed)
    run.params = plan
    run.seed = plan["seed"]
    run.extra = {"generator": mc.GENERATOR_ID, "kind": kind}
    (_expansion if kind == "expansion" else _interference)(plan, run)


def cmd_check_requirements(args, run: Run):
    if args.requirements:
        run.add_input(args.requirements)
    if args.mission:
        run.add_input(args.mission)
    report = con.check_requirements(con.load_mission(args.mission), con.load_requirements(args.requirements))
    run.params = {"requirements": args.requirements or "built-in", "mission": args.mission or "built-in"}
    text = report.to_text() + "\n"
    run.write("requirements.txt", text)
    if "json" in run.formats:
        run.write("requirements.json", json_text(report.to_dict()))
    if "csv" in run.formats:
        rows = [(i.name, i.tier, i.status, "" if i.value is None else fmt(i.value), i.op,
                 "/".join(map(fmt, i.threshold)) if isinstance(i.threshold, tuple) else fmt(i.threshold),
                 i.unit, "" if i.margin is None else fmt(i.margin)) for i in report.items]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("name", "tier", "status", "value", "op", "threshold", "unit", "margin"))
        w.writerows(rows)
        run.write("requirements.csv", buf.getvalue())
    print(text, end="")
    if not report.passed():
        raise CheckFailed("requirements not all satisfied")


def cmd_check_budget(args, run: Run):
    if args.budgets:
        run.add_input(args.budgets)
    tables = con.load_budgets(args.budgets)
    if args.table:
        names = {t.name for t in tables}
        missing = sorted(set(args.table) - names)
        if missing:
            raise ConfigError(f"unknown tables {missing}; known: {sorted(names)}")
        tables_checked = [t for t in tables if t.name in args.table]
    else:
        tables_checked = tables
    report = con.check_budgets(tables)  # all tables, so cross-table references resolve
    if args.table:
        report = con.BudgetReport(
            tuple(c for c in report.cells if c.table in args.table),
            tuple(n for n in report.notes if n.split(" / ")[0] in args.table),
        )
    run.params = {"budgets": args.budgets or "built-in", "tables": [t.name for t in tables_checked]}
    text = report.to_text() + "\n"
    run.write("budget.txt", text)
    if "json" in run.formats:
        run.write("budget.json", json_text(report.to_dict()))
    if "csv" in run.formats:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("table", "row", "column", "computed", "printed", "diff", "ok"))
        for c in report.cells:
            w.writerow((c.table, c.row, c.column, fmt(c.computed), fmt(c.printed), fmt(c.diff), int(c.ok)))
        run.write("budget.csv", buf.getvalue())
    print(text, end="")
    if not report.ok:
        raise CheckFailed(f"{len(report.failures())} budget cells differ from their recomputed values")


def _spectrum_outputs(run, stem, p: om.OptomechParams, lambdas, span, n_points, title):
    omega = om.spectrum_grid(p, span, n_points)
    spectra = [om.density_noise_spectrum(omega, p, om.csl_Y(lam, p.mass, p.omega_m)) for lam in lambdas]
    columns = ["omega_rad_s", *[f"S_lambda_{fmt(lam)}_m2_s" for lam in lambdas]]
    run.write(f"{stem}.csv", csv_text(columns, np.column_stack([omega, *spectra])))
    report = om.line_broadening_report(p, lambdas, omega)
    base = report[0]
    rows = [(r.lambda_rate, r.Y, r.peak, r.fwhm, r.area, r.equivalent_width,
             r.equivalent_width / base.equivalent_width - 1.0) for r in report]
    run.write(f"{stem}_broadening.csv", csv_text(
        ("lambda_per_m_s", "Y_rad_s", "peak_m2_s", "fwhm_rad_s", "area_m2", "equivalent_width_rad_s",
         "equivalent_width_rel_change"), rows))
    if "svg" in run.formats:
        series = [(f"lambda = {fmt(lam)}", omega / (2 * math.pi), s) for lam, s in zip(lambdas, spectra)]
        run.write(f"{stem}.svg", svg.line_chart(series, title, "frequency (Hz)", "S (m^2 s)", logy=True))
    return [dict(r.__dict__, equivalent_width_rel_change=row[-1]) for r, row in zip(report, rows)]


def cmd_noise_spectrum(args, run: Run):
    if args.preset.endswith(".json"):
        run.add_input(args.preset)
    preset = om.load_preset(args.preset)
    if args.lambda_values:
        try:
            lambdas = [float(v) for v in args.lambda_values.split(",")]
        except ValueError:
            raise ConfigError(f"--lambda expects comma-separated numbers, got {args.lambda_values!r}") from None
    else:
        lambdas = [0.0, preset.lambda_rate]
    span = args.span_gamma if args.span_gamma is not None else preset.span_gamma
    n_points = args.points if args.points is not None else preset.n_points
    run.params = {"preset": om.preset_dict(preset), "lambda_per_m_s": lambdas, "span_gamma": span,
                  "n_points": n_points}
    p = preset.params
    out = {"preset": preset.name, "authoritative": preset.authoritative, "note": preset.note,
           "main": _spectrum_outputs(run, "spectrum", p, lambdas, span, n_points,
                                     f"Density noise spectrum, m = {p.mass:g} kg")}
    if preset.inset_mass and not args.no_inset:
        q = om.OptomechParams(**{**p.__dict__, "mass": float(preset.inset_mass)})
        out["inset"] = _spectrum_outputs(run, "spectrum_inset", q, lambdas, span, n_points,
                                         f"Density noise spectrum, m = {q.mass:g} kg")
    run.write("broadening.json", json_text(out))
    for r in out["main"]:
        print(f"lambda {r['lambda_rate']:g}: FWHM {r['fwhm']:.6g} rad/s, "
              f"equivalent width change {r['equivalent_width_rel_change']:+.3e}")


COMMANDS = {
    "figure": (cmd_figure, ("csv",)),
    "sweep": (cmd_sweep, ("csv",)),
    "experiment": (cmd_experiment, ("csv", "json")),
    "check-requirements": (cmd_check_requirements, ("json",)),
    "check-budget": (cmd_check_budget, ("json",)),
    "noise-spectrum": (cmd_noise_spectrum, ("csv", "json")),
}


# -- parser -----------------------------------------------------------------------


def _shared(parser, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g = parser.add_argument_group("global options")
    g.add_argument("--out", default=d("macroq_out"), help="output directory (default: macroq_out)")
    g.add_argument("--format", default=d(None), help="comma list of csv, svg, json")
    g.add_argument("--seed", type=int, default=d(None), help="seed (experiment plans; overrides plan.seed)")
    g.add_argument("--config", default=d(None), help="JSON object of parameter overrides")
    g.add_argument("--set", action="append", default=d(None), metavar="KEY=VALUE",
                   help="parameter override, e.g. mass_amu=1e10 or t1_s=50 (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="macroq", description="Matter-wave interference and collapse-model tools.")
    ap.add_argument("--version", action="version", version=f"macroq {__version__}")
    _shared(ap, False)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        _shared(p, True)
        return p

    p = add("figure", "write the data behind a figure")
    p.add_argument("figure_id", type=int, help=f"one of {', '.join(map(str, figs.SUPPORTED_FIGURES))}")
    p.add_argument("--overlay", action="append", metavar="CSV", help="model curve (mass_amu,value,unit) for 2/12")

    p = add("sweep", "evaluate a quantity over a parameter grid")
    p.add_argument("quantity", help=f"one of {', '.join(sorted(figs.SWEEP_QUANTITIES))}")
    p.add_argument("variable", help="parameter with unit suffix, e.g. phi0, mass_amu, d... see --set")
    p.add_argument("range", help="start:stop:num[:lin|log]")
    p.add_argument("--workers", type=int, default=1, help="worker processes for grid points")

    p = add("experiment", "run a synthetic experiment from a JSON plan")
    p.add_argument("plan", help="plan file")

    p = add("check-requirements", "check a mission configuration against requirements")
    p.add_argument("--requirements", help="requirements JSON (default: built-in)")
    p.add_argument("--mission", help="mission JSON (default: built-in baseline)")

    p = add("check-budget", "recompute budget tables")
    p.add_argument("--budgets", help="budget JSON (default: built-in)")
    p.add_argument("--table", action="append", help="restrict to this table (repeatable)")

    p = add("noise-spectrum", "optomechanical density noise spectra with CSL broadening")
    p.add_argument("--preset", default="fig1_preset", help="preset name or JSON file")
    p.add_argument("--lambda", dest="lambda_values", help="comma list of CSL coefficients (m^-1 s^-1)")
    p.add_argument("--span-gamma", type=float, help="grid half-width in units of gamma_m")
    p.add_argument("--points", type=int, help="grid points")
    p.add_argument("--no-inset", action="store_true", help="skip the inset-mass spectrum")

    p = add("rerun", "repeat a run from its metadata file and verify the outputs")
    p.add_argument("metadata", help=f"{METADATA} or the directory containing it")
    return ap


def _strip_out(argv):
    """argv without --out (the output location is not part of a run's identity)."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        out.append(a)
    return out


def _dispatch(argv, out_override=None, plan_raw=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "rerun":
        return _rerun(args)
    func, default_formats = COMMANDS[args.command]
    out = Path(out_override or args.out)
    run = Run(out, args.command, _strip_out(argv), _formats(args, default_formats))
    try:
        if plan_raw is not None:
            func(args, run, plan_raw)
        else:
            func(args, run)
    except CheckFailed as exc:
        run.finish()
        print(f"macroq: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    run.finish()
    return EXIT_OK


def _rerun(args) -> int:
    path = Path(args.metadata)
    if path.is_dir():
        path = path / METADATA
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
        argv, inputs, recorded = list(meta["argv"]), meta.get("inputs", {}), meta["outputs"]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ConfigError(f"not a readable metadata file ({exc})", path=str(path)) from exc
    out = Path(args.out) if args.out != "macroq_out" else path.parent
    with tempfile.TemporaryDirectory() as tmp:
        mapping = {}
        for i, (orig, text) in enumerate(sorted(inputs.items())):
            target = Path(tmp) / f"{i}_{Path(orig).name}"
            target.write_text(text, encoding="utf-8")
            mapping[orig] = str(target)

        def swap(tok):
            if tok in mapping:
                return mapping[tok]
            key, sep, val = tok.partition("=")
            return f"{key}={mapping[val]}" if sep and val in mapping else tok

        new_argv = [swap(a) for a in argv]
        if meta["command"] == "sweep" and out.resolve() == path.parent.resolve():
            (out / "sweep.csv").unlink(missing_ok=True)  # recompute instead of resuming
        code = _dispatch(new_argv + ["--out", str(out)])
    # the rerun records the temp paths; restore the original argv and inputs
    new_meta_path = out / METADATA
    new_meta = json.loads(new_meta_path.read_text(encoding="utf-8"))
    new_meta["argv"], new_meta["inputs"] = argv, inputs
    new_meta["config_hash"] = meta.get("config_hash")
    new_meta_path.write_text(json_text(new_meta), encoding="utf-8")
    mismatched = sorted(f for f, h in recorded.items() if new_meta["outputs"].get(f) != h)
    if mismatched:
        print(f"macroq: rerun differs in {', '.join(mismatched)}", file=sys.stderr)
        return EXIT_INTERNAL
    print(f"rerun reproduced {len(recorded)} output file(s) in {out}")
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        return _dispatch(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0) if isinstance(exc.code, int) else EXIT_VALIDATION
    except (MacroqError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"macroq: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        print(f"macroq: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        if os.environ.get("MACROQ_DEBUG"):
            raise
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
