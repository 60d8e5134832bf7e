"""Figure data and sweep quantities on top of the physics modules.

Parameters are addressed by a base name plus a unit suffix, e.g.
``mass_amu``, ``t1_s`` or ``Lambda_per_m2_s``. Overrides may use any unit of
the same dimension (``mass_kg=1.66e-17``); a suffix of the wrong dimension
raises :class:`~macroq.errors.UnitMismatchError`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from macroq import decoherence as dec
from macroq import interferometry as itf
from macroq import units
from macroq import wavepacket as wp
from macroq.errors import ConfigError, TruncationError, UnitMismatchError
from macroq.phys_core import CONST, Particle, default_state, get_material

# unit tokens usable in parameter names -> unit registry strings
_TOKENS = {
    "per_m2_s": "m^-2 s^-1",
    "per_cm3": "cm^-3",
    "per_m3": "m^-3",
    "km_s": "km/s",
    "m_s": "m/s",
    "rad_s": "rad/s",
    "nN_rtHz": "nN/sqrt(Hz)",
    "N_rtHz": "N/sqrt(Hz)",
}

# base name -> (canonical unit token, default); "" marks dimensionless, None a string
PARAMS = {
    "mass": ("amu", 1e9),
    "phi0": ("", 4.2),
    "wavelength": ("nm", 200.0),
    "waist": ("mm", 1.0),
    "t1": ("s", 20.0),
    "T": ("s", 100.0),
    "Lambda": ("per_m2_s", 0.0),
    "resolution": ("nm", 0.0),
    "omega": ("rad_s", 1e5),
    "material": (None, "fused_silica"),
    "mode": (None, "quantum"),
    "lambda_csl": ("Hz", 2.2e-17),
    "a_csl": ("nm", 100.0),
    "N": ("", 24000.0),
    "sigma": ("nm", 100.0),
    "t": ("s", 100.0),
    "r_c": ("nm", 100.0),
    "radius": ("nm", 100.0),
    "velocity": ("km_s", 500.0),
    "T_run": ("s", 100.0),
    "period": ("nm", 100.0),
    "force_noise": ("nN_rtHz", 100.0),
    "spacecraft_mass": ("kg", 250.0),
    "points": ("", 201.0),
    "mass_lo": ("amu", 1e8),
    "mass_hi": ("amu", 1e11),
    "phi0_hi": ("", 10.0),
    "Lambda_lo": ("per_m2_s", 1e8),
    "Lambda_hi": ("per_m2_s", 1e15),
    "d_lo": ("nm", 50.0),
    "d_hi": ("nm", 500.0),
    "v_lo": ("km_s", 1.0),
    "v_hi": ("km_s", 1000.0),
    "x_periods": ("", 6.0),
}


def unit_of(token: str) -> str:
    return _TOKENS.get(token, token) if token else "1"


def param_key(base: str) -> str:
    token = PARAMS[base][0]
    return f"{base}_{token}" if token else base


def parse_name(name: str) -> tuple[str, str]:
    """Split ``mass_kg`` into (``mass``, ``kg``); dimension must match the parameter."""
    if name in PARAMS:
        return name, PARAMS[name][0] or ""
    for base in sorted(PARAMS, key=len, reverse=True):
        if name.startswith(base + "_"):
            token = name[len(base) + 1 :]
            canonical = PARAMS[base][0]
            if canonical is None:
                break
            unit = unit_of(token)
            if units.dimension(unit) != units.dimension(unit_of(canonical)):
                raise UnitMismatchError(
                    f"{name!r}: unit {unit!r} does not match {base!r} ({units.dimension(unit_of(canonical))})"
                )
            return base, token
    raise ConfigError(f"unknown parameter {name!r}; known: {sorted(param_key(b) for b in PARAMS)}")


def coerce(name: str, raw) -> tuple[str, object]:
    """Turn an override ``name=raw`` into (base, value in the canonical unit)."""
    base, token = parse_name(name)
    canonical, default = PARAMS[base]
    if canonical is None:
        return base, str(raw)
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected a number, got {raw!r}") from None
    return base, units.convert(value, unit_of(token), unit_of(canonical)) if token != canonical else value


@dataclass
class Params:
    """Resolved parameters in canonical units (see :data:`PARAMS`)."""

    values: dict = field(default_factory=dict)

    @classmethod
    def build(cls, defaults: dict | None = None, overrides: dict | None = None) -> "Params":
        values = {b: d for b, (_, d) in PARAMS.items()}
        for src in (defaults or {}), (overrides or {}):
            for k, v in src.items():
                base, val = coerce(k, v)
                values[base] = val
        return cls(values)

    def __getitem__(self, base):
        return self.values[base]

    def si(self, base) -> float:
        token = PARAMS[base][0]
        return units.to_si(float(self.values[base]), unit_of(token))

    def keyed(self) -> dict:
        """Canonical-key view for metadata, e.g. ``{"mass_amu": 1e9}``."""
        return {param_key(b): self.values[b] for b in sorted(self.values)}

    # physics objects
    def grating(self) -> itf.GratingConfig:
        return itf.GratingConfig(self.si("wavelength"), self.si("waist"), float(self["phi0"]))

    def timing(self) -> itf.TimingConfig:
        T, t1 = self.si("T"), self.si("t1")
        return itf.TimingConfig(t1, T - t1)

    def state(self, mass=None):
        return default_state(mass or self.si("mass"), self.si("omega"))

    def plan(self) -> wp.WidthMeasurementPlan:
        return wp.WidthMeasurementPlan(int(self["N"]), self.si("sigma"))


@dataclass(frozen=True, eq=False)
class FigureData:
    figure_id: int
    title: str
    columns: tuple[str, ...]
    rows: np.ndarray  # shape (n, len(columns))
    xlabel: str
    ylabel: str
    series: tuple[tuple[str, int, int], ...]  # (label, x column, y column)
    logx: bool = False
    logy: bool = False
    notes: tuple[str, ...] = ()


def _n(p):
    return max(int(p["points"]), 2)


def _visibilities(p, phis, mass, timing, state):
    out = np.empty((phis.size, 2))
    res = p.si("resolution")
    for i, phi in enumerate(phis):
        g = itf.GratingConfig(p.si("wavelength"), p.si("waist"), float(phi))
        for j, mode in enumerate(itf.MODES):
            out[i, j] = itf.visibility(mass, g, timing, state, p.si("Lambda"), mode, res)
    return out


def fig_lambda_min(p: Params) -> FigureData:
    masses = np.geomspace(p["mass_lo"], p["mass_hi"], _n(p))
    plan, t = p.plan(), p.si("t")
    material = get_material(p["material"])
    csl = dec.CslParams(p.si("lambda_csl"), p.si("a_csl"))
    r_c = p.si("r_c")
    rows = []
    for m_amu in masses:
        m = m_amu * CONST.amu
        lmin = wp.lambda_min(m, plan, t, p.state(m))
        lcsl = dec.csl_Lambda(csl, Particle.from_mass(m, material))
        rows.append((m_amu, lmin, wp.gamma_min(lmin, r_c), lcsl, wp.gamma_min(lcsl, r_c)))
    return FigureData(
        2,
        "Minimum detectable decoherence vs CSL",
        ("mass_amu", "Lambda_min_per_m2_s", "Gamma_min_Hz", "Lambda_csl_per_m2_s", "Gamma_csl_Hz"),
        np.array(rows),
        "mass (amu)",
        "decoherence rate (Hz)",
        (("Gamma_min", 0, 2), ("CSL", 0, 4)),
        True,
        True,
    )


def fig_lambda_csl_min(p: Params) -> FigureData:
    masses = np.geomspace(p["mass_lo"], p["mass_hi"], _n(p))
    plan, t, a = p.plan(), p.si("t"), p.si("a_csl")
    silica, hafnia = get_material("fused_silica"), get_material("hafnia")
    rows = []
    for m_amu in masses:
        m = m_amu * CONST.amu
        lmin = wp.lambda_min(m, plan, t, p.state(m))
        rows.append(
            (
                m_amu,
                dec.csl_lambda_min(lmin, Particle.from_mass(m, silica), a),
                dec.csl_lambda_min(lmin, Particle.from_mass(m, hafnia), a),
            )
        )
    return FigureData(
        3,
        "Minimum CSL rate",
        ("mass_amu", "lambda_min_fused_silica_Hz", "lambda_min_hafnia_Hz"),
        np.array(rows),
        "mass (amu)",
        "lambda_min (Hz)",
        (("fused silica", 0, 1), ("hafnia", 0, 2)),
        True,
        True,
    )


def _phi_sweep(p: Params):
    phis = np.linspace(0.0, float(p["phi0_hi"]), _n(p))
    m = p.si("mass")
    return phis, _visibilities(p, phis, m, p.timing(), p.state())


def fig_visibility_phi0(p: Params, figure_id: int = 5) -> FigureData:
    phis, v = _phi_sweep(p)
    return FigureData(
        figure_id,
        f"Quantum vs classical visibility, m = {p['mass']:.3g} amu",
        ("phi0", "visibility_quantum", "visibility_classical"),
        np.column_stack([phis, v]),
        "phi0 (rad)",
        "visibility",
        (("quantum", 0, 1), ("classical", 0, 2)),
    )


def fig_visibility_lambda(p: Params) -> FigureData:
    lams = np.geomspace(p["Lambda_lo"], p["Lambda_hi"], _n(p))
    m, g, timing, state, res = p.si("mass"), p.grating(), p.timing(), p.state(), p.si("resolution")
    v = np.array([itf.visibility(m, g, timing, state, L, "quantum", res) for L in lams])
    return FigureData(
        6,
        "Visibility reduction by decoherence",
        ("Lambda_per_m2_s", "visibility_quantum"),
        np.column_stack([lams, v]),
        "Lambda (m^-2 s^-1)",
        "visibility",
        (("quantum", 0, 1),),
        True,
    )


def _patterns(p: Params, figure_id: int, phi0: float, notes=()) -> FigureData:
    m, timing, state = p.si("mass"), p.timing(), p.state()
    g = itf.GratingConfig(p.si("wavelength"), p.si("waist"), phi0)
    period = itf.talbot_params(m, g, timing).pattern_period
    half = 0.5 * float(p["x_periods"]) * period
    window = (-half, half, max(_n(p), 3))
    cols = []
    for mode in itf.MODES:
        try:
            pat = itf.pattern(m, g, timing, state, p.si("Lambda"), mode, window, resolution=p.si("resolution"))
        except TruncationError as exc:
            raise ConfigError(f"{mode} pattern does not converge; set resolution_nm > 0 ({exc})") from exc
        cols.append(pat.density)
    rows = np.column_stack([pat.grid * 1e9, *cols])
    return FigureData(
        figure_id,
        f"Interference patterns, m = {p['mass']:.3g} amu, phi0 = {phi0:.3g}",
        ("x_nm", "density_quantum_per_m", "density_classical_per_m"),
        rows,
        "x (nm)",
        "P(x) (1/m)",
        (("quantum", 0, 1), ("classical", 0, 2)),
        notes=tuple(notes),
    )


def fig_critical_mass(p: Params) -> FigureData:
    d = np.linspace(p["d_lo"], p["d_hi"], _n(p))
    T = p.si("T")
    mc = np.array([itf.critical_mass(T, di * 1e-9) / CONST.amu for di in d])
    return FigureData(
        8,
        f"Critical mass, T = {T:g} s",
        ("d_nm", "m_crit_amu"),
        np.column_stack([d, mc]),
        "grating period d (nm)",
        "m_crit (amu)",
        (("m_crit", 0, 1),),
        logy=True,
    )


def fig_collapse_lambda(p: Params, curves=()) -> FigureData:
    masses = np.geomspace(p["mass_lo"], p["mass_hi"], _n(p))
    material = get_material(p["material"])
    csl = dec.CslParams(p.si("lambda_csl"), p.si("a_csl"))
    cols = [masses, np.array([dec.csl_Lambda(csl, Particle.from_mass(m * CONST.amu, material)) for m in masses])]
    names = ["mass_amu", "Lambda_csl_per_m2_s"]
    series = [("CSL", 0, 1)]
    for curve in curves:
        inside = (masses >= curve.mass_amu[0]) & (masses <= curve.mass_amu[-1])
        vals = np.full(masses.size, np.nan)
        vals[inside] = curve(masses[inside])
        suffix = "per_m2_s" if curve.dimension == "decoherence_strength" else "Hz"
        names.append(f"{curve.name}_{suffix}")
        series.append((curve.name, 0, len(cols)))
        cols.append(vals)
    return FigureData(
        12,
        "Decoherence strength of collapse models",
        tuple(names),
        np.column_stack(cols),
        "mass (amu)",
        "Lambda (m^-2 s^-1)",
        tuple(series),
        True,
        True,
    )


def fig_solar_wind(p: Params) -> FigureData:
    v = np.geomspace(p["v_lo"], p["v_hi"], _n(p))
    particle = Particle(p.si("radius"), get_material(p["material"]))
    T = p.si("T_run")
    rho = np.array([dec.max_density_for_one_collision(particle, vi * 1e3, T) * 1e-6 for vi in v])
    return FigureData(
        13,
        f"Maximum gas density, r = {p['radius']:g} nm",
        ("velocity_km_s", "density_max_per_cm3"),
        np.column_stack([v, rho]),
        "velocity (km/s)",
        "max density (cm^-3)",
        (("rho_max", 0, 1),),
        True,
        True,
    )


# per-figure defaults (canonical keys); unspecified parameters use PARAMS
FIGURE_DEFAULTS = {
    2: {"points": 61},
    3: {"points": 61},
    5: {"points": 201, "phi0_hi": 10.0},
    6: {"points": 141},
    7: {"points": 1201, "resolution_nm": 20.0},
    8: {"points": 91},
    9: {"points": 401, "mass_amu": 1e10, "t1_s": 50.0, "phi0_hi": 20.0},
    10: {"points": 1201, "mass_amu": 1e10, "t1_s": 50.0, "phi0_hi": 20.0, "resolution_nm": 20.0},
    12: {"points": 61, "mass_hi_amu": 1e11},
    13: {"points": 61},
}
SUPPORTED_FIGURES = tuple(sorted(FIGURE_DEFAULTS))


def best_separation_phi0(p: Params) -> float:
    """phi0 maximizing ``V_quantum - V_classical`` over the phi0 sweep (no detector blur)."""
    sweep = Params({**p.values, "resolution": 0.0, "points": FIGURE_DEFAULTS[9]["points"]})
    phis, v = _phi_sweep(sweep)
    return float(phis[int(np.argmax(v[:, 0] - v[:, 1]))])


def run_figure(figure_id: int, overrides: dict | None = None, curves=()) -> tuple[FigureData, Params]:
    if figure_id not in FIGURE_DEFAULTS:
        raise ConfigError(f"unsupported figure {figure_id}; supported: {', '.join(map(str, SUPPORTED_FIGURES))}")
    p = Params.build(FIGURE_DEFAULTS[figure_id], overrides)
    if figure_id == 2:
        data = fig_lambda_min(p)
    elif figure_id == 3:
        data = fig_lambda_csl_min(p)
    elif figure_id in (5, 9):
        data = fig_visibility_phi0(p, figure_id)
    elif figure_id == 6:
        data = fig_visibility_lambda(p)
    elif figure_id == 7:
        data = _patterns(p, 7, float(p["phi0"]))
    elif figure_id == 10:
        given = overrides and any(parse_name(k)[0] == "phi0" for k in overrides)
        phi0 = float(p["phi0"]) if given else best_separation_phi0(p)
        p.values["phi0"] = phi0
        data = _patterns(p, 10, phi0, ("phi0 chosen to maximize V_quantum - V_classical",) if not given else ())
    elif figure_id == 8:
        data = fig_critical_mass(p)
    elif figure_id == 12:
        data = fig_collapse_lambda(p, curves)
    else:
        data = fig_solar_wind(p)
    return data, p


# -- sweeps -------------------------------------------------------------------


def _particle(p, mass=None):
    return Particle.from_mass(mass or p.si("mass"), get_material(p["material"]))


def _q_visibility(mode):
    def f(p):
        m = p.si("mass")
        return itf.visibility(m, p.grating(), p.timing(), p.state(m), p.si("Lambda"), mode, p.si("resolution"))

    return f


def _q_lambda_min(p):
    m = p.si("mass")
    return wp.lambda_min(m, p.plan(), p.si("t"), p.state(m))


def _q_visibilities(p):
    return _q_visibility("quantum")(p), _q_visibility("classical")(p)


def _one(f, column):
    return (lambda p: (float(f(p)),)), (column,)


# quantity -> (function of Params returning a tuple, output column names)
SWEEP_QUANTITIES = {
    "visibility": (_q_visibilities, ("visibility_quantum", "visibility_classical")),
    "visibility_quantum": _one(_q_visibility("quantum"), "visibility_quantum"),
    "visibility_classical": _one(_q_visibility("classical"), "visibility_classical"),
    "lambda_min": _one(_q_lambda_min, "Lambda_min_per_m2_s"),
    "gamma_min": _one(lambda p: wp.gamma_min(_q_lambda_min(p), p.si("r_c")), "Gamma_min_Hz"),
    "csl_lambda_min": _one(
        lambda p: dec.csl_lambda_min(_q_lambda_min(p), _particle(p), p.si("a_csl")), "lambda_min_Hz"
    ),
    "csl_Lambda": _one(
        lambda p: dec.csl_Lambda(dec.CslParams(p.si("lambda_csl"), p.si("a_csl")), _particle(p)),
        "Lambda_csl_per_m2_s",
    ),
    "critical_mass": _one(lambda p: itf.critical_mass(p.si("T"), p.si("period")) / CONST.amu, "m_crit_amu"),
    "max_density": _one(
        lambda p: dec.max_density_for_one_collision(
            Particle(p.si("radius"), get_material(p["material"])), p.si("velocity"), p.si("T_run")
        )
        * 1e-6,
        "density_max_per_cm3",
    ),
    "thruster_Lambda": _one(
        lambda p: dec.thruster_Lambda(p.si("force_noise"), p.si("spacecraft_mass"), p.si("mass")),
        "Lambda_th_per_m2_s",
    ),
}


def sweep_columns(quantity: str) -> tuple[str, ...]:
    if quantity not in SWEEP_QUANTITIES:
        raise ConfigError(f"unknown quantity {quantity!r}; known: {sorted(SWEEP_QUANTITIES)}")
    return SWEEP_QUANTITIES[quantity][1]


def sweep_value(quantity: str, variable: str, x: float, base: Params) -> tuple[float, ...]:
    """Evaluate ``quantity`` with ``variable`` (e.g. ``mass_amu``) set to ``x``."""
    sweep_columns(quantity)
    name, value = coerce(variable, x)
    p = Params({**base.values, name: value})
    return tuple(float(v) for v in SWEEP_QUANTITIES[quantity][0](p))


def parse_range(text: str) -> np.ndarray:
    """``start:stop:num`` (linear) or ``start:stop:num:log``; ``num = 0`` gives an empty grid."""
    parts = text.split(":")
    if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] not in ("lin", "log")):
        raise ConfigError(f"range must be start:stop:num[:lin|log], got {text!r}")
    try:
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"range must be start:stop:num[:lin|log], got {text!r}") from None
    if num < 0:
        raise ConfigError("range needs num >= 0")
    if len(parts) == 4 and parts[3] == "log":
        if start <= 0 or stop <= 0:
            raise ConfigError("log range needs positive bounds")
        return np.geomspace(start, stop, num)
    return np.linspace(start, stop, num)
