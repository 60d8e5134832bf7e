"""Density noise spectrum of a cavity-optomechanical oscillator with CSL heating.

CSL adds a white force-noise term ``Y`` next to the thermal damping term
``gamma_m coth(hbar omega / 2 k_B T)``, which shows up as extra line
broadening of the mechanical resonance. The thermal factor uses
``beta = hbar / (2 k_B T_bath)``; spectra are one-sided (``omega > 0``).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from macroq.errors import ConfigError, DomainError, ResolutionError
from macroq.phys_core import CONST

SPAN_GAMMA_DEFAULT = 50.0
GRID_POINTS_DEFAULT = 4001
MIN_POINTS_PER_FWHM = 20


@dataclass(frozen=True)
class OptomechParams:
    alpha_s: float  # steady-state cavity amplitude
    kappa_c: float  # rad/s, cavity damping
    chi: float  # optomechanical coupling, 1/(m s)
    Delta: float  # rad/s, detuning
    mass: float  # kg
    gamma_m: float  # rad/s
    omega_m: float  # rad/s
    T_bath: float  # K

    def __post_init__(self):
        for name in ("kappa_c", "gamma_m", "omega_m", "mass", "T_bath"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class Preset:
    name: str
    params: OptomechParams
    lambda_rate: float
    inset_mass: float | None
    span_gamma: float
    n_points: int
    authoritative: bool
    note: str


@dataclass(frozen=True)
class LineReport:
    lambda_rate: float
    Y: float  # rad/s
    peak: float  # m^2 s
    fwhm: float  # rad/s
    area: float  # m^2
    equivalent_width: float  # rad/s, area / peak


def csl_Y(lambda_rate: float, mass: float, omega_m: float) -> float:
    """CSL noise coefficient ``lambda sqrt(hbar / (m omega_m))``.

    ``lambda_rate`` is the oscillator-level CSL coefficient (m^-1 s^-1), so
    that ``Y`` carries the units of ``gamma_m``.
    """
    if not lambda_rate >= 0:
        raise DomainError(f"CSL coefficient must be non-negative, got {lambda_rate}")
    if not (mass > 0 and omega_m > 0):
        raise DomainError("mass and omega_m must be positive")
    return lambda_rate * math.sqrt(CONST.hbar / (mass * omega_m))


def density_noise_spectrum(omega, p: OptomechParams, Y: float = 0.0):
    """Position noise spectral density ``S(omega)`` in m^2 s.

    Parameters
    ----------
    omega : float or array
        Angular frequencies, strictly positive.
    p : OptomechParams
    Y : float
        CSL noise coefficient from :func:`csl_Y`; ``S`` is affine in ``Y``.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise DomainError("omega must be finite and positive")
    if not Y >= 0:
        raise DomainError(f"Y must be non-negative, got {Y}")
    hbar = CONST.hbar
    D, k, chi, m = p.Delta, p.kappa_c, p.chi, p.mass
    a2 = p.alpha_s**2
    thermal = p.gamma_m / np.tanh(hbar * w / (2.0 * CONST.k_B * p.T_bath))
    optical = 2.0 * a2 * hbar**2 * k * chi**2 * (D**2 + k**2 + w**2)
    mech = hbar * m * w * ((D**2 + k**2 - w**2) ** 2 + 4.0 * k**2 * w**2) * (thermal + Y)
    denom = 2.0 * a2 * D * hbar * chi**2 + m * (w**2 - p.omega_m**2 - 1j * p.gamma_m * w) * (D**2 + (k + 1j * w) ** 2)
    out = (optical + mech) / np.abs(denom) ** 2
    return float(out) if out.ndim == 0 else out


def spectrum_grid(p: OptomechParams, span_gamma: float = SPAN_GAMMA_DEFAULT, n_points: int = GRID_POINTS_DEFAULT):
    """Log-spaced grid over ``omega_m +/- span_gamma * gamma_m``."""
    lo = p.omega_m - span_gamma * p.gamma_m
    if lo <= 0:
        raise DomainError("grid span reaches omega <= 0; reduce span_gamma")
    return np.geomspace(lo, p.omega_m + span_gamma * p.gamma_m, int(n_points))


def _fwhm(omega, s):
    i = int(np.argmax(s))
    half = 0.5 * s[i]
    left = np.nonzero(s[:i] < half)[0]
    right = np.nonzero(s[i:] < half)[0]
    if i == 0 or i == s.size - 1 or not left.size or not right.size:
        raise ResolutionError("grid does not contain the resonance and both half-maximum points; widen the span")
    l0 = left[-1]
    r0 = i + right[0]
    wl = np.interp(half, [s[l0], s[l0 + 1]], [omega[l0], omega[l0 + 1]])
    wr = np.interp(half, [s[r0], s[r0 - 1]], [omega[r0], omega[r0 - 1]])
    if r0 - l0 - 1 < MIN_POINTS_PER_FWHM:
        raise ResolutionError(f"only {r0 - l0 - 1} grid points across the FWHM; need {MIN_POINTS_PER_FWHM}")
    return float(wr - wl)


def line_broadening_report(p: OptomechParams, lambda_values, omega=None) -> list[LineReport]:
    """Peak, FWHM, area and equivalent width of the spectrum for each CSL coefficient.

    Raises :class:`ResolutionError` when the grid resolves the FWHM with
    fewer than 20 points or misses the half-maximum points.
    """
    omega = spectrum_grid(p) if omega is None else np.asarray(omega, dtype=float)
    rows = []
    for lam in lambda_values:
        Y = csl_Y(lam, p.mass, p.omega_m)
        s = density_noise_spectrum(omega, p, Y)
        area = float(np.trapezoid(s, omega))
        peak = float(s.max())
        rows.append(LineReport(float(lam), Y, peak, _fwhm(omega, s), area, area / peak))
    return rows


def load_preset(name_or_path: str | Path = "fig1_preset") -> Preset:
    """Load an optomechanical preset from the built-in data or a JSON file."""
    path = Path(name_or_path)
    if path.suffix == ".json" and path.exists():
        text, source = path.read_text(encoding="utf-8"), str(path)
    else:
        res = resources.files("macroq").joinpath(f"data/{name_or_path}.json")
        if not res.is_file():
            raise ConfigError(f"unknown preset {str(name_or_path)!r}")
        text, source = res.read_text(encoding="utf-8"), f"preset {name_or_path}"
    try:
        raw = json.loads(text)
        params = OptomechParams(**raw["params"])
        grid = raw.get("grid", {})
        return Preset(
            raw["name"],
            params,
            float(raw["lambda_rate"]),
            raw.get("inset_mass"),
            float(grid.get("span_gamma", SPAN_GAMMA_DEFAULT)),
            int(grid.get("n_points", GRID_POINTS_DEFAULT)),
            bool(raw.get("authoritative", False)),
            raw.get("note", ""),
        )
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed preset ({exc})", path=source) from exc


def preset_dict(preset: Preset) -> dict:
    return asdict(preset)
