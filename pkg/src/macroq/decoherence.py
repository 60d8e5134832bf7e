"""Decoherence calculators: CSL mapping, thruster noise and residual-gas limits.

Decoherence strengths ``Lambda`` are plain floats in m^-2 s^-1. Models
without a closed form here (Diósi-Penrose, Károlyházy, quantum-gravity
proposals) enter as tabulated :class:`ModelCurve` files.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from macroq import units
from macroq.errors import ConfigError, DomainError
from macroq.phys_core import CONST, Particle

CSL_A_DEFAULT = 100e-9  # m
_SERIES_BRANCH = 0.5  # closed form loses ~1e-10 relative at 0.1, ~1e-13 here
_SERIES_TERMS = 24


@dataclass(frozen=True)
class CslParams:
    lambda_rate: float  # Hz
    a: float = CSL_A_DEFAULT  # m

    def __post_init__(self):
        if not self.lambda_rate >= 0:
            raise DomainError(f"CSL rate must be non-negative, got {self.lambda_rate}")
        if not self.a > 0:
            raise DomainError(f"CSL length must be positive, got {self.a}")


def _csl_f_scalar(x: float) -> float:
    if x < _SERIES_BRANCH:
        # bracket expanded in y = x^2: f = 6 sum_{k>=2} (-1)^k (k-1)/(k+1)! y^(k-2)
        y = x * x
        total = 0.0
        for k in range(_SERIES_TERMS + 1, 1, -1):
            total = total * y + (-1) ** k * (k - 1) / math.factorial(k + 1)
        return 6.0 * total
    inv2 = 1.0 / (x * x)
    return 6.0 * inv2 * inv2 * (1.0 - 2.0 * inv2 + (1.0 + 2.0 * inv2) * math.exp(-x * x))


def csl_f(x):
    """CSL geometry factor ``(6/x^4)[1 - 2/x^2 + (1 + 2/x^2) exp(-x^2)]`` for a sphere.

    ``x`` is radius over localization length. Below ``x = 0.5`` a Taylor
    series replaces the closed form, which loses all digits to
    cancellation as ``x -> 0``. Accepts scalars or arrays.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(~np.isfinite(arr)):
        raise DomainError("csl_f needs finite x > 0")
    out = np.vectorize(_csl_f_scalar, otypes=[float])(arr)
    return float(out) if out.ndim == 0 else out


def csl_Lambda(csl: CslParams, particle: Particle) -> float:
    """Positional decoherence strength ``lambda (m/m_p)^2 f(r/a) / (4 a^2)``."""
    m = particle.mass
    return csl.lambda_rate * (m / CONST.m_p) ** 2 * csl_f(particle.radius / csl.a) / (4.0 * csl.a**2)


def csl_lambda_min(Lambda_min: float, particle: Particle, a: float = CSL_A_DEFAULT) -> float:
    """Smallest CSL rate whose induced ``Lambda`` reaches ``Lambda_min``."""
    if not Lambda_min >= 0:
        raise DomainError(f"Lambda_min must be non-negative, got {Lambda_min}")
    if not a > 0:
        raise DomainError(f"CSL length must be positive, got {a}")
    m = particle.mass
    return 4.0 * a**2 * (CONST.m_p / m) ** 2 * Lambda_min / csl_f(particle.radius / a)


def thruster_Lambda(force_noise: float, spacecraft_mass: float, particle_mass: float) -> float:
    """Equivalent decoherence from thruster force noise, ``2 F^2 m^2 / (hbar^2 M^2)``.

    Parameters
    ----------
    force_noise : float
        Force noise amplitude spectral density in N/sqrt(Hz).
    spacecraft_mass, particle_mass : float
        Masses in kg.
    """
    if not force_noise >= 0:
        raise DomainError(f"force noise must be non-negative, got {force_noise}")
    if not (spacecraft_mass > 0 and particle_mass > 0):
        raise DomainError("masses must be positive")
    return 2.0 * force_noise**2 * particle_mass**2 / (CONST.hbar**2 * spacecraft_mass**2)


def gas_collision_rate(particle: Particle, gas_velocity: float, number_density: float) -> float:
    """Geometric collision rate ``pi r^2 v rho`` in Hz; every hit counts as decohering."""
    if not (gas_velocity >= 0 and number_density >= 0):
        raise DomainError("velocity and density must be non-negative")
    return math.pi * particle.radius**2 * gas_velocity * number_density


def max_density_for_one_collision(particle: Particle, velocity: float, T_run: float) -> float:
    """Gas density (m^-3) giving one expected collision in ``T_run``: ``1 / (pi r^2 v T)``."""
    if not (velocity > 0 and T_run > 0):
        raise DomainError("velocity and run time must be positive")
    return 1.0 / (math.pi * particle.radius**2 * velocity * T_run)


def pressure_from_density(number_density: float, temperature: float) -> float:
    """Ideal-gas pressure ``n k_B T`` in Pa."""
    if not (number_density >= 0 and temperature >= 0):
        raise DomainError("density and temperature must be non-negative")
    return number_density * CONST.k_B * temperature


@dataclass(frozen=True, eq=False)
class ModelCurve:
    """Tabulated decoherence curve versus mass.

    ``values`` are SI (``Lambda`` in m^-2 s^-1 or a rate in Hz, per
    ``dimension``); masses are in amu.
    """

    name: str
    mass_amu: np.ndarray
    values: np.ndarray
    dimension: str

    def __post_init__(self):
        if self.mass_amu.shape != self.values.shape or self.mass_amu.size < 2:
            raise DomainError(f"curve {self.name!r} needs at least two (mass, value) points")
        if np.any(np.diff(self.mass_amu) <= 0) or self.mass_amu[0] <= 0:
            raise DomainError(f"curve {self.name!r}: masses must be positive and strictly increasing")
        if np.any(self.values < 0):
            raise DomainError(f"curve {self.name!r}: values must be non-negative")

    def __call__(self, mass_amu):
        """Interpolate linearly in log-log (linearly where an endpoint is zero); no extrapolation."""
        m = np.asarray(mass_amu, dtype=float)
        lo, hi = self.mass_amu[0], self.mass_amu[-1]
        if np.any(m < lo * (1 - 1e-12)) or np.any(m > hi * (1 + 1e-12)):
            raise DomainError(f"curve {self.name!r} covers {lo:g}..{hi:g} amu only")
        m = np.clip(m, lo, hi)
        i = np.clip(np.searchsorted(self.mass_amu, m, side="right") - 1, 0, self.mass_amu.size - 2)
        m0, m1 = self.mass_amu[i], self.mass_amu[i + 1]
        v0, v1 = self.values[i], self.values[i + 1]
        u = np.log(m / m0) / np.log(m1 / m0)
        positive = (v0 > 0) & (v1 > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            loglog = np.exp(np.log(np.where(positive, v0, 1.0)) * (1 - u) + np.log(np.where(positive, v1, 1.0)) * u)
        out = np.where(positive, loglog, v0 + (v1 - v0) * u)
        return float(out) if out.ndim == 0 else out


def load_model_curve(path: str | Path, name: str | None = None) -> ModelCurve:
    """Read a CSV with header ``mass_amu,value,unit``; all units must share one dimension."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["mass_amu", "value", "unit"]:
            raise ConfigError(f"header must be mass_amu,value,unit, got {reader.fieldnames}", path=str(path))
        masses, values, dims = [], [], set()
        for lineno, row in enumerate(reader, start=2):
            try:
                unit = row["unit"].strip()
                dims.add(units.dimension(unit))
                masses.append(float(row["mass_amu"]))
                values.append(units.to_si(float(row["value"]), unit))
            except (TypeError, ValueError) as exc:
                raise ConfigError(str(exc), path=f"{path}:{lineno}") from exc
    if len(dims) > 1:
        raise ConfigError(f"mixed dimensions {sorted(dims)}", path=str(path))
    return ModelCurve(name or path.stem, np.array(masses), np.array(values), dims.pop() if dims else "")
