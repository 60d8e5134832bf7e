"""Physical constants, materials, particles and thermal Gaussian initial states.

All quantities are SI. Particle "size" means radius throughout: a fused-silica
sphere of radius 30 nm weighs about 1.5e8 amu and one of 120 nm about
9.6e9 amu.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from macroq.errors import ConfigError, DomainError


@dataclass(frozen=True)
class Constants:
    """CODATA 2018 values. ``hbar`` is derived from ``h``."""

    h: float = 6.62607015e-34  # J s
    k_B: float = 1.380649e-23  # J/K
    c: float = 299792458.0  # m/s
    eps0: float = 8.8541878128e-12  # F/m
    amu: float = 1.66053906660e-27  # kg
    m_p: float = 1.67262192369e-27  # kg

    @property
    def hbar(self) -> float:
        return self.h / (2.0 * math.pi)


CONST = Constants()

# Occupation number quoted together with a 1e9 amu particle; occupation is
# taken to scale inversely with mass from this anchor.
NBAR_ANCHOR = 0.3
NBAR_ANCHOR_MASS = 1e9 * CONST.amu
TRAP_OMEGA = 1e5  # rad/s


@dataclass(frozen=True)
class Material:
    name: str
    density: float  # kg/m^3
    rel_permittivity: float
    note: str = ""

    def __post_init__(self):
        if not self.density > 0:
            raise DomainError(f"material {self.name!r}: density must be positive, got {self.density}")
        if not self.rel_permittivity > 1:
            raise DomainError(
                f"material {self.name!r}: relative permittivity must exceed 1, got {self.rel_permittivity}"
            )


@dataclass(frozen=True)
class Particle:
    radius: float  # m
    material: Material

    def __post_init__(self):
        if not self.radius > 0:
            raise DomainError(f"particle radius must be positive, got {self.radius}")

    @property
    def mass(self) -> float:
        return particle_mass(self)

    @classmethod
    def from_mass(cls, mass: float, material: Material) -> "Particle":
        """Sphere of the given material with the given mass."""
        if not mass > 0:
            raise DomainError(f"mass must be positive, got {mass}")
        radius = (3.0 * mass / (4.0 * math.pi * material.density)) ** (1.0 / 3.0)
        return cls(radius, material)


@dataclass(frozen=True)
class InitialState:
    sigma_x: float  # m
    sigma_p: float  # kg m/s

    def __post_init__(self):
        if not (self.sigma_x > 0 and self.sigma_p > 0):
            raise DomainError("state widths must be positive")
        # 1e-12 slack absorbs rounding in states built exactly at the bound
        if self.sigma_x * self.sigma_p < 0.5 * CONST.hbar * (1.0 - 1e-12):
            raise DomainError(
                f"sigma_x*sigma_p = {self.sigma_x * self.sigma_p:.3e} violates the Heisenberg bound hbar/2"
            )


def particle_mass(particle: Particle) -> float:
    """Mass of a homogeneous sphere, ``(4/3) pi r^3 rho``."""
    return 4.0 / 3.0 * math.pi * particle.radius**3 * particle.material.density


def polarizability(particle: Particle) -> float:
    """Clausius-Mossotti point-dipole polarizability in F m^2.

    ``4 pi eps0 r^3 (eps - 1) / (eps + 2)``. Mie corrections for particles
    comparable to the wavelength are not included.
    """
    eps = particle.material.rel_permittivity
    if not eps > 1:
        raise DomainError(f"relative permittivity must exceed 1, got {eps}")
    return 4.0 * math.pi * CONST.eps0 * particle.radius**3 * (eps - 1.0) / (eps + 2.0)


def thermal_state_widths(mass: float, omega: float, nbar: float) -> InitialState:
    """Position and momentum widths of a thermal harmonic-oscillator state.

    Parameters
    ----------
    mass : float
        Oscillator mass in kg.
    omega : float
        Trap angular frequency in rad/s.
    nbar : float
        Mean occupation number.

    Returns
    -------
    InitialState
        ``sigma_x = sqrt(hbar (2 nbar + 1) / (2 m omega))`` and
        ``sigma_p = sqrt(hbar m omega (2 nbar + 1) / 2)``.
    """
    if not mass > 0:
        raise DomainError(f"mass must be positive, got {mass}")
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    if not nbar >= 0:
        raise DomainError(f"occupation number must be non-negative, got {nbar}")
    level = 2.0 * nbar + 1.0
    sigma_x = math.sqrt(CONST.hbar * level / (2.0 * mass * omega))
    sigma_p = math.sqrt(CONST.hbar * mass * omega * level / 2.0)
    return InitialState(sigma_x, sigma_p)


def occupation_for_mass(mass: float) -> float:
    """Occupation number after cooling, inversely proportional to mass (0.3 at 1e9 amu)."""
    if not mass > 0:
        raise DomainError(f"mass must be positive, got {mass}")
    return NBAR_ANCHOR * NBAR_ANCHOR_MASS / mass


def default_state(mass: float, omega: float = TRAP_OMEGA) -> InitialState:
    """Thermal state at the trap frequency with the mass-scaled occupation."""
    return thermal_state_widths(mass, omega, occupation_for_mass(mass))


def load_materials(path: str | Path | None = None) -> dict[str, Material]:
    """Read a materials file.

    The file is a JSON object ``{"materials": [{"name", "density",
    "rel_permittivity", ...}]}`` with density in kg/m^3. Without ``path`` the
    built-in table is returned.
    """
    if path is None:
        text = resources.files("macroq").joinpath("data/materials.json").read_text(encoding="utf-8")
        source = "built-in materials"
    else:
        text = Path(path).read_text(encoding="utf-8")
        source = str(path)
    try:
        entries = json.loads(text)["materials"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"malformed materials file ({exc})", path=source) from exc

    table = {}
    for i, entry in enumerate(entries):
        where = f"{source}: materials[{i}]"
        for key in ("name", "density", "rel_permittivity"):
            if key not in entry:
                raise ConfigError(f"missing key {key!r}", path=where)
        if entry["name"] in table:
            raise ConfigError(f"duplicate material {entry['name']!r}", path=where)
        table[entry["name"]] = Material(
            entry["name"], float(entry["density"]), float(entry["rel_permittivity"]), entry.get("note", "")
        )
    return table


def get_material(name: str, path: str | Path | None = None) -> Material:
    table = load_materials(path)
    try:
        return table[name]
    except KeyError:
        raise ConfigError(f"unknown material {name!r}; known: {sorted(table)}") from None
