"""Unit registry for the I/O boundary.

Internally everything is SI. Config files, CSV headers and CLI flags carry
unit strings; this module converts them and refuses cross-dimension
conversions. Only units that appear in the shipped data and figures are
registered; unknown units raise :class:`~macroq.errors.UnitMismatchError`.
"""
from macroq.errors import UnitMismatchError
from macroq.phys_core import CONST

# unit -> (dimension, factor to the SI unit of that dimension)
_UNITS = {
    "1": ("dimensionless", 1.0),
    "e": ("charge_number", 1.0),
    "bool": ("boolean", 1.0),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "us": ("time", 1e-6),
    "min": ("time", 60.0),
    "h": ("time", 3600.0),
    "day": ("time", 86400.0),
    "yr": ("time", 365.25 * 86400.0),
    "K": ("temperature", 1.0),
    "m": ("length", 1.0),
    "cm": ("length", 1e-2),
    "mm": ("length", 1e-3),
    "um": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "kg": ("mass", 1.0),
    "g": ("mass", 1e-3),
    "ng": ("mass", 1e-12),
    "amu": ("mass", CONST.amu),
    "m^-3": ("number_density", 1.0),
    "cm^-3": ("number_density", 1e6),
    "Pa": ("pressure", 1.0),
    "m/s": ("velocity", 1.0),
    "km/s": ("velocity", 1e3),
    "Hz": ("rate", 1.0),
    "rad/s": ("angular_rate", 1.0),
    "m^-2 s^-1": ("decoherence_strength", 1.0),
    "cm^-2 s^-1": ("decoherence_strength", 1e4),
    "nm^-2 s^-1": ("decoherence_strength", 1e18),
    "m^-1 s^-1": ("oscillator_csl_rate", 1.0),
    "m/s^2/sqrt(Hz)": ("acceleration_asd", 1.0),
    "nm/s^2/sqrt(Hz)": ("acceleration_asd", 1e-9),
    "pm/s^2/sqrt(Hz)": ("acceleration_asd", 1e-12),
    "N/sqrt(Hz)": ("force_asd", 1.0),
    "nN/sqrt(Hz)": ("force_asd", 1e-9),
    "W": ("power", 1.0),
    "mW": ("power", 1e-3),
    "J": ("energy", 1.0),
    "kbps": ("data_rate", 1e3),
    "dB": ("decibel", 1.0),
}


def dimension(unit):
    try:
        return _UNITS[unit][0]
    except KeyError:
        raise UnitMismatchError(f"unknown unit {unit!r}") from None


def to_si(value, unit):
    """Convert ``value`` expressed in ``unit`` to the SI unit of its dimension."""
    dimension(unit)
    return value * _UNITS[unit][1]


def from_si(value, unit):
    dimension(unit)
    return value / _UNITS[unit][1]


def convert(value, from_unit, to_unit):
    """Convert between two units of the same dimension."""
    if dimension(from_unit) != dimension(to_unit):
        raise UnitMismatchError(
            f"cannot convert {from_unit!r} ({dimension(from_unit)}) "
            f"to {to_unit!r} ({dimension(to_unit)})"
        )
    return value * _UNITS[from_unit][1] / _UNITS[to_unit][1]


def known_units():
    return sorted(_UNITS)
