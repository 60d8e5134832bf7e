import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from macroq.errors import ConfigError, DomainError
from macroq.phys_core import (
    CONST,
    Material,
    Particle,
    default_state,
    get_material,
    load_materials,
    occupation_for_mass,
    particle_mass,
    polarizability,
    thermal_state_widths,
)

AMU = CONST.amu
# high-precision oracle values (mpmath, 40 digits), frozen
MASS_30NM_KG = 2.488141381643116e-19
MASS_30NM_AMU = 1.498393763621385e8
MASS_120NM_AMU = 9.589720087176866e9
ALPHA_26NM = 6.367043647495639e-34  # F m^2, eps = 2.4, r = 26.2 nm
SIGMA_X_1E9 = 2.254023944786550e-11  # m, nbar = 0.3, omega = 1e5 rad/s
SIGMA_P_1E9 = 3.742894817369907e-24  # kg m/s


def test_hbar_derived_from_h():
    assert CONST.hbar == CONST.h / (2 * math.pi)


def test_mass_range_of_fused_silica(silica):
    assert particle_mass(Particle(30e-9, silica)) == pytest.approx(MASS_30NM_KG, rel=1e-12)
    assert Particle(30e-9, silica).mass / AMU == pytest.approx(MASS_30NM_AMU, rel=1e-12)
    assert Particle(120e-9, silica).mass / AMU == pytest.approx(MASS_120NM_AMU, rel=1e-12)


def test_tiny_radius_gives_tiny_mass(silica):
    assert Particle(1e-15, silica).mass < 1e-40


@given(st.floats(1e-9, 1e-5))
def test_mass_scales_as_cube(r):
    mat = Material("x", 2200.0, 2.4)
    assert Particle(2 * r, mat).mass / Particle(r, mat).mass == pytest.approx(8.0, rel=1e-12)


@given(st.floats(1e-22, 1e-12))
def test_from_mass_round_trip(m):
    mat = Material("x", 3000.0, 2.0)
    assert Particle.from_mass(m, mat).mass == pytest.approx(m, rel=1e-12)


def test_invalid_particles(silica):
    with pytest.raises(DomainError):
        Particle(0.0, silica)
    with pytest.raises(DomainError):
        Material("bad", -1.0, 2.0)
    with pytest.raises(DomainError):
        Material("bad", 1000.0, 1.0)


def test_polarizability_example():
    p = Particle(26.2e-9, Material("silica", 2200.0, 2.4))
    assert polarizability(p) == pytest.approx(ALPHA_26NM, rel=1e-12)


def test_polarizability_limits():
    r = 50e-9
    vacuum_like = polarizability(Particle(r, Material("v", 1.0, 1.0 + 1e-9)))
    conductor_like = polarizability(Particle(r, Material("c", 1.0, 1e12)))
    assert vacuum_like < 1e-40
    assert conductor_like == pytest.approx(4 * math.pi * CONST.eps0 * r**3, rel=1e-10)


@given(st.floats(1e-8, 1e-6), st.floats(1.01, 20.0), st.floats(1.01, 1.5))
def test_polarizability_monotone(r, eps, factor):
    a = polarizability(Particle(r, Material("m", 1000.0, eps)))
    assert polarizability(Particle(r * factor, Material("m", 1000.0, eps))) > a
    assert polarizability(Particle(r, Material("m", 1000.0, eps * factor))) > a


def test_thermal_widths_example():
    s = thermal_state_widths(1e9 * AMU, 1e5, 0.3)
    assert s.sigma_x == pytest.approx(SIGMA_X_1E9, rel=1e-12)
    assert s.sigma_p == pytest.approx(SIGMA_P_1E9, rel=1e-12)


def test_ground_state_saturates_heisenberg():
    s = thermal_state_widths(1e-18, 1e5, 0.0)
    assert s.sigma_x * s.sigma_p == pytest.approx(CONST.hbar / 2, rel=1e-14)


def test_mass_doubling_scaling():
    a = thermal_state_widths(1e-18, 1e5, 0.3)
    b = thermal_state_widths(2e-18, 1e5, 0.3)
    assert a.sigma_x / b.sigma_x == pytest.approx(math.sqrt(2), rel=1e-12)
    assert b.sigma_p / a.sigma_p == pytest.approx(math.sqrt(2), rel=1e-12)


@given(st.floats(1e-22, 1e-12), st.floats(1.0, 1e7), st.floats(0.0, 1e3))
def test_uncertainty_product(m, omega, nbar):
    s = thermal_state_widths(m, omega, nbar)
    assert s.sigma_x * s.sigma_p == pytest.approx(CONST.hbar * (2 * nbar + 1) / 2, rel=1e-12)


def test_thermal_widths_reject_bad_input():
    with pytest.raises(DomainError):
        thermal_state_widths(0.0, 1e5, 0.3)
    with pytest.raises(DomainError):
        thermal_state_widths(1e-18, -1.0, 0.3)


def test_occupation_anchor():
    assert occupation_for_mass(1e9 * AMU) == pytest.approx(0.3, rel=1e-14)
    assert occupation_for_mass(1e10 * AMU) == pytest.approx(0.03, rel=1e-14)
    s = default_state(1e9 * AMU)
    assert s.sigma_x == pytest.approx(SIGMA_X_1E9, rel=1e-12)


def test_shipped_materials():
    mats = load_materials()
    assert {"fused_silica", "hafnia"} <= set(mats)
    assert get_material("hafnia").density > get_material("fused_silica").density
    with pytest.raises(ConfigError):
        get_material("unobtainium")


def test_materials_file(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"materials": [{"name": "x", "density": 1000, "rel_permittivity": 3}]}))
    assert load_materials(path)["x"].rel_permittivity == 3
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_materials(path)
