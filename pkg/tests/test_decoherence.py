import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from macroq import decoherence as dec
from macroq.errors import ConfigError, DomainError
from macroq.phys_core import CONST, Material, Particle, get_material

AMU = CONST.amu


def f_oracle(x):
    mpmath.mp.dps = 60
    x = mpmath.mpf(x)
    return float(6 / x**4 * (1 - 2 / x**2 + (1 + 2 / x**2) * mpmath.exp(-(x**2))))


def test_csl_f_at_one():
    assert dec.csl_f(1.0) == pytest.approx(6 * (3 / math.e - 1), rel=1e-10)


@pytest.mark.parametrize("x", [1e-4, 1e-3, 0.01, 0.1, 0.3, 0.49, 0.5, 0.51, 0.8, 1.0, 2.0, 5.0, 30.0, 100.0])
def test_csl_f_against_high_precision(x):
    assert dec.csl_f(x) == pytest.approx(f_oracle(x), rel=1e-12)


def test_csl_f_limits():
    assert dec.csl_f(1e-6) == pytest.approx(1.0, rel=1e-11)
    assert dec.csl_f(100.0) == pytest.approx(6e-8, rel=1e-3)


def test_csl_f_continuous_at_branch():
    b = dec._SERIES_BRANCH
    lo, hi = dec.csl_f(b * (1 - 1e-12)), dec.csl_f(b)
    assert abs(lo - hi) / hi < 1e-10


def test_csl_f_monotone_decreasing():
    x = np.geomspace(1e-3, 1e3, 2000)
    f = dec.csl_f(x)
    assert np.all(np.diff(f) < 0)


def test_csl_f_domain():
    with pytest.raises(DomainError):
        dec.csl_f(0.0)
    with pytest.raises(DomainError):
        dec.csl_f(np.array([1.0, np.nan]))


def test_csl_Lambda_formula(silica):
    p = Particle.from_mass(1e9 * AMU, silica)
    csl = dec.CslParams(2.2e-17)
    expected = 2.2e-17 * (p.mass / CONST.m_p) ** 2 * f_oracle(p.radius / 100e-9) / (4 * (100e-9) ** 2)
    assert dec.csl_Lambda(csl, p) == pytest.approx(expected, rel=1e-12)
    assert dec.csl_Lambda(dec.CslParams(0.0), p) == 0.0


def test_csl_exceeds_interferometric_floor(silica):
    p = Particle.from_mass(1e9 * AMU, silica)
    assert dec.csl_Lambda(dec.CslParams(2.2e-17), p) > 1e10


@given(st.floats(1e-22, 1e-12), st.floats(1e-20, 1e-6), st.floats(1000.0, 12000.0), st.floats(10e-9, 1e-6))
def test_csl_round_trip(m, lam, rho, a):
    p = Particle.from_mass(m, Material("m", rho, 2.0))
    Lam = dec.csl_Lambda(dec.CslParams(lam, a), p)
    assert Lam >= 0
    assert dec.csl_lambda_min(Lam, p, a) == pytest.approx(lam, rel=1e-10)


def test_csl_lambda_min_zero_and_material(silica, hafnia):
    m = 1e10 * AMU
    ps, ph = Particle.from_mass(m, silica), Particle.from_mass(m, hafnia)
    assert dec.csl_lambda_min(0.0, ps) == 0.0
    assert ph.radius < ps.radius
    ratio = dec.csl_lambda_min(1e12, ph) / dec.csl_lambda_min(1e12, ps)
    assert ratio == pytest.approx(dec.csl_f(ps.radius / 100e-9) / dec.csl_f(ph.radius / 100e-9), rel=1e-12)


def test_thruster_regression():
    lam = dec.thruster_Lambda(100e-9, 250.0, 1e10 * AMU)
    assert lam == pytest.approx(8e15, rel=0.05)
    assert dec.thruster_Lambda(0.0, 250.0, 1e10 * AMU) == 0.0
    assert dec.thruster_Lambda(100e-9, 500.0, 1e10 * AMU) == pytest.approx(lam / 4, rel=1e-14)


def test_gas_collision_rate():
    p = Particle(60e-9, get_material("fused_silica"))
    rate = dec.gas_collision_rate(p, 700.0, 500e6)
    assert rate == pytest.approx(math.pi * (60e-9) ** 2 * 700 * 5e8, rel=1e-14)
    assert rate == pytest.approx(4e-3, rel=0.02)
    assert rate * 100 < 1
    assert dec.gas_collision_rate(p, 700.0, 0.0) == 0.0
    assert dec.gas_collision_rate(p, 1400.0, 1e9) == pytest.approx(4 * rate, rel=1e-14)


def test_max_density_round_trip():
    p = Particle(60e-9, get_material("fused_silica"))
    rho = dec.max_density_for_one_collision(p, 500e3, 100.0)
    assert dec.gas_collision_rate(p, 500e3, rho) * 100.0 == pytest.approx(1.0, rel=1e-12)
    assert rho == pytest.approx(1.768388256576615e6, rel=1e-12)  # 1 / (pi r^2 v T), m^-3
    assert dec.max_density_for_one_collision(p, 1000e3, 100.0) == pytest.approx(rho / 2, rel=1e-14)
    # a velocity of 500 m/s gives ~1.8e3 cm^-3
    assert dec.max_density_for_one_collision(p, 500.0, 100.0) * 1e-6 == pytest.approx(1.77e3, rel=0.01)


def test_max_density_curve_decreasing():
    p = Particle(100e-9, get_material("fused_silica"))
    v = np.geomspace(1e3, 1e6, 50)
    rho = [dec.max_density_for_one_collision(p, vi, 100.0) for vi in v]
    assert all(a > b for a, b in zip(rho, rho[1:]))


def test_pressure():
    p = dec.pressure_from_density(500e6, 20.0)
    assert p == pytest.approx(1.380649e-13, rel=1e-12)
    assert 1.0e-13 <= p <= 1.5e-13
    assert dec.pressure_from_density(0.0, 20.0) == 0.0
    assert dec.pressure_from_density(500e6, 40.0) == pytest.approx(2 * p, rel=1e-14)


def test_model_curve_loglog(tmp_path):
    path = tmp_path / "dp.csv"
    path.write_text("mass_amu,value,unit\n1e8,1e-4,Hz\n1e10,1,Hz\n1e12,1e4,Hz\n")
    curve = dec.load_model_curve(path)
    assert curve.name == "dp" and curve.dimension == dec.units.dimension("Hz")
    assert curve(1e9) == pytest.approx(1e-2, rel=1e-12)  # power law is exact in log-log
    assert np.allclose(curve(np.array([1e8, 1e11])), [1e-4, 1e2], rtol=1e-12)
    with pytest.raises(DomainError):
        curve(1e13)


def test_model_curve_unit_conversion(tmp_path):
    path = tmp_path / "k.csv"
    path.write_text("mass_amu,value,unit\n1e8,1,cm^-2 s^-1\n1e9,2,cm^-2 s^-1\n")
    curve = dec.load_model_curve(path)
    assert curve(1e8) == pytest.approx(1e4, rel=1e-12)


@pytest.mark.parametrize(
    "text",
    ["mass,value,unit\n1,1,Hz\n2,2,Hz\n", "mass_amu,value,unit\n1,1,Hz\n2,2,m^-2 s^-1\n", "mass_amu,value,unit\n1,x,Hz\n"],
)
def test_model_curve_bad_files(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ConfigError):
        dec.load_model_curve(path)


def test_model_curve_needs_increasing_masses():
    with pytest.raises(DomainError):
        dec.ModelCurve("x", np.array([2.0, 1.0]), np.array([1.0, 1.0]), "rate")
