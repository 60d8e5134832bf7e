import numpy as np
import pytest

from macroq import figures as figs
from macroq.errors import ConfigError, UnitMismatchError


def column(data, name):
    return data.rows[:, data.columns.index(name)]


@pytest.fixture(scope="module")
def phi_sweep():
    return figs.run_figure(5)[0]


def test_all_figures_run():
    for fid in figs.SUPPORTED_FIGURES:
        data, _ = figs.run_figure(fid)
        assert data.rows.shape[1] == len(data.columns)
        assert np.all(np.isfinite(data.rows))
    with pytest.raises(ConfigError):
        figs.run_figure(99)


def test_columns_carry_units():
    data, _ = figs.run_figure(8)
    assert data.columns == ("d_nm", "m_crit_amu")


@pytest.mark.parametrize("fid", [5, 9])
def test_visibility_sweep_shape(fid):
    data, p = figs.run_figure(fid)
    phi, vq, vc = (column(data, c) for c in ("phi0", "visibility_quantum", "visibility_classical"))
    assert vq[0] == pytest.approx(0.0, abs=1e-12) and vc[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all((vq >= 0) & (vq <= 1)) and np.all((vc >= 0) & (vc <= 1))
    assert np.max(np.abs(vq - vc)) > 0.05  # distinct phi0 dependence
    assert int(np.argmax(vq)) != int(np.argmax(vc))


def test_quantum_exceeds_classical_near_default_phase(phi_sweep):
    data = phi_sweep
    phi = column(data, "phi0")
    near = np.abs(phi - 4.2) <= 0.25
    assert np.all(column(data, "visibility_quantum")[near] > column(data, "visibility_classical")[near])


def test_heavier_particle_keeps_separation():
    data, p = figs.run_figure(9)
    assert p["mass"] == 1e10
    i = int(np.argmin(np.abs(column(data, "phi0") - figs.best_separation_phi0(p))))
    vq, vc = column(data, "visibility_quantum")[i], column(data, "visibility_classical")[i]
    assert vq - vc > 0.05 and vq > 5 * vc


@pytest.mark.parametrize("fid", [7, 10])
def test_patterns_differ_between_modes(fid):
    data, _ = figs.run_figure(fid)
    q, c = column(data, "density_quantum_per_m"), column(data, "density_classical_per_m")
    assert (q.max() - q.min()) / q.mean() > (c.max() - c.min()) / c.mean()
    assert np.max(np.abs(q - c)) / q.mean() > 0.1


def test_visibility_decreases_with_lambda():
    data, _ = figs.run_figure(6)
    assert np.all(np.diff(column(data, "visibility_quantum")) < 0)


def test_critical_mass_endpoints():
    data, _ = figs.run_figure(8)
    d, m = column(data, "d_nm"), column(data, "m_crit_amu")
    assert d[0] == 50 and d[-1] == 500
    assert m[0] == pytest.approx(4 * 9.975781785680995e8, rel=1e-9)
    assert m[-1] == pytest.approx(9.975781785680995e8 / 25, rel=1e-9)


def test_override_units_are_converted():
    _, p_ms = figs.run_figure(8, {"T_ms": 1e5})
    _, p_s = figs.run_figure(8, {"T_s": 100})
    assert p_ms.si("T") == p_s.si("T") == 100.0
    _, p = figs.run_figure(5, {"mass_kg": 1.66053906660e-18})
    assert p["mass"] == pytest.approx(1e9, rel=1e-9)


def test_override_errors():
    with pytest.raises(UnitMismatchError):
        figs.run_figure(8, {"T_nm": 1})
    with pytest.raises(ConfigError):
        figs.run_figure(8, {"nonsense": 1})


def test_parse_range():
    assert np.allclose(figs.parse_range("1:100:3:log"), [1, 10, 100])
    assert np.allclose(figs.parse_range("0:1:5"), np.linspace(0, 1, 5))
    assert figs.parse_range("0:1:0").size == 0
    with pytest.raises(ConfigError):
        figs.parse_range("0:1")


def test_sweep_value_matches_figure(phi_sweep):
    base = figs.Params.build(figs.FIGURE_DEFAULTS[5])
    row = phi_sweep.rows[np.argmin(np.abs(column(phi_sweep, "phi0") - 4.2))]
    assert figs.sweep_value("visibility", "phi0", row[0], base) == pytest.approx(tuple(row[1:]), rel=1e-12)
