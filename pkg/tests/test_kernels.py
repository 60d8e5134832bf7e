import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from macroq import kernels

BACKENDS = sorted(kernels.available_backends().items())


@pytest.fixture(params=[b[0] for b in BACKENDS])
def backend(request):
    return kernels.available_backends()[request.param]


def test_compiled_backend_is_built():
    # the repository ships a compiled core; a missing build should be loud in CI
    assert "compiled" in kernels.available_backends()


@pytest.mark.parametrize("z", [0.5, 2.0, 4.2, 8.0])
def test_sum_of_squares_identity(backend, z):
    n = np.arange(-80, 81)
    total = float(np.sum(backend.besselj(n, np.full(n.shape, z)) ** 2))
    assert abs(total - 1.0) < 1e-10


def test_matches_scipy_on_grid(backend):
    orders = np.arange(0, 61)[:, None]
    z = np.array([1e-8, 1e-3, 0.1, 1.0, 2.5, 4.2, 7.3, 16.4, 25.0, 40.0])[None, :]
    ours = backend.besselj(orders, z)
    ref = special.jv(orders, z)
    scale = np.maximum(np.abs(ref), 1e-300)
    close = np.abs(ours - ref) <= 1e-12 + 1e-10 * scale
    assert close.all(), np.argwhere(~close)


@pytest.mark.parametrize("nu,z", [(0, 4.2), (2, 4.2), (10, 0.7), (30, 12.0), (3, 1e-7)])
def test_matches_mpmath(backend, nu, z):
    ref = float(mpmath.besselj(nu, z))
    assert backend.besselj(nu, z) == pytest.approx(ref, rel=1e-11, abs=1e-300)


def test_negative_order_and_argument(backend):
    z = np.array([0.3, 2.0, 9.0])
    for n in range(0, 7):
        assert np.allclose(backend.besselj(-n, z), (-1) ** n * backend.besselj(n, z), rtol=1e-14, atol=0)
        assert np.allclose(backend.besselj(n, -z), (-1) ** n * backend.besselj(n, z), rtol=1e-14, atol=0)


def test_at_zero(backend):
    assert backend.besselj(0, 0.0) == 1.0
    assert np.all(backend.besselj(np.arange(1, 10), 0.0) == 0.0)


def test_cosine_series_against_direct_sum(backend):
    rng = np.random.default_rng(3)
    c = rng.normal(size=12)
    x = np.linspace(-3.0, 3.0, 101)
    direct = c[0] + 2.0 * sum(c[n] * np.cos(n * 1.7 * x) for n in range(1, c.size))
    assert np.allclose(backend.cosine_series(c, 1.7, x), direct, rtol=0, atol=1e-12)


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("only one backend available")
    (_, a), (_, b) = BACKENDS[:2]
    orders = np.arange(0, 40)[:, None]
    z = np.linspace(0, 30, 61)[None, :]
    assert np.allclose(a.besselj(orders, z), b.besselj(orders, z), rtol=1e-12, atol=1e-15)
    c = np.linspace(1, 0, 20)
    x = np.linspace(0, 1, 33)
    assert np.allclose(a.cosine_series(c, 3.0, x), b.cosine_series(c, 3.0, x), rtol=1e-13, atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(nu=st.integers(0, 40), z=st.floats(0.0, 50.0))
def test_recurrence_property(nu, z):
    if z < 1e-3:
        return
    j = kernels.besselj(np.array([nu, nu + 1, nu + 2]), z)
    # J_{n} + J_{n+2} = (2 (n+1) / z) J_{n+1}
    lhs, rhs = j[0] + j[2], 2.0 * (nu + 1) / z * j[1]
    assert abs(lhs - rhs) <= 1e-11 * max(1.0, abs(lhs), abs(rhs))
