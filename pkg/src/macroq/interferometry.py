"""Forward model of the single-phase-grating near-field (Talbot) interferometer.

A particle prepared in a Gaussian state expands freely for ``t1``, receives a
thin standing-wave phase grating of period ``d = wavelength / 2`` and peak
phase ``phi0``, then evolves for ``t2`` before its position is measured. The
pattern near the release point is the Fourier series

    P(x) ∝ sum_n exp(i n k_g x) J_2n[phi0 g(n)] D_n

with ``g(n) = sin(pi n kappa)`` for quantum particles and ``g(n) = pi n
kappa`` for the classical moiré shadow, and ``D_n`` the product of the
source-size, decoherence and (optional) detector-resolution damping
factors. Bessel orders are even, so the ``n`` and ``-n`` terms are equal and
the series is evaluated as a real cosine series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from macroq import kernels
from macroq.errors import DomainError, TruncationError
from macroq.phys_core import CONST, InitialState, Particle, polarizability

MODES = ("quantum", "classical")
TAIL_TOL = 1e-12
DEFAULT_NMAX_CAP = 64
DEFAULT_WINDOW_PERIODS = 6
DEFAULT_WINDOW_POINTS = 2049
MAX_TOTAL_TIME = 100.0


@dataclass(frozen=True)
class GratingConfig:
    wavelength_g: float = 200e-9  # m, standing-wave wavelength
    waist: float = 1e-3  # m, beam waist a_G
    phi0: float = 4.2  # peak phase at the antinodes

    def __post_init__(self):
        if not self.wavelength_g > 0:
            raise DomainError(f"grating wavelength must be positive, got {self.wavelength_g}")
        if not self.waist > 0:
            raise DomainError(f"grating waist must be positive, got {self.waist}")
        if not self.phi0 >= 0:
            raise DomainError(f"grating phase must be non-negative, got {self.phi0}")

    @property
    def period(self) -> float:
        return self.wavelength_g / 2.0


@dataclass(frozen=True)
class TimingConfig:
    t1: float  # s, free expansion before the grating
    t2: float  # s, free evolution after the grating
    max_total: float = MAX_TOTAL_TIME

    def __post_init__(self):
        if not (self.t1 > 0 and self.t2 > 0):
            raise DomainError(f"t1 and t2 must be positive, got t1={self.t1}, t2={self.t2}")
        if self.total > self.max_total * (1.0 + 1e-12):
            raise DomainError(f"total time {self.total} s exceeds the cap of {self.max_total} s")

    @property
    def total(self) -> float:
        return self.t1 + self.t2

    @classmethod
    def split(cls, total: float, t1: float, max_total: float = MAX_TOTAL_TIME) -> "TimingConfig":
        return cls(t1, total - t1, max_total)

    @classmethod
    def symmetric(cls, total: float, max_total: float = MAX_TOTAL_TIME) -> "TimingConfig":
        return cls(total / 2.0, total / 2.0, max_total)


@dataclass(frozen=True)
class TalbotParams:
    t_T: float  # s
    alpha: float
    beta: float
    kappa: float
    mu: float
    k_g: float  # 1/m
    period: float  # m, grating period d

    @property
    def pattern_period(self) -> float:
        """Spatial period of the pattern, ``mu * d``."""
        return self.mu * self.period


@dataclass(frozen=True)
class KappaCheck:
    satisfied: bool
    margin: float
    limit: float
    kappa: float


@dataclass(frozen=True, eq=False)
class Pattern:
    grid: np.ndarray  # m
    density: np.ndarray  # 1/m, integrates to 1 over the grid
    period_hint: float  # m, mu * d
    coefficients: np.ndarray  # A_0..A_nmax, A_0 = 1
    n_max: int
    mode: str

    @property
    def peak_to_trough(self) -> float:
        """``(max - min) / mean`` of the normalized density."""
        x = self.grid
        mean = np.trapezoid(self.density, x) / (x[-1] - x[0])
        return float((self.density.max() - self.density.min()) / mean)


def talbot_params(mass: float, grating: GratingConfig, timing: TimingConfig) -> TalbotParams:
    if not mass > 0:
        raise DomainError(f"mass must be positive, got {mass}")
    d = grating.period
    t_T = mass * d * d / CONST.h
    alpha = timing.t1 / t_T
    beta = timing.t2 / t_T
    kappa = alpha * beta / (alpha + beta)
    mu = timing.total / timing.t1
    k_g = 2.0 * math.pi / (mu * d)
    return TalbotParams(t_T, alpha, beta, kappa, mu, k_g, d)


def critical_mass(T: float, period: float) -> float:
    """Mass above which kappa ~ 1 is unreachable within total time ``T``: ``h T / (4 d^2)``."""
    if not (T > 0 and period > 0):
        raise DomainError(f"T and period must be positive, got T={T}, period={period}")
    return CONST.h * T / (4.0 * period * period)


def kappa_limit(mass: float, period: float, T: float) -> float:
    """Largest kappa reachable with total time ``T``: ``T / (4 t_T) = m_crit / m``."""
    if not mass > 0:
        raise DomainError(f"mass must be positive, got {mass}")
    return critical_mass(T, period) / mass


def kappa_bound_satisfied(params: TalbotParams, timing: TimingConfig, kappa_required: float | None = None) -> KappaCheck:
    """Check ``kappa <= T / (4 t_T)``.

    With ``kappa_required`` the check asks whether that target is reachable
    at this mass and period; otherwise it checks the configured kappa, which
    satisfies the bound for any split of ``T`` (equality at ``t1 = t2``).
    """
    limit = timing.total / (4.0 * params.t_T)
    kappa = params.kappa if kappa_required is None else kappa_required
    margin = limit - kappa
    # the symmetric split hits the bound exactly; allow rounding there
    return KappaCheck(margin >= -1e-12 * limit, margin, limit, kappa)


def _check_mode(mode):
    if mode not in MODES:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


def _phase_argument(n, phi0, kappa, mode):
    if mode == "quantum":
        return phi0 * np.sin(np.pi * n * kappa)
    return phi0 * np.pi * n * kappa


def _damping(n, params, state, Lambda, T, resolution):
    source = n * params.k_g * state.sigma_x * params.beta / params.alpha
    blur = n * params.k_g * resolution
    exponent = 0.5 * source**2 + Lambda * T * (n * params.kappa * params.period) ** 2 / 3.0 + 0.5 * blur**2
    return np.exp(-exponent)


def _validate(mass, Lambda, resolution, mode):
    _check_mode(mode)
    if not mass > 0:
        raise DomainError(f"mass must be positive, got {mass}")
    if not Lambda >= 0:
        raise DomainError(f"decoherence strength must be non-negative, got {Lambda}")
    if not resolution >= 0:
        raise DomainError(f"detector resolution must be non-negative, got {resolution}")


def fourier_coefficients(
    mass: float,
    grating: GratingConfig,
    timing: TimingConfig,
    state: InitialState,
    Lambda: float = 0.0,
    mode: str = "quantum",
    n_max: int = 1,
    resolution: float = 0.0,
) -> np.ndarray:
    """Coefficients ``A_0..A_n_max`` of ``P(x) = A_0 + 2 sum A_n cos(n k_g x)``; ``A_0 = 1``."""
    _validate(mass, Lambda, resolution, mode)
    params = talbot_params(mass, grating, timing)
    n = np.arange(n_max + 1)
    arg = _phase_argument(n, grating.phi0, params.kappa, mode)
    bessel = kernels.besselj(2 * n, arg)
    return bessel * _damping(n, params, state, Lambda, timing.total, resolution)


def _tail_bounds(n, grating, params, state, Lambda, T, mode, resolution, envelope=False):
    """Upper bounds on ``|A_n|`` from ``|J_v(z)| <= min(1, (|z|/2)^v / v!)``.

    With ``envelope`` the quantum argument is replaced by its maximum
    ``phi0``, giving a bound that is non-increasing once ``2n > phi0 / 2``.
    """
    if envelope and mode == "quantum":
        z = np.full(n.shape, float(grating.phi0))
    else:
        z = np.abs(_phase_argument(n, grating.phi0, params.kappa, mode))
    nu = 2.0 * n
    safe = np.where(z > 0, z, 1.0)
    log_b = nu * np.log(0.5 * safe) - np.array([math.lgamma(v + 1.0) for v in nu])
    bessel_bound = np.where(z > 0, np.exp(np.minimum(log_b, 0.0)), np.where(nu == 0, 1.0, 0.0))
    return bessel_bound * _damping(n, params, state, Lambda, T, resolution)


def _tail_ok(bounds, env, n_max, tol):
    """Dropped terms up to the horizon are below ``tol`` and the envelope is below ``tol`` and decreasing there.

    Past the horizon the envelope keeps decreasing (Bessel bound and
    Gaussian damping are both eventually monotone), so it bounds every
    remaining term.
    """
    rest = bounds[n_max + 1 :]
    return bool(np.all(rest < tol) and env[-1] < tol and env[-1] <= env[-2])


def series_cutoff(
    mass: float,
    grating: GratingConfig,
    timing: TimingConfig,
    state: InitialState,
    Lambda: float = 0.0,
    mode: str = "quantum",
    resolution: float = 0.0,
    tol: float = TAIL_TOL,
    cap: int = DEFAULT_NMAX_CAP,
) -> int:
    """Smallest ``n_max`` whose dropped terms are bounded below ``tol`` (relative to ``A_0 = 1``).

    Raises :class:`TruncationError` with the number of terms that would be
    needed when more than ``cap`` terms are required.
    """
    _validate(mass, Lambda, resolution, mode)
    params = talbot_params(mass, grating, timing)
    args = (grating, params, state, Lambda, timing.total, mode, resolution)
    horizon = max(cap, DEFAULT_NMAX_CAP) + 3
    n = np.arange(horizon + 1)
    bounds = _tail_bounds(n, *args)
    env = _tail_bounds(n, *args, envelope=True)
    above = np.nonzero(bounds[: cap + 2] >= tol)[0]
    n_max = int(above[-1]) if above.size else 0
    if n_max <= cap and _tail_ok(bounds, env, n_max, tol):
        return max(n_max, 1)
    dropped = float(bounds[cap + 1 :].max())

    needed = None
    while horizon < 1_000_000:
        horizon *= 4
        n = np.arange(horizon + 1)
        bounds = _tail_bounds(n, *args)
        env = _tail_bounds(n, *args, envelope=True)
        above = np.nonzero(bounds >= tol)[0]
        if above.size and above[-1] < horizon - 2 and _tail_ok(bounds, env, int(above[-1]), tol):
            needed = int(above[-1])
            break
    detail = f"about {needed} terms" if needed else "more than 1e6 terms"
    raise TruncationError(
        f"{mode} series needs {detail} to bound the tail below {tol:g}, cap is {cap}; "
        "raise n_max_cap, or add decoherence/detector resolution to damp the tail",
        required_terms=needed,
        cap=cap,
        dropped_bound=dropped,
    )


def default_window(period: float, n_periods: int = DEFAULT_WINDOW_PERIODS, n_points: int = DEFAULT_WINDOW_POINTS):
    half = 0.5 * n_periods * period
    return (-half, half, n_points)


def pattern(
    mass: float,
    grating: GratingConfig,
    timing: TimingConfig,
    state: InitialState,
    Lambda: float = 0.0,
    mode: str = "quantum",
    window: tuple[float, float, int] | None = None,
    n_max: int | None = None,
    n_max_cap: int = DEFAULT_NMAX_CAP,
    resolution: float = 0.0,
) -> Pattern:
    """Normalized interference pattern on a position grid.

    Parameters
    ----------
    mass : float
        Particle mass in kg.
    grating, timing : GratingConfig, TimingConfig
    state : InitialState
        Gaussian state at release.
    Lambda : float
        Positional decoherence strength in m^-2 s^-1.
    mode : {"quantum", "classical"}
    window : (x_lo, x_hi, n_points), optional
        Evaluation grid in m; must span at least two pattern periods.
        Defaults to six periods centred on the release point.
    n_max : int, optional
        Series cutoff. Chosen adaptively (capped at ``n_max_cap``) when
        omitted; an explicit value is still checked against the tail bound.
    resolution : float
        Gaussian detector blur (standard deviation, m) folded into the
        pattern; 0 gives the bare pattern.

    Returns
    -------
    Pattern
        Density normalized by trapezoidal integration over the window.

    Raises
    ------
    TruncationError
        If the series tail cannot be bounded below ``TAIL_TOL``.
    """
    params = talbot_params(mass, grating, timing)
    period = params.pattern_period
    x_lo, x_hi, n_points = window if window is not None else default_window(period)
    if not x_hi - x_lo >= 2.0 * period * (1.0 - 1e-12):
        raise DomainError(f"window [{x_lo}, {x_hi}] spans fewer than two pattern periods ({period:.3e} m)")
    if n_points < 3:
        raise DomainError("window needs at least 3 points")

    if n_max is None:
        n_max = series_cutoff(mass, grating, timing, state, Lambda, mode, resolution, cap=n_max_cap)
    else:
        if n_max < 1:
            raise DomainError(f"n_max must be >= 1, got {n_max}")
        # raises with a diagnostic when n_max terms do not bound the tail
        series_cutoff(mass, grating, timing, state, Lambda, mode, resolution, cap=n_max)

    coeffs = fourier_coefficients(mass, grating, timing, state, Lambda, mode, n_max, resolution)
    x = np.linspace(x_lo, x_hi, int(n_points))
    raw = kernels.cosine_series(coeffs, params.k_g, x)
    if raw.min() < -1e-9 * raw.max():
        raise TruncationError(f"pattern has negative density {raw.min():.3e}; series is not converged")
    raw = np.maximum(raw, 0.0)
    density = raw / np.trapezoid(raw, x)
    return Pattern(x, density, period, coeffs, int(n_max), mode)


def visibility(
    mass: float,
    grating: GratingConfig,
    timing: TimingConfig,
    state: InitialState,
    Lambda: float = 0.0,
    mode: str = "quantum",
    resolution: float = 0.0,
) -> float:
    """First-harmonic visibility ``2 |c_1| / |c_0|`` of the pattern, in [0, 1]."""
    coeffs = fourier_coefficients(mass, grating, timing, state, Lambda, mode, 1, resolution)
    return float(min(1.0, max(0.0, 2.0 * abs(coeffs[1]) / abs(coeffs[0]))))


def phi0_from_energy(grating_energy: float, particle: Particle, waist: float) -> float:
    """Grating phase ``2 Re(alpha) E_G / (hbar c eps0 a_G^2)`` for pulse energy ``E_G``.

    The waist enters squared so that the phase is dimensionless.
    """
    if not grating_energy >= 0:
        raise DomainError(f"grating energy must be non-negative, got {grating_energy}")
    if not waist > 0:
        raise DomainError(f"waist must be positive, got {waist}")
    alpha = polarizability(particle)
    return 2.0 * alpha * grating_energy / (CONST.hbar * CONST.c * CONST.eps0 * waist**2)


def required_grating_power(particle: Particle, waist: float, pulse_duration: float, phi0_target: float) -> float:
    """Optical power (W) that reaches ``phi0_target`` with a pulse of the given duration."""
    if not pulse_duration > 0:
        raise DomainError(f"pulse duration must be positive, got {pulse_duration}")
    if not phi0_target >= 0:
        raise DomainError(f"target phase must be non-negative, got {phi0_target}")
    if not waist > 0:
        raise DomainError(f"waist must be positive, got {waist}")
    alpha = polarizability(particle)
    energy = phi0_target * CONST.hbar * CONST.c * CONST.eps0 * waist**2 / (2.0 * alpha)
    return energy / pulse_duration
