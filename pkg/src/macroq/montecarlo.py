"""Synthetic interference experiments.

Positions are drawn from a forward-model pattern by inverse-CDF sampling
and smeared by Gaussian detector noise. The estimators mirror the forward
model: first-harmonic visibility with a bootstrap error, and a Lambda
interval obtained by inverting a precomputed V(Lambda) curve.

Random numbers come from numpy's Philox counter-based generator; the plan
seed feeds a SeedSequence whose first child drives sampling and second
child drives bootstrap resampling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from macroq import interferometry as itf
from macroq.errors import DomainError, SamplingError
from macroq.phys_core import InitialState

GENERATOR_ID = "numpy.random.Philox/SeedSequence(seed).spawn(2)[0:sampling,1:bootstrap]"
CDF_GRID_POINTS = 2**14
WINDOW_PERIODS = 6
BINS_PER_PERIOD = 16
BOOTSTRAP_RESAMPLES = 200
SIGMA_DETECT_DEFAULT = 20e-9  # m, along the grating axis


@dataclass(frozen=True)
class ExperimentPlan:
    mass: float  # kg
    grating: itf.GratingConfig
    timing: itf.TimingConfig
    state: InitialState
    seed: int
    Lambda_true: float = 0.0  # m^-2 s^-1
    mode: str = "quantum"
    N: int = 24_000
    sigma_detect: float = SIGMA_DETECT_DEFAULT  # m
    resolution: float = 0.0  # m, blur folded into the sampled pattern itself
    window_periods: int = WINDOW_PERIODS
    bins_per_period: int = BINS_PER_PERIOD

    def __post_init__(self):
        if self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N}")
        if not self.sigma_detect >= 0:
            raise DomainError(f"sigma_detect must be non-negative, got {self.sigma_detect}")
        if self.window_periods < 6:
            raise DomainError(f"sampling window must cover >= 6 periods, got {self.window_periods}")
        if not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")


@dataclass(frozen=True)
class LambdaInterval:
    lower: float
    point: float
    upper: float  # inf when the data cannot bound Lambda from above
    flag: str  # "ok", "above_range" or "below_range"


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    bin_edges: np.ndarray  # m
    counts: np.ndarray
    visibility: float
    visibility_stderr: float
    period: float  # m
    seed: int
    generator: str = GENERATOR_ID
    lambda_interval: LambdaInterval | None = None
    extra: dict = field(default_factory=dict)


def streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent sampling and bootstrap generators for ``seed``."""
    ss_sample, ss_boot = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.Philox(ss_sample)), np.random.Generator(np.random.Philox(ss_boot))


def pattern_for(plan: ExperimentPlan) -> itf.Pattern:
    params = itf.talbot_params(plan.mass, plan.grating, plan.timing)
    half = 0.5 * plan.window_periods * params.pattern_period
    return itf.pattern(
        plan.mass,
        plan.grating,
        plan.timing,
        plan.state,
        plan.Lambda_true,
        plan.mode,
        window=(-half, half, CDF_GRID_POINTS),
        resolution=plan.resolution,
    )


class PatternSampler:
    """Inverse-CDF sampler on the pattern grid, linear between grid points."""

    def __init__(self, pattern: itf.Pattern):
        x, p = pattern.grid, pattern.density
        cdf = np.concatenate(([0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(x))))
        if not cdf[-1] > 0 or not np.isfinite(cdf[-1]):
            raise SamplingError("pattern has zero total weight")
        self.grid = x
        self.cdf = cdf / cdf[-1]
        self.period = pattern.period_hint

    def __call__(self, rng: np.random.Generator, n: int, sigma_detect: float = 0.0) -> np.ndarray:
        x = np.interp(rng.random(n), self.cdf, self.grid)
        if sigma_detect > 0:
            x = x + rng.normal(0.0, sigma_detect, n)
        return x


def sample_positions(plan: ExperimentPlan, rng: np.random.Generator | None = None) -> np.ndarray:
    """Draw ``plan.N`` measured positions; reproducible from ``plan.seed`` when ``rng`` is omitted."""
    sampler = PatternSampler(pattern_for(plan))
    if rng is None:
        rng = streams(plan.seed)[0]
    return sampler(rng, plan.N, plan.sigma_detect)


def _harmonic(x, period):
    phase = 2.0 * math.pi * x / period
    return np.cos(phase), np.sin(phase)


def estimate_visibility(
    samples,
    period: float,
    rng: np.random.Generator | None = None,
    n_boot: int = BOOTSTRAP_RESAMPLES,
) -> tuple[float, float]:
    """First-harmonic visibility ``2 |mean exp(2 pi i x / period)|`` and its bootstrap error.

    Returns
    -------
    (V, stderr) : tuple of float
        ``V`` clamped to [0, 1]; ``stderr`` is nan for fewer than two
        samples or ``n_boot = 0``.
    """
    if not period > 0:
        raise DomainError(f"period must be positive, got {period}")
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise DomainError("no samples")
    c, s = _harmonic(x, period)
    v = min(1.0, 2.0 * math.hypot(c.mean(), s.mean()))
    if x.size < 2 or n_boot == 0:
        return v, float("nan")
    rng = rng if rng is not None else np.random.Generator(np.random.Philox(0))
    boot = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, x.size, x.size)
        boot[b] = min(1.0, 2.0 * math.hypot(c[idx].mean(), s[idx].mean()))
    return v, float(boot.std(ddof=1))


def histogram(samples, period: float, origin: float, bins_per_period: int = BINS_PER_PERIOD):
    """Counts in bins of width ``period / bins_per_period`` aligned to ``origin``, covering every sample."""
    x = np.asarray(samples, dtype=float)
    width = period / bins_per_period
    k_lo = math.floor((x.min() - origin) / width)
    k_hi = math.floor((x.max() - origin) / width) + 1
    edges = origin + width * np.arange(k_lo, k_hi + 1)
    counts = np.bincount(np.floor((x - origin) / width).astype(np.int64) - k_lo, minlength=k_hi - k_lo)
    return edges, counts[: k_hi - k_lo]


@dataclass(frozen=True, eq=False)
class VisibilityCurve:
    Lambda: np.ndarray  # 0 followed by increasing positive values
    V: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.V) >= 0):
            raise DomainError("V(Lambda) must be strictly decreasing over the search bracket")

    def invert(self, v: float) -> float:
        """Lambda with V(Lambda) = v; log-linear between positive nodes, linear from Lambda = 0."""
        V, L = self.V, self.Lambda
        if v >= V[0]:
            return 0.0
        if v <= V[-1]:
            return math.inf
        j = int(np.searchsorted(-V, -v))  # V[j-1] > v >= V[j]
        u = (V[j - 1] - v) / (V[j - 1] - V[j])
        if L[j - 1] == 0.0:
            return u * L[j]
        return float(math.exp(math.log(L[j - 1]) + u * math.log(L[j] / L[j - 1])))


def visibility_curve(plan: ExperimentPlan, Lambdas=None) -> VisibilityCurve:
    """Analytic V(Lambda) at the plan's detector resolution.

    The default bracket stops where V falls to 1e-6 of V(0), beyond which the
    curve is numerically flat and no longer strictly decreasing.
    """
    if Lambdas is None:
        Lambdas = np.concatenate(([0.0], np.geomspace(1e8, 1e17, 361)))
    blur = math.hypot(plan.resolution, plan.sigma_detect)
    V = np.array(
        [itf.visibility(plan.mass, plan.grating, plan.timing, plan.state, L, plan.mode, blur) for L in Lambdas]
    )
    keep = V > 1e-6 * V[0]
    return VisibilityCurve(np.asarray(Lambdas, dtype=float)[keep], V[keep])


def estimate_lambda_from_visibility(v_measured: float, err: float, curve: VisibilityCurve) -> LambdaInterval:
    """Lambda interval whose forward images cover ``[v - err, v + err]``."""
    if not err >= 0:
        raise DomainError(f"err must be non-negative, got {err}")
    if v_measured > curve.V[0]:
        flag = "above_range"
    elif v_measured < curve.V[-1]:
        flag = "below_range"
    else:
        flag = "ok"
    return LambdaInterval(
        curve.invert(v_measured + err),
        curve.invert(v_measured),
        curve.invert(v_measured - err),
        flag,
    )


def z_for_confidence(confidence: float) -> float:
    """Two-sided normal quantile, e.g. 2.576 for 0.99."""
    if not 0 < confidence < 1:
        raise DomainError(f"confidence must lie in (0, 1), got {confidence}")
    return NormalDist().inv_cdf(0.5 + 0.5 * confidence)


def reconstruct(
    plan: ExperimentPlan,
    curve: VisibilityCurve | None = None,
    confidence: float | None = None,
    sampler: PatternSampler | None = None,
) -> ReconstructionResult:
    """Run one synthetic experiment end to end.

    With ``curve`` and ``confidence`` the result carries a Lambda interval
    from the visibility estimate with ``z * stderr`` error bars.
    """
    sampler = sampler or PatternSampler(pattern_for(plan))
    rng_sample, rng_boot = streams(plan.seed)
    x = sampler(rng_sample, plan.N, plan.sigma_detect)
    v, se = estimate_visibility(x, sampler.period, rng_boot)
    edges, counts = histogram(x, sampler.period, sampler.grid[0], plan.bins_per_period)
    interval = None
    if curve is not None and confidence is not None:
        half_width = z_for_confidence(confidence) * (se if math.isfinite(se) else 0.0)
        interval = estimate_lambda_from_visibility(v, half_width, curve)
    return ReconstructionResult(edges, counts, v, se, sampler.period, plan.seed, GENERATOR_ID, interval)


@dataclass(frozen=True)
class CoverageReport:
    repetitions: int
    covered: int
    confidence: float
    Lambda_true: float
    intervals: tuple

    @property
    def fraction(self) -> float:
        return self.covered / self.repetitions


def coverage(plan: ExperimentPlan, repetitions: int = 100, confidence: float = 0.99) -> CoverageReport:
    """Repeat the experiment with seeds ``plan.seed + i`` and count intervals containing ``Lambda_true``."""
    if repetitions < 1:
        raise DomainError("repetitions must be >= 1")
    sampler = PatternSampler(pattern_for(plan))
    curve = visibility_curve(plan)
    intervals = []
    for i in range(repetitions):
        rep = ExperimentPlan(**{**plan.__dict__, "seed": (plan.seed + i) % 2**64})
        intervals.append(reconstruct(rep, curve, confidence, sampler).lambda_interval)
    covered = sum(iv.lower <= plan.Lambda_true <= iv.upper for iv in intervals)
    return CoverageReport(repetitions, covered, confidence, plan.Lambda_true, tuple(intervals))
