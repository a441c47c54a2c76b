"""Monte Carlo checks of the trend-inference machinery.

Synthetic VCR series follow ``beta0 + beta1 * t + noise``. Replication ``i``
draws its noise from a Philox counter-based stream keyed by
``base_seed + i``, turned into normals with the Box-Muller transform, so any
replication can be regenerated alone and results do not depend on how work
is split across threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DomainError
from .indices import Period, Smoothing, VcrPoint, VcrSeries
from .model import Measure
from .trend import TrendFit, fit_linear_values

NOISE_KINDS = ("gaussian", "t3")


@dataclass(frozen=True)
class SyntheticSpec:
    n_periods: int = 24
    beta0: float = 1.0
    beta1: float = 0.02
    noise_sd: float = 0.1
    target_year: float | None = None
    replications: int = 10_000
    base_seed: int = 0
    first_year: int = 1
    alpha: float = 0.05
    noise: str = "gaussian"

    def __post_init__(self):
        if self.n_periods < 3:
            raise DomainError("n_periods must be at least 3")
        if self.noise_sd < 0 or not math.isfinite(self.noise_sd):
            raise DomainError("noise_sd must be a finite non-negative number")
        if self.replications < 1:
            raise DomainError("replications must be at least 1")
        if self.base_seed < 0:
            raise DomainError("base_seed must be non-negative")
        if self.noise not in NOISE_KINDS:
            raise DomainError(f"noise must be one of {NOISE_KINDS}")

    @property
    def years(self) -> np.ndarray:
        return np.arange(self.first_year, self.first_year + self.n_periods, dtype=float)

    @property
    def target(self) -> float:
        return float(self.years[-1]) if self.target_year is None else float(self.target_year)

    @property
    def true_target_value(self) -> float:
        return self.beta0 + self.beta1 * self.target


def normal_stream(seed: int, size: int) -> np.ndarray:
    """``size`` standard normals from the Philox stream keyed by ``seed``."""
    pairs = (size + 1) // 2
    bits = np.random.Philox(key=seed)
    u = np.random.Generator(bits).random(2 * pairs)
    u1 = 1.0 - u[:pairs]  # (0, 1]; log stays finite
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u[pairs:]
    return np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:size]


def noise(spec: SyntheticSpec, replication_index: int) -> np.ndarray:
    n = spec.n_periods
    seed = spec.base_seed + replication_index
    if spec.noise == "gaussian":
        return spec.noise_sd * normal_stream(seed, n)
    # Student t with 3 df, rescaled to unit variance before applying noise_sd
    z = normal_stream(seed, 4 * n).reshape(4, n)
    chi2 = (z[1:] ** 2).sum(axis=0)
    return spec.noise_sd * z[0] / np.sqrt(chi2 / 3.0) / math.sqrt(3.0)


def generate_values(spec: SyntheticSpec, replication_index: int) -> np.ndarray:
    return spec.beta0 + spec.beta1 * spec.years + noise(spec, replication_index)


def generate_series(spec: SyntheticSpec, replication_index: int) -> VcrSeries:
    """Deterministic synthetic annual series for one replication. Values are not clamped."""
    values = generate_values(spec, replication_index)
    node = f"synthetic:{replication_index}"
    points = tuple(
        VcrPoint("synthetic", node, Measure.DOCUMENTS, Period(int(t), int(t)), float(v))
        for t, v in zip(spec.years, values)
    )
    return VcrSeries("synthetic", node, Measure.DOCUMENTS, points, Smoothing.ANNUAL)


def fit_replication(spec: SyntheticSpec, replication_index: int, null_value: float = 1.0) -> TrendFit:
    return fit_linear_values(spec.years, generate_values(spec, replication_index),
                             spec.target, alpha=spec.alpha, null_value=null_value)


def covers(fit: TrendFit, truth: float) -> bool:
    # zero-width intervals from noiseless data sit on the truth up to rounding
    slack = 1e-9 * max(1.0, abs(truth)) if fit.degenerate else 0.0
    return fit.ci_low - slack <= truth <= fit.ci_high + slack


@dataclass(frozen=True)
class ReplicationResult:
    index: int
    projection: float
    se_projection: float
    ci_low: float
    ci_high: float
    p_value: float
    covered: bool


@dataclass(frozen=True)
class CoverageResult:
    spec: SyntheticSpec
    hits: int
    replications: tuple[ReplicationResult, ...]

    @property
    def coverage(self) -> float:
        return self.hits / self.spec.replications

    @property
    def mc_standard_error(self) -> float:
        p = self.coverage
        return math.sqrt(p * (1 - p) / self.spec.replications)

    def summary(self) -> str:
        s = self.spec
        return (
            f"coverage={self.coverage:.4f} hits={self.hits} replications={s.replications}"
            f" n={s.n_periods} level={1 - s.alpha:.2f} noise={s.noise} noise_sd={s.noise_sd:g}"
            f" beta0={s.beta0:g} beta1={s.beta1:g} target={s.target:g} seed={s.base_seed}"
            f" mc_se={self.mc_standard_error:.4f}"
        )


def _run_chunk(spec: SyntheticSpec, indices: range) -> list[ReplicationResult]:
    truth = spec.true_target_value
    out = []
    for i in indices:
        f = fit_replication(spec, i)
        out.append(ReplicationResult(i, f.projection, f.se_projection, f.ci_low, f.ci_high,
                                     f.p_value_vs_1, covers(f, truth)))
    return out


def _chunks(total: int, parts: int) -> list[range]:
    parts = max(1, min(parts, total))
    bounds = [total * k // parts for k in range(parts + 1)]
    return [range(bounds[k], bounds[k + 1]) for k in range(parts)]


def run_replications(spec: SyntheticSpec, threads: int = 1) -> list[ReplicationResult]:
    chunks = _chunks(spec.replications, threads)
    if len(chunks) == 1:
        return _run_chunk(spec, chunks[0])
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        parts = list(pool.map(lambda r: _run_chunk(spec, r), chunks))
    return [res for part in parts for res in part]


def coverage_experiment(spec: SyntheticSpec, threads: int = 1) -> CoverageResult:
    """Share of replications whose interval at the target contains the true mean response."""
    results = run_replications(spec, threads)
    return CoverageResult(spec, sum(r.covered for r in results), tuple(results))


def rejection_rate(spec: SyntheticSpec, null_value: float = 1.0, threads: int = 1) -> float:
    results = run_replications(spec, threads)
    return sum(r.p_value < spec.alpha for r in results) / spec.replications


def power_curve(spec: SyntheticSpec, true_values: Sequence[float], null_value: float = 1.0,
                threads: int = 1) -> list[tuple[float, float]]:
    """Rejection rate of ``VCR_T = null`` as the true value at the target moves.

    Every grid point reuses the same seeds, so differences between points come
    from the shift alone.
    """
    out = []
    for value in true_values:
        shifted = replace(spec, beta0=value - spec.beta1 * spec.target)
        out.append((float(value), rejection_rate(shifted, null_value, threads)))
    return out
