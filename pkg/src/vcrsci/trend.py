"""Trend inference on VCR time series.

Each observed VCR is modelled as a latent level plus i.i.d. Gaussian noise.
Two level models are supported: a constant mean (one-sample t-test against
the null value) and a linear trend fitted by ordinary least squares, whose
mean response at a target year is tested against the null.

The confidence interval reported at the target is for the mean response
(the fitted line), not a prediction interval for a new observation. Serial
correlation of the errors is ignored; moving-window series are correlated
by construction, so treat their intervals as optimistic.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

from . import studentt
from .errors import DomainError, InsufficientData, SingularDesign
from .indices import VcrSeries

STAR_LEVELS = (0.01, 0.05, 0.10)
MIN_VERDICT_PERIODS = 5


class Model(enum.Enum):
    CONSTANT = "constant"
    LINEAR = "linear"

    @classmethod
    def parse(cls, text: str | Model) -> Model:
        if isinstance(text, Model):
            return text
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown model {text!r}; expected constant or linear") from None


class Significance(enum.Enum):
    ABOVE = "above"
    INCONCLUSIVE = "inconclusive"
    BELOW = "below"

    @property
    def rank(self) -> int:
        return {"below": -1, "inconclusive": 0, "above": 1}[self.value]


def stars_for(p_value: float) -> int:
    """0 to 3 stars for p below 10%, 5% and 1%."""
    return sum(p_value < level for level in STAR_LEVELS)


@dataclass(frozen=True)
class TrendFit:
    model: Model
    n: int
    beta0: float
    beta1: float | None
    residual_sd: float
    t_center: float | None
    sxx: float | None
    target_year: float | None
    projection: float
    se_projection: float
    alpha: float
    ci_low: float
    ci_high: float
    null_value: float
    t_stat: float
    p_value_vs_1: float
    stars: int
    degenerate: bool = False
    flags: tuple[str, ...] = field(default=())

    @property
    def df(self) -> int:
        return self.n - (2 if self.model is Model.LINEAR else 1)

    @property
    def critical_value(self) -> float:
        return studentt.quantile(1.0 - self.alpha / 2.0, self.df)

    def mean_response(self, t: float) -> tuple[float, float, float, float]:
        """(fitted value, standard error, ci_low, ci_high) at time ``t``."""
        if self.model is Model.CONSTANT:
            return (self.projection, self.se_projection, self.ci_low, self.ci_high)
        value = self.beta0 + self.beta1 * t
        se = self.residual_sd * math.sqrt(1.0 / self.n + (t - self.t_center) ** 2 / self.sxx)
        half = self.critical_value * se
        return (value, se, value - half, value + half)

    def at_level(self, alpha: float) -> TrendFit:
        """The same fit with the interval recomputed at another level."""
        _check_alpha(alpha)
        half = studentt.quantile(1.0 - alpha / 2.0, self.df) * self.se_projection
        return replace(self, alpha=alpha, ci_low=self.projection - half, ci_high=self.projection + half)


def _check_alpha(alpha: float):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0, 1), got {alpha!r}")


def _test(estimate: float, se: float, df: int, null_value: float, alpha: float):
    """Two-sided t-test and interval; handles the zero-variance case."""
    if se == 0.0:
        p = 1.0 if estimate == null_value else 0.0
        t_stat = 0.0 if estimate == null_value else math.copysign(math.inf, estimate - null_value)
        return t_stat, p, estimate, estimate
    t_stat = (estimate - null_value) / se
    p = studentt.two_sided_p(t_stat, df)
    half = studentt.quantile(1.0 - alpha / 2.0, df) * se
    return t_stat, p, estimate - half, estimate + half


def _is_exact(sse: float, values: Sequence[float]) -> bool:
    scale = max(1.0, max(abs(v) for v in values))
    return sse <= (64 * 2.2e-16 * scale) ** 2 * len(values)


def fit_constant_values(values: Sequence[float], null_value: float = 1.0, alpha: float = 0.05) -> TrendFit:
    _check_alpha(alpha)
    y = [float(v) for v in values]
    n = len(y)
    if n < 2:
        raise InsufficientData(f"constant model needs n >= 2, got {n}")
    mean = math.fsum(y) / n
    sse = math.fsum((v - mean) ** 2 for v in y)
    degenerate = _is_exact(sse, y)
    s = 0.0 if degenerate else math.sqrt(sse / (n - 1))
    se = s / math.sqrt(n)
    t_stat, p, lo, hi = _test(mean, se, n - 1, null_value, alpha)
    return TrendFit(
        model=Model.CONSTANT, n=n, beta0=mean, beta1=None, residual_sd=s,
        t_center=None, sxx=None, target_year=None, projection=mean,
        se_projection=se, alpha=alpha, ci_low=lo, ci_high=hi, null_value=null_value,
        t_stat=t_stat, p_value_vs_1=p, stars=stars_for(p), degenerate=degenerate,
        flags=("degenerate",) if degenerate else (),
    )


def fit_linear_values(
    times: Sequence[float],
    values: Sequence[float],
    target_year: float,
    alpha: float = 0.05,
    null_value: float = 1.0,
) -> TrendFit:
    """OLS of ``values`` on ``times`` and the mean response at ``target_year``."""
    _check_alpha(alpha)
    t = [float(v) for v in times]
    y = [float(v) for v in values]
    n = len(y)
    if len(t) != n:
        raise ValueError("times and values differ in length")
    if n < 3:
        raise InsufficientData(f"linear model needs n >= 3, got {n}")
    t_bar = math.fsum(t) / n
    y_bar = math.fsum(y) / n
    dt = [ti - t_bar for ti in t]
    sxx = math.fsum(d * d for d in dt)
    if sxx == 0.0:
        raise SingularDesign("all observations share the same time")
    sxy = math.fsum(d * (yi - y_bar) for d, yi in zip(dt, y))
    beta1 = sxy / sxx
    beta0 = y_bar - beta1 * t_bar
    # residuals written around the centroid keep precision with calendar years
    sse = math.fsum((yi - y_bar - beta1 * d) ** 2 for d, yi in zip(dt, y))
    degenerate = _is_exact(sse, y)
    s = 0.0 if degenerate else math.sqrt(sse / (n - 2))
    projection = y_bar + beta1 * (target_year - t_bar)
    se = s * math.sqrt(1.0 / n + (target_year - t_bar) ** 2 / sxx)
    t_stat, p, lo, hi = _test(projection, se, n - 2, null_value, alpha)
    return TrendFit(
        model=Model.LINEAR, n=n, beta0=beta0, beta1=beta1, residual_sd=s,
        t_center=t_bar, sxx=sxx, target_year=target_year, projection=projection,
        se_projection=se, alpha=alpha, ci_low=lo, ci_high=hi, null_value=null_value,
        t_stat=t_stat, p_value_vs_1=p, stars=stars_for(p), degenerate=degenerate,
        flags=("exact_fit",) if degenerate else (),
    )


def fit_constant(series: VcrSeries, null_value: float = 1.0, alpha: float = 0.05) -> TrendFit:
    """Sample mean of the series tested against ``null_value``."""
    return fit_constant_values(series.values, null_value=null_value, alpha=alpha)


def fit_linear(
    series: VcrSeries,
    target_year: float,
    alpha: float = 0.05,
    null_value: float = 1.0,
    anchor: str = "end",
) -> TrendFit:
    """Linear trend with the projection to ``target_year``.

    ``anchor`` picks the regressor for multi-year windows: the window's last
    year (default, so a projection to 2019 corresponds to 2017-2019) or its
    first year.
    """
    return fit_linear_values(series.times(anchor), series.values, target_year, alpha, null_value)


def fit(series: VcrSeries, model: Model | str, target_year: float, alpha: float = 0.05,
        null_value: float = 1.0, anchor: str = "end") -> TrendFit:
    model = Model.parse(model)
    if model is Model.CONSTANT:
        return fit_constant(series, null_value=null_value, alpha=alpha)
    return fit_linear(series, target_year, alpha=alpha, null_value=null_value, anchor=anchor)


def classify_significance(fit: TrendFit, null_value: float | None = None) -> Significance:
    """Above/below when the interval excludes the null value, else inconclusive."""
    null = fit.null_value if null_value is None else null_value
    if fit.ci_low > null:
        return Significance.ABOVE
    if fit.ci_high < null:
        return Significance.BELOW
    return Significance.INCONCLUSIVE
