"""Descriptive indices over the panel.

Revealed comparative advantage (Balassa) is the ratio between a node's share
of the focal entity's output and the same node's share of the baseline's
output. Values above 1 mean the focal entity is relatively specialised in
the node.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import (
    DomainError,
    InconsistentPanel,
    InsufficientData,
    NoData,
    NonContiguous,
    UndefinedBase,
    UndefinedDenominator,
)
from .model import ALL_NODE, Measure, Panel, aggregate


class Smoothing(enum.Enum):
    ANNUAL = "annual"
    TRIENNIAL = "triennial"

    @classmethod
    def parse(cls, text: str | Smoothing) -> Smoothing:
        if isinstance(text, Smoothing):
            return text
        key = text.strip().lower()
        if key in ("triennial_moving", "triennialmoving", "trienio"):
            key = "triennial"
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown smoothing {text!r}; expected annual or triennial") from None


@dataclass(frozen=True, order=True)
class Period:
    """Inclusive calendar-year window."""

    start: int
    end: int

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"period ends before it starts: {self.start}-{self.end}")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def label(self) -> str:
        return str(self.start) if self.start == self.end else f"{self.start}-{self.end}"

    @classmethod
    def parse(cls, text: str) -> Period:
        parts = text.replace("..", "-").split("-")
        if len(parts) == 1:
            return cls(int(parts[0]), int(parts[0]))
        if len(parts) == 2:
            return cls(int(parts[0]), int(parts[1]))
        raise ValueError(f"cannot parse period {text!r}")

    def __str__(self):
        return self.label


# -- scalar indices ---------------------------------------------------------

def vcr(focal_in_node: float, focal_total: float, baseline_in_node: float, baseline_total: float) -> float:
    """Revealed comparative advantage of one node.

    ``(focal_in_node / focal_total) / (baseline_in_node / baseline_total)``,
    which is the same number as the focal entity's share of the node divided
    by its share of everything.
    """
    if focal_total <= 0 or baseline_total <= 0:
        raise UndefinedDenominator("focal and baseline totals must be positive")
    if focal_in_node < 0 or baseline_in_node < 0:
        raise DomainError("counts must be non-negative")
    if baseline_in_node == 0:
        if focal_in_node > 0:
            raise InconsistentPanel("focal output in a node where the baseline has none")
        raise NoData("no baseline output in node")
    return (focal_in_node / focal_total) / (baseline_in_node / baseline_total)


def rsi(vcr_value: float) -> float:
    """Relative specialisation index ``(v - 1) / (v + 1)``, bounded in [-1, 1)."""
    if not math.isfinite(vcr_value) or vcr_value < 0:
        raise DomainError(f"RSI needs a finite non-negative VCR, got {vcr_value!r}")
    return (vcr_value - 1.0) / (vcr_value + 1.0)


def participation_per_thousand(focal: float, baseline: float) -> float:
    if baseline <= 0:
        raise UndefinedDenominator("baseline output must be positive")
    return 1000.0 * focal / baseline


def relative_citation_index(
    focal_cites: float, focal_docs: float, comparison_cites: float, comparison_docs: float
) -> float:
    """Citations per document of the focal entity over that of the comparison set."""
    if focal_docs <= 0 or comparison_docs <= 0 or comparison_cites <= 0:
        raise UndefinedDenominator("documents and comparison citations must be positive")
    if focal_cites < 0:
        raise DomainError("citations must be non-negative")
    return (focal_cites / focal_docs) / (comparison_cites / comparison_docs)


def annualized_growth(first: float, last: float, span_years: int) -> float:
    """Compound annual growth rate between two observations ``span_years`` apart."""
    if first <= 0 or last <= 0:
        raise DomainError("growth needs positive endpoints")
    if span_years < 1:
        raise DomainError("span must be at least one year")
    return (last / first) ** (1.0 / span_years) - 1.0


def series_growth(annual: Sequence[tuple[int, float]], triennial: bool = False) -> float:
    """CAGR between the first and last points of an annual series.

    With ``triennial=True`` the endpoints are the first and last moving
    three-year sums and the span is the distance between window ends, the
    other plausible reading of a growth figure quoted on smoothed data.
    """
    points = list(triennial_series(annual)) if triennial else _check_contiguous(annual, 2)
    (first_key, first), (last_key, last) = points[0], points[-1]
    first_year = first_key.end if triennial else first_key
    last_year = last_key.end if triennial else last_key
    return annualized_growth(first, last, last_year - first_year)


def _check_contiguous(annual: Iterable[tuple[int, float]], minimum: int) -> list[tuple[int, float]]:
    pairs = sorted((int(y), c) for y, c in annual)
    if len(pairs) < minimum:
        raise InsufficientData(f"need at least {minimum} years, got {len(pairs)}")
    for (y0, _), (y1, _) in zip(pairs, pairs[1:]):
        if y1 != y0 + 1:
            raise NonContiguous(f"gap between {y0} and {y1}")
    return pairs


def triennial_series(annual: Iterable[tuple[int, float]]) -> list[tuple[Period, float]]:
    """Moving three-year sums; the window starting at ``y`` covers ``y..y+2``."""
    pairs = _check_contiguous(annual, 3)
    return [
        (Period(pairs[i][0], pairs[i][0] + 2), pairs[i][1] + pairs[i + 1][1] + pairs[i + 2][1])
        for i in range(len(pairs) - 2)
    ]


def indexed_series(values: Sequence[float], base: int = 0) -> list[float]:
    """Rescale so that ``values[base]`` maps to 100."""
    try:
        ref = values[base]
    except IndexError:
        raise UndefinedBase(f"base position {base} not in series of length {len(values)}") from None
    if ref == 0:
        raise UndefinedBase("base value is zero")
    return [100.0 if i == base else 100.0 * v / ref for i, v in enumerate(values)]


# -- panel series -------------------------------------------------------------

@dataclass(frozen=True)
class VcrPoint:
    entity: str
    node: str
    measure: Measure
    period: Period
    value: float
    focal_in_node: int | None = None
    focal_total: int | None = None
    baseline_in_node: int | None = None
    baseline_total: int | None = None

    @property
    def focal_share(self) -> float:
        return self.focal_in_node / self.focal_total

    @property
    def baseline_share(self) -> float:
        return self.baseline_in_node / self.baseline_total

    @property
    def rsi(self) -> float:
        return rsi(self.value)


@dataclass(frozen=True)
class VcrSeries:
    entity: str
    node: str
    measure: Measure
    points: tuple[VcrPoint, ...]
    smoothing: Smoothing = Smoothing.ANNUAL
    skipped: tuple[Period, ...] = field(default=(), compare=False)

    def __post_init__(self):
        periods = [p.period for p in self.points]
        if any(b <= a for a, b in zip(periods, periods[1:])):
            raise ValueError("series periods must be strictly increasing")

    def __len__(self):
        return len(self.points)

    @property
    def values(self) -> list[float]:
        return [p.value for p in self.points]

    def times(self, anchor: str = "end") -> list[int]:
        """Regressor values: window end year (default) or start year."""
        if anchor not in ("end", "start"):
            raise ValueError(f"anchor must be 'end' or 'start', not {anchor!r}")
        return [p.period.end if anchor == "end" else p.period.start for p in self.points]


def periods_for(panel: Panel, smoothing: Smoothing | str, within: tuple[int, int] | None = None) -> list[Period]:
    smoothing = Smoothing.parse(smoothing)
    lo, hi = within or panel.coverage
    if smoothing is Smoothing.ANNUAL:
        return [Period(y, y) for y in range(lo, hi + 1)]
    return [Period(y, y + 2) for y in range(lo, hi - 1)]


def vcr_point(
    panel: Panel, entity: str, node: str, measure: Measure, period: Period, citable: bool = False
) -> VcrPoint:
    """VCR for one period; raises NoData/UndefinedDenominator when undefined."""
    base = panel.baseline_entity
    counts = [
        aggregate(panel, who, where, measure, period.span, citable)
        for who, where in ((entity, node), (entity, ALL_NODE), (base, node), (base, ALL_NODE))
    ]
    focal_in_node, focal_total, baseline_in_node, baseline_total = counts
    if focal_total is None or baseline_total is None:
        raise UndefinedDenominator(f"no all-fields totals for {period}")
    if baseline_in_node is None or focal_in_node is None:
        raise NoData(f"{entity}/{node} absent in {period}")
    value = vcr(focal_in_node, focal_total, baseline_in_node, baseline_total)
    return VcrPoint(entity, node, measure, period, value, focal_in_node, focal_total,
                    baseline_in_node, baseline_total)


def vcr_series(
    panel: Panel,
    entity: str,
    node: str,
    measure: Measure | str,
    smoothing: Smoothing | str = Smoothing.ANNUAL,
    citable: bool = False,
    within: tuple[int, int] | None = None,
) -> VcrSeries:
    """One VCR point per period; undefined periods are dropped, never zero-filled."""
    measure = Measure.parse(measure)
    smoothing = Smoothing.parse(smoothing)
    points, skipped = [], []
    for period in periods_for(panel, smoothing, within):
        try:
            points.append(vcr_point(panel, entity, node, measure, period, citable))
        except (NoData, UndefinedDenominator):
            skipped.append(period)
    if not points:
        raise InsufficientData(f"no computable VCR periods for {entity}/{node}/{measure.value}")
    return VcrSeries(entity, node, measure, tuple(points), smoothing, tuple(skipped))


def _annual_counts(panel: Panel, entity: str, node: str, measure: Measure, citable: bool = False):
    return [
        (year, aggregate(panel, entity, node, measure, year, citable))
        for year in panel.years
    ]


def rci_series(
    panel: Panel,
    entity: str,
    node: str = ALL_NODE,
    smoothing: Smoothing | str = Smoothing.TRIENNIAL,
    rest_of_baseline: bool = True,
) -> list[tuple[Period, float]]:
    """Relative citation index per period.

    The comparison set defaults to the baseline minus the focal entity; pass
    ``rest_of_baseline=False`` to compare against the whole baseline.
    """
    out = []
    for period in periods_for(panel, smoothing):
        fc = aggregate(panel, entity, node, Measure.CITATIONS, period.span)
        fd = aggregate(panel, entity, node, Measure.DOCUMENTS, period.span)
        bc = aggregate(panel, panel.baseline_entity, node, Measure.CITATIONS, period.span)
        bd = aggregate(panel, panel.baseline_entity, node, Measure.DOCUMENTS, period.span)
        if None in (fc, fd, bc, bd):
            continue
        if rest_of_baseline:
            bc, bd = bc - fc, bd - fd
        try:
            out.append((period, relative_citation_index(fc, fd, bc, bd)))
        except UndefinedDenominator:
            continue
    return out


def participation_series(
    panel: Panel,
    entity: str,
    node: str = ALL_NODE,
    measure: Measure | str = Measure.DOCUMENTS,
    smoothing: Smoothing | str = Smoothing.TRIENNIAL,
) -> list[tuple[Period, float]]:
    """Focal output per 1,000 baseline units, per period."""
    measure = Measure.parse(measure)
    out = []
    for period in periods_for(panel, smoothing):
        focal = aggregate(panel, entity, node, measure, period.span)
        base = aggregate(panel, panel.baseline_entity, node, measure, period.span)
        if focal is None or not base:
            continue
        out.append((period, participation_per_thousand(focal, base)))
    return out


def growth_index_series(
    panel: Panel,
    entity: str,
    node: str = ALL_NODE,
    measure: Measure | str = Measure.DOCUMENTS,
) -> list[tuple[Period, float]]:
    """Triennial moving sums indexed so the first window equals 100."""
    measure = Measure.parse(measure)
    annual = [(y, c) for y, c in _annual_counts(panel, entity, node, measure) if c is not None]
    windows = triennial_series(annual)
    scaled = indexed_series([c for _, c in windows])
    return [(p, v) for (p, _), v in zip(windows, scaled)]
