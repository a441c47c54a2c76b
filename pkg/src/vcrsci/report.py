"""Tables behind the command-line outputs.

Every number here comes straight from a library call; formatting only
rounds for display. Machine formats (CSV, JSON) carry full precision.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Iterable, Sequence

from .classify import AdvantageVerdict, outcome_for, verdict
from .errors import InsufficientData, NoData, SingularDesign, UndefinedDenominator
from .indices import Period, Smoothing, VcrSeries, rsi, vcr_point, vcr_series
from .model import ALL_NODE, Level, Measure, Panel, TaxonomyNode, aggregate
from .trend import Model, Significance, TrendFit, fit

FORMATS = ("text", "csv", "json", "markdown")


def latest_period(panel: Panel, smoothing: Smoothing | str) -> Period:
    smoothing = Smoothing.parse(smoothing)
    end = panel.coverage[1]
    return Period(end - 2, end) if smoothing is Smoothing.TRIENNIAL else Period(end, end)


def resolve_period(panel: Panel, smoothing: Smoothing | str, period: str | Period | None) -> Period:
    """A single year under triennial smoothing means the window ending that year."""
    smoothing = Smoothing.parse(smoothing)
    if period is None:
        return latest_period(panel, smoothing)
    p = Period.parse(period) if isinstance(period, str) else period
    if smoothing is Smoothing.TRIENNIAL and p.start == p.end:
        p = Period(p.end - 2, p.end)
    lo, hi = panel.coverage
    if p.start < lo or p.end > hi:
        raise ValueError(f"period {p} outside panel coverage {lo}-{hi}")
    return p


def nodes_at(panel: Panel, level: Level | str) -> list[TaxonomyNode]:
    return panel.taxonomy.at_level(level)


# -- indices ------------------------------------------------------------------

@dataclass(frozen=True)
class IndicesRow:
    node: str
    path: str
    period: str
    measure: str
    world_share_pct: float | None
    focal_share_pct: float | None
    vcr: float | None
    rsi: float | None
    focal_in_node: int | None
    focal_total: int | None
    baseline_in_node: int | None
    baseline_total: int | None
    flag: str = ""


def indices_table(
    panel: Panel,
    entity: str,
    measure: Measure | str = Measure.DOCUMENTS,
    level: Level | str = Level.BIG_AREA,
    smoothing: Smoothing | str = Smoothing.TRIENNIAL,
    period: str | Period | None = None,
    citable: bool = False,
) -> list[IndicesRow]:
    measure = Measure.parse(measure)
    p = resolve_period(panel, smoothing, period)
    rows = []
    for node in nodes_at(panel, level):
        path = " / ".join(panel.taxonomy.path(node.id))
        try:
            pt = vcr_point(panel, entity, node.id, measure, p, citable)
        except (NoData, UndefinedDenominator) as exc:
            rows.append(IndicesRow(node.id, path, p.label, measure.value, None, None, None, None,
                                   None, None, None, None, flag=type(exc).__name__))
            continue
        rows.append(IndicesRow(
            node.id, path, p.label, measure.value,
            100.0 * pt.baseline_share, 100.0 * pt.focal_share, pt.value, rsi(pt.value),
            pt.focal_in_node, pt.focal_total, pt.baseline_in_node, pt.baseline_total,
        ))
    return rows


# -- trend --------------------------------------------------------------------

@dataclass(frozen=True)
class TrendRow:
    node: str
    path: str
    measure: str
    model: str
    n: int
    target_year: float | None
    projection: float | None
    se_projection: float | None
    ci_low: float | None
    ci_high: float | None
    p_value_vs_1: float | None
    stars: int | None
    significance: str
    beta0: float | None
    beta1: float | None
    residual_sd: float | None
    flag: str = ""


def node_fit(
    panel: Panel,
    entity: str,
    node: str,
    measure: Measure,
    target_year: float,
    alpha: float = 0.05,
    model: Model | str = Model.LINEAR,
    smoothing: Smoothing | str = Smoothing.ANNUAL,
    anchor: str = "end",
    citable: bool = False,
) -> tuple[VcrSeries | None, TrendFit | None, str]:
    """(series, fit, flag); fit is None when the node cannot be fitted."""
    try:
        series = vcr_series(panel, entity, node, measure, smoothing, citable)
    except InsufficientData:
        return None, None, "insufficient_data"
    try:
        f = fit(series, model, target_year, alpha=alpha, anchor=anchor)
    except (InsufficientData, SingularDesign):
        return series, None, "insufficient_data"
    flag = ",".join(f.flags)
    return series, f, flag


def _trend_row(panel, node_id, measure, model, series, f, flag) -> TrendRow:
    path = " / ".join(panel.taxonomy.path(node_id))
    if f is None:
        return TrendRow(node_id, path, measure.value, Model.parse(model).value,
                        0 if series is None else len(series), None, None, None, None, None,
                        None, None, "inconclusive", None, None, None, flag)
    outcome = outcome_for(f)
    stars = f.stars
    if outcome is None:
        # too short for a verdict: keep the estimates, drop the significance marks
        outcome, stars = Significance.INCONCLUSIVE, None
        flag = ",".join(x for x in (flag, "insufficient_data") if x)
    return TrendRow(
        node_id, path, measure.value, f.model.value, f.n, f.target_year, f.projection,
        f.se_projection, f.ci_low, f.ci_high, f.p_value_vs_1, stars,
        outcome.value, f.beta0, f.beta1, f.residual_sd, flag,
    )


def trend_table(
    panel: Panel,
    entity: str,
    measure: Measure | str = Measure.DOCUMENTS,
    level: Level | str = Level.BIG_AREA,
    target_year: float | None = None,
    alpha: float = 0.05,
    model: Model | str = Model.LINEAR,
    smoothing: Smoothing | str = Smoothing.ANNUAL,
    anchor: str = "end",
    citable: bool = False,
) -> tuple[list[TrendRow], list[dict[str, Any]]]:
    """Per-node fits plus long-format band data (one row per observed period)."""
    measure = Measure.parse(measure)
    target = panel.coverage[1] if target_year is None else target_year
    rows, plot = [], []
    for node in nodes_at(panel, level):
        series, f, flag = node_fit(panel, entity, node.id, measure, target, alpha, model,
                                   smoothing, anchor, citable)
        rows.append(_trend_row(panel, node.id, measure, model, series, f, flag))
        if f is None:
            continue
        for t, pt in zip(series.times(anchor), series.points):
            fitted, _, lo, hi = f.mean_response(t)
            plot.append({"node": node.id, "measure": measure.value, "period": pt.period.label,
                         "year": t, "vcr": pt.value, "fitted": fitted, "ci_low": lo, "ci_high": hi})
    return rows, plot


# -- classification -------------------------------------------------------------

@dataclass(frozen=True)
class ClassifyRow:
    node: str
    path: str
    bucket: str
    docs_outcome: str
    cites_outcome: str
    docs_projection: float | None
    docs_ci_low: float | None
    docs_ci_high: float | None
    cites_projection: float | None
    cites_ci_low: float | None
    cites_ci_high: float | None
    flags: str = ""


def verdicts(
    panel: Panel,
    entity: str,
    level: Level | str = Level.AREA,
    target_year: float | None = None,
    alpha: float = 0.05,
    model: Model | str = Model.LINEAR,
    smoothing: Smoothing | str = Smoothing.ANNUAL,
    anchor: str = "end",
    citable: bool = False,
) -> list[AdvantageVerdict]:
    """Verdicts ordered top to bottom: bucket, then documents projection descending."""
    target = panel.coverage[1] if target_year is None else target_year
    out = []
    for node in nodes_at(panel, level):
        fits = [
            node_fit(panel, entity, node.id, m, target, alpha, model, smoothing, anchor, citable)[1]
            for m in (Measure.DOCUMENTS, Measure.CITATIONS)
        ]
        out.append(verdict(node.id, *fits))

    def key(v: AdvantageVerdict):
        proj = v.docs_fit.projection if v.docs_fit is not None else -math.inf
        return (v.bucket.display_order, -proj, panel.taxonomy[v.node].name)

    return sorted(out, key=key)


def classify_table(panel: Panel, entity: str, **kwargs) -> list[ClassifyRow]:
    rows = []
    for v in verdicts(panel, entity, **kwargs):
        d, c = v.docs_fit, v.cites_fit
        rows.append(ClassifyRow(
            v.node, " / ".join(panel.taxonomy.path(v.node)), v.bucket.value,
            v.docs_outcome.value, v.cites_outcome.value,
            d and d.projection, d and d.ci_low, d and d.ci_high,
            c and c.projection, c and c.ci_low, c and c.ci_high,
            ",".join(v.flags),
        ))
    return rows


# -- full disciplinary report ---------------------------------------------------

def baseline_share_pct(panel: Panel, node: str, measure: Measure, period: Period,
                       citable: bool = False) -> float | None:
    """The node's percentage of baseline output, defined even where the focal entity is absent."""
    base = panel.baseline_entity
    part = aggregate(panel, base, node, measure, period.span, citable)
    total = aggregate(panel, base, ALL_NODE, measure, period.span, citable)
    if part is None or not total:
        return None
    return 100.0 * part / total


@dataclass(frozen=True)
class ReportRow:
    node: str
    level: str
    big_area: str
    area: str
    discipline: str
    world_share_pct_docs: float | None
    vcr_trienio_docs: float | None
    vcr_regression_docs: float | None
    stars_docs: int | None
    world_share_pct_cites: float | None
    vcr_trienio_cites: float | None
    vcr_regression_cites: float | None
    stars_cites: int | None
    bucket: str
    flags: str = ""


def report_table(
    panel: Panel,
    entity: str,
    target_year: float | None = None,
    alpha: float = 0.05,
    smoothing: Smoothing | str = Smoothing.ANNUAL,
    anchor: str = "end",
    citable: bool = False,
) -> list[ReportRow]:
    """One row per taxonomy node in taxonomy order with point and trend estimates."""
    target = panel.coverage[1] if target_year is None else target_year
    window = latest_period(panel, Smoothing.TRIENNIAL)
    rows = []
    for node in panel.taxonomy.ordered():
        per_measure = {}
        fits = {}
        for m in (Measure.DOCUMENTS, Measure.CITATIONS):
            share = baseline_share_pct(panel, node.id, m, window, citable)
            try:
                point = vcr_point(panel, entity, node.id, m, window, citable).value
            except (NoData, UndefinedDenominator):
                point = None
            _, f, _ = node_fit(panel, entity, node.id, m, target, alpha, Model.LINEAR,
                               smoothing, anchor, citable)
            fits[m] = f
            stars = f.stars if outcome_for(f) is not None else None
            per_measure[m] = (share, point, f and f.projection, stars)
        v = verdict(node.id, fits[Measure.DOCUMENTS], fits[Measure.CITATIONS])
        path = panel.taxonomy.path(node.id) + ("",) * 3
        rows.append(ReportRow(node.id, node.level.value, *path[:3],
                              *per_measure[Measure.DOCUMENTS], *per_measure[Measure.CITATIONS],
                              v.bucket.value, ",".join(v.flags)))
    return rows


# -- formatting -------------------------------------------------------------------

def _records(rows: Sequence[Any]) -> tuple[list[str], list[dict[str, Any]]]:
    if not rows:
        return [], []
    if isinstance(rows[0], dict):
        return list(rows[0].keys()), list(rows)
    names = [f.name for f in fields(rows[0])]
    return names, [asdict(r) for r in rows]


def _machine(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(rows: Sequence[Any]) -> str:
    names, recs = _records(rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for r in recs:
        writer.writerow([_machine(r[n]) for n in names])
    return buf.getvalue()


def to_json(rows: Sequence[Any]) -> str:
    _, recs = _records(rows)
    clean = [{k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in r.items()}
             for r in recs]
    return json.dumps(clean, ensure_ascii=False, indent=2) + "\n"


_PCT_FIELDS = ("world_share_pct", "focal_share_pct", "world_share_pct_docs", "world_share_pct_cites")
_ONE_DECIMAL_PREFIXES = ("vcr", "rsi", "projection", "docs_projection", "cites_projection")


def display(name: str, value: Any) -> str:
    """Rounded cell text for human-facing tables."""
    if value is None:
        return ""
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        if name in _PCT_FIELDS:
            if value != 0 and abs(value) < 0.1:
                return f"{value:.1g}%"
            return f"{value:.1f}%"
        if name.startswith("p_value"):
            return f"{value:.4f}"
        if name.startswith(_ONE_DECIMAL_PREFIXES) or "vcr" in name or "ci_" in name:
            return f"{value:.1f}"
        return f"{value:.4g}"
    if name.startswith("stars"):
        return "*" * int(value)
    return str(value)


def to_markdown(rows: Sequence[Any], columns: Sequence[str] | None = None) -> str:
    names, recs = _records(rows)
    names = list(columns) if columns else names
    lines = ["| " + " | ".join(names) + " |", "|" + "|".join("---" for _ in names) + "|"]
    for r in recs:
        lines.append("| " + " | ".join(display(n, r[n]).replace("|", "\\|") for n in names) + " |")
    return "\n".join(lines) + "\n"


def to_text(rows: Sequence[Any], columns: Sequence[str] | None = None) -> str:
    names, recs = _records(rows)
    names = list(columns) if columns else names
    cells = [[display(n, r[n]) for n in names] for r in recs]
    widths = [max([len(n)] + [len(c[i]) for c in cells]) for i, n in enumerate(names)]
    out = ["  ".join(n.ljust(w) for n, w in zip(names, widths)).rstrip()]
    for c in cells:
        out.append("  ".join(v.ljust(w) for v, w in zip(c, widths)).rstrip())
    return "\n".join(out) + "\n"


def render(rows: Sequence[Any], fmt: str, columns: Sequence[str] | None = None) -> str:
    if fmt == "csv":
        return to_csv(rows)
    if fmt == "json":
        return to_json(rows)
    if fmt == "markdown":
        return to_markdown(rows, columns)
    if fmt == "text":
        return to_text(rows, columns)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def classification_grid(rows: Iterable[ClassifyRow]) -> str:
    """Three-column summary: advantage, inconclusive, disadvantage; D = documents, C = citations."""
    columns = {"above": 0, "inconclusive": 1, "below": 2}
    table = []
    for r in rows:
        slots = [[], [], []]
        slots[columns[r.docs_outcome]].append("D")
        slots[columns[r.cites_outcome]].append("C")
        name = r.path.split(" / ")[-1] + (" (!)" if r.flags else "")
        table.append((name, [" ".join(s) for s in slots], r.bucket))
    head = ("node", "advantage", "inconclusive", "disadvantage", "bucket")
    width = max([len(head[0])] + [len(t[0]) for t in table])
    lines = [f"{head[0]:<{width}}  {head[1]:^10}  {head[2]:^12}  {head[3]:^12}  {head[4]}"]
    for name, slots, bucket in table:
        lines.append(f"{name:<{width}}  {slots[0]:^10}  {slots[1]:^12}  {slots[2]:^12}  {bucket}")
    return "\n".join(lines) + "\n"
