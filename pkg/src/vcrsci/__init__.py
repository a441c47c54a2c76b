"""Revealed comparative advantage indices and trend tests for bibliometric panels."""

__version__ = "0.1.0"

from .classify import AdvantageVerdict, Bucket, combine
from .indices import (
    Period,
    Smoothing,
    VcrPoint,
    VcrSeries,
    annualized_growth,
    indexed_series,
    participation_per_thousand,
    relative_citation_index,
    rsi,
    triennial_series,
    vcr,
    vcr_series,
)
from .io import adapt_scimago, load_panel, parse_canonical, save_panel
from .model import ALL_NODE, Level, Measure, Panel, PanelRecord, Taxonomy, TaxonomyNode, aggregate
from .trend import Model, Significance, TrendFit, classify_significance, fit_constant, fit_linear
