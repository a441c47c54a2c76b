"""Joint documents + citations verdicts per taxonomy node."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .trend import MIN_VERDICT_PERIODS, Significance, TrendFit, classify_significance


class Bucket(enum.Enum):
    BOTH_ADVANTAGE = "both_advantage"
    ADVANTAGE_LEANING = "advantage_leaning"
    INCONCLUSIVE = "inconclusive"
    CONTRADICTORY = "contradictory"
    DISADVANTAGE_LEANING = "disadvantage_leaning"
    BOTH_DISADVANTAGE = "both_disadvantage"

    @property
    def rank(self) -> int:
        """Position on the advantage scale; inconclusive and contradictory tie."""
        return _RANK[self]

    @property
    def display_order(self) -> int:
        """Top-to-bottom order of the summary figure."""
        return list(Bucket).index(self)


_RANK = {
    Bucket.BOTH_DISADVANTAGE: 0,
    Bucket.DISADVANTAGE_LEANING: 1,
    Bucket.INCONCLUSIVE: 2,
    Bucket.CONTRADICTORY: 2,
    Bucket.ADVANTAGE_LEANING: 3,
    Bucket.BOTH_ADVANTAGE: 4,
}

_A, _I, _B = Significance.ABOVE, Significance.INCONCLUSIVE, Significance.BELOW
_TABLE = {
    frozenset([_A]): Bucket.BOTH_ADVANTAGE,
    frozenset([_A, _I]): Bucket.ADVANTAGE_LEANING,
    frozenset([_I]): Bucket.INCONCLUSIVE,
    frozenset([_A, _B]): Bucket.CONTRADICTORY,
    frozenset([_B, _I]): Bucket.DISADVANTAGE_LEANING,
    frozenset([_B]): Bucket.BOTH_DISADVANTAGE,
}


def combine(docs: Significance, cites: Significance) -> Bucket:
    return _TABLE[frozenset([docs, cites])]


@dataclass(frozen=True)
class AdvantageVerdict:
    node: str
    docs_outcome: Significance
    cites_outcome: Significance
    bucket: Bucket
    docs_fit: TrendFit | None = None
    cites_fit: TrendFit | None = None
    flags: tuple[str, ...] = field(default=())

    @property
    def insufficient_data(self) -> bool:
        return any(f.startswith("insufficient_data") for f in self.flags)


def outcome_for(fit: TrendFit | None, min_periods: int = MIN_VERDICT_PERIODS) -> Significance | None:
    """Significance of a fit, or None when there is too little data for a verdict."""
    if fit is None or fit.n < min_periods:
        return None
    return classify_significance(fit)


def verdict(
    node: str,
    docs_fit: TrendFit | None,
    cites_fit: TrendFit | None,
    min_periods: int = MIN_VERDICT_PERIODS,
) -> AdvantageVerdict:
    """Combine two fits; a measure without enough data counts as inconclusive and is flagged."""
    flags = []
    outcomes = []
    for name, f in (("documents", docs_fit), ("citations", cites_fit)):
        outcome = outcome_for(f, min_periods)
        if outcome is None:
            flags.append(f"insufficient_data:{name}")
            outcome = Significance.INCONCLUSIVE
        outcomes.append(outcome)
    docs, cites = outcomes
    return AdvantageVerdict(node, docs, cites, combine(docs, cites), docs_fit, cites_fit, tuple(flags))
