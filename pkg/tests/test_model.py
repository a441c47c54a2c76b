import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vcrsci.errors import InconsistentPanel, InvalidRange, NotFound
from vcrsci.model import (
    ALL_NODE,
    Level,
    Measure,
    Panel,
    PanelRecord,
    Taxonomy,
    TaxonomyNode,
    aggregate,
    node_id,
)

BA = node_id(Level.BIG_AREA, "Salud")
AR = node_id(Level.AREA, "Medicina")
DI = node_id(Level.DISCIPLINE, "Anatomía")


def small_taxonomy():
    return Taxonomy([
        TaxonomyNode(BA, "Salud", Level.BIG_AREA),
        TaxonomyNode(AR, "Medicina", Level.AREA, BA),
        TaxonomyNode(DI, "Anatomía", Level.DISCIPLINE, AR),
    ])


def uruguay_totals():
    """All-fields document counts at the two ends of the coverage window."""
    tax = small_taxonomy()
    recs = []
    for year, uy in ((1996, 272), (2019, 1910)):
        recs.append(PanelRecord("World", ALL_NODE, year, 1_000_000, 900_000, 5_000_000))
        recs.append(PanelRecord("Uruguay", ALL_NODE, year, uy, uy, 4 * uy))
    return Panel(tax, recs, coverage=(1996, 2019))


class TestTaxonomy:
    def test_levels_and_paths(self):
        tax = small_taxonomy()
        assert tax.path(DI) == ("Salud", "Medicina", "Anatomía")
        assert [n.id for n in tax.ordered()] == [BA, AR, DI]
        assert [n.id for n in tax.at_level("area")] == [AR]
        assert tax.find("Medicina").id == AR

    def test_discipline_needs_area_parent(self):
        with pytest.raises(InconsistentPanel):
            Taxonomy([
                TaxonomyNode(BA, "Salud", Level.BIG_AREA),
                TaxonomyNode(DI, "Anatomía", Level.DISCIPLINE, BA),
            ])

    def test_big_area_has_no_parent(self):
        with pytest.raises(InconsistentPanel):
            Taxonomy([
                TaxonomyNode(BA, "Salud", Level.BIG_AREA),
                TaxonomyNode("big_area:X", "X", Level.BIG_AREA, BA),
            ])

    def test_reserved_id(self):
        with pytest.raises(InconsistentPanel):
            Taxonomy([TaxonomyNode(ALL_NODE, "all", Level.BIG_AREA)])

    def test_unknown_node(self):
        with pytest.raises(NotFound):
            small_taxonomy()["area:nope"]

    def test_measure_parse(self):
        assert Measure.parse("Citations") is Measure.CITATIONS
        assert Measure.parse("docs") is Measure.DOCUMENTS


class TestPanelRecord:
    def test_citable_bounded_by_documents(self):
        with pytest.raises(InconsistentPanel):
            PanelRecord("X", ALL_NODE, 2000, 5, 6, 0)

    def test_negative_count(self):
        with pytest.raises(InconsistentPanel):
            PanelRecord("X", ALL_NODE, 2000, -1, 0, 0)


class TestPanelInvariants:
    def test_duplicate_cell(self):
        rec = PanelRecord("World", ALL_NODE, 2000, 1, 1, 1)
        with pytest.raises(InconsistentPanel):
            Panel(small_taxonomy(), [rec, rec])

    def test_focal_needs_baseline_cell(self):
        recs = [PanelRecord("World", ALL_NODE, 2000, 10, 10, 10),
                PanelRecord("Uruguay", BA, 2000, 1, 1, 1)]
        with pytest.raises(InconsistentPanel):
            Panel(small_taxonomy(), recs)

    def test_focal_cannot_exceed_baseline(self):
        recs = [PanelRecord("World", BA, 2000, 10, 10, 10),
                PanelRecord("Uruguay", BA, 2000, 11, 10, 1)]
        with pytest.raises(InconsistentPanel):
            Panel(small_taxonomy(), recs)

    def test_unknown_node_in_record(self):
        with pytest.raises(NotFound):
            Panel(small_taxonomy(), [PanelRecord("World", "area:nope", 2000, 1, 1, 1)])


class TestAggregate:
    def test_documented_totals(self):
        panel = uruguay_totals()
        assert aggregate(panel, "Uruguay", ALL_NODE, Measure.DOCUMENTS, (1996, 1996)) == 272
        assert aggregate(panel, "Uruguay", ALL_NODE, Measure.DOCUMENTS, 2019) == 1910

    def test_observed_zero_differs_from_absent(self):
        recs = [PanelRecord("World", BA, 2000, 10, 10, 10),
                PanelRecord("Uruguay", BA, 2000, 0, 0, 0)]
        panel = Panel(small_taxonomy(), recs, coverage=(2000, 2001))
        assert aggregate(panel, "Uruguay", BA, Measure.CITATIONS, 2000) == 0
        assert aggregate(panel, "Uruguay", BA, Measure.CITATIONS, 2001) is None

    def test_citable_switch(self):
        panel = uruguay_totals()
        assert aggregate(panel, "World", ALL_NODE, Measure.DOCUMENTS, 1996) == 1_000_000
        assert aggregate(panel, "World", ALL_NODE, Measure.DOCUMENTS, 1996, citable=True) == 900_000

    def test_totals_not_summed_from_children(self):
        # overlapping areas: the all-fields row is smaller than the sum of its parts
        recs = [PanelRecord("World", ALL_NODE, 2000, 10, 10, 10),
                PanelRecord("World", BA, 2000, 8, 8, 8),
                PanelRecord("World", AR, 2000, 8, 8, 8)]
        panel = Panel(small_taxonomy(), recs)
        assert aggregate(panel, "World", ALL_NODE, Measure.DOCUMENTS, 2000) == 10

    def test_errors(self):
        panel = uruguay_totals()
        with pytest.raises(NotFound):
            aggregate(panel, "Chile", ALL_NODE, Measure.DOCUMENTS, 1996)
        with pytest.raises(NotFound):
            aggregate(panel, "Uruguay", "area:nope", Measure.DOCUMENTS, 1996)
        with pytest.raises(InvalidRange):
            aggregate(panel, "Uruguay", ALL_NODE, Measure.DOCUMENTS, (2000, 1999))
        with pytest.raises(InvalidRange):
            aggregate(panel, "Uruguay", ALL_NODE, Measure.DOCUMENTS, range(2000, 2000))
        with pytest.raises(InvalidRange):
            aggregate(panel, "Uruguay", ALL_NODE, Measure.DOCUMENTS, 1990)


counts = st.lists(st.integers(0, 10_000), min_size=3, max_size=12)


@settings(max_examples=50, deadline=None)
@given(counts, st.data())
def test_window_additivity_and_permutation(values, data):
    first = 2000
    recs = []
    for i, v in enumerate(values):
        recs.append(PanelRecord("World", ALL_NODE, first + i, v + 5, v + 5, 2 * v + 5))
        recs.append(PanelRecord("Uruguay", ALL_NODE, first + i, v, v // 2, 2 * v))
    panel = Panel(small_taxonomy(), recs)
    shuffled = list(recs)
    random.Random(data.draw(st.integers(0, 2**32))).shuffle(shuffled)
    other = Panel(small_taxonomy(), shuffled)
    assert panel == other
    lo = data.draw(st.integers(0, len(values) - 1))
    hi = data.draw(st.integers(lo, len(values) - 1))
    for measure in Measure:
        whole = aggregate(panel, "Uruguay", ALL_NODE, measure, (first + lo, first + hi))
        parts = sum(aggregate(panel, "Uruguay", ALL_NODE, measure, first + k) for k in range(lo, hi + 1))
        assert whole == parts
        assert whole == aggregate(other, "Uruguay", ALL_NODE, measure, (first + lo, first + hi))


def test_partitioned_totals_equal_sum_of_disciplines():
    rng = random.Random(5)
    names = ["A", "B", "C"]
    nodes = [TaxonomyNode(BA, "Salud", Level.BIG_AREA), TaxonomyNode(AR, "Medicina", Level.AREA, BA)]
    nodes += [TaxonomyNode(node_id(Level.DISCIPLINE, n), n, Level.DISCIPLINE, AR) for n in names]
    recs = []
    for who in ("World", "Uruguay"):
        parts = [rng.randint(0, 50) for _ in names]
        if who == "World":
            parts = [p + 100 for p in parts]
        for n, p in zip(names, parts):
            recs.append(PanelRecord(who, node_id(Level.DISCIPLINE, n), 2010, p, p, p))
        recs.append(PanelRecord(who, ALL_NODE, 2010, sum(parts), sum(parts), sum(parts)))
    panel = Panel(Taxonomy(nodes), recs)
    for who in ("World", "Uruguay"):
        total = aggregate(panel, who, ALL_NODE, Measure.DOCUMENTS, 2010)
        assert total == sum(aggregate(panel, who, node_id(Level.DISCIPLINE, n), Measure.DOCUMENTS, 2010)
                            for n in names)
