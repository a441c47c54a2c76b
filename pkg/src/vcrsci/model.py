"""Bibliometric panel: taxonomy, per-cell counts and aggregation.

A panel holds one record per (entity, taxonomy node, year). Totals across all
fields live on the reserved node ``ALL_NODE`` and are never derived by summing
children, because journals in the source database can belong to several
thematic areas and are counted once per area.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import InconsistentPanel, InvalidRange, NotFound

ALL_NODE = "__ALL__"
DEFAULT_BASELINE = "World"


class Measure(enum.Enum):
    DOCUMENTS = "documents"
    CITATIONS = "citations"

    @classmethod
    def parse(cls, text: str | Measure) -> Measure:
        if isinstance(text, Measure):
            return text
        key = text.strip().lower()
        aliases = {"docs": "documents", "doc": "documents", "cites": "citations", "cite": "citations"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown measure {text!r}; expected documents or citations") from None


class Level(enum.Enum):
    BIG_AREA = "big_area"
    AREA = "area"
    DISCIPLINE = "discipline"

    @property
    def depth(self) -> int:
        return _DEPTH[self]

    @classmethod
    def parse(cls, text: str | Level) -> Level:
        if isinstance(text, Level):
            return text
        try:
            return cls(text.strip().lower().replace("-", "_"))
        except ValueError:
            raise ValueError(f"unknown level {text!r}; expected big_area, area or discipline") from None


_DEPTH = {Level.BIG_AREA: 0, Level.AREA: 1, Level.DISCIPLINE: 2}
_PARENT_LEVEL = {Level.AREA: Level.BIG_AREA, Level.DISCIPLINE: Level.AREA}


def node_id(level: Level, name: str) -> str:
    """Identifier for a taxonomy node; names are unique within a level."""
    return f"{level.value}:{name}"


@dataclass(frozen=True)
class TaxonomyNode:
    id: str
    name: str
    level: Level
    parent: str | None = None


class Taxonomy:
    """Three-level hierarchy: big area > thematic area > discipline."""

    def __init__(self, nodes: Iterable[TaxonomyNode] = ()):
        self._nodes: dict[str, TaxonomyNode] = {}
        for node in nodes:
            if node.id in self._nodes:
                raise InconsistentPanel(f"duplicate taxonomy node id {node.id!r}")
            if node.id == ALL_NODE:
                raise InconsistentPanel(f"{ALL_NODE!r} is reserved for all-fields totals")
            self._nodes[node.id] = node
        for node in self._nodes.values():
            expected = _PARENT_LEVEL.get(node.level)
            if expected is None:
                if node.parent is not None:
                    raise InconsistentPanel(f"big area {node.name!r} cannot have a parent")
                continue
            parent = self._nodes.get(node.parent) if node.parent else None
            if parent is None or parent.level is not expected:
                raise InconsistentPanel(
                    f"{node.level.value} {node.name!r} needs a {expected.value} parent, got {node.parent!r}"
                )
        self._children: dict[str | None, list[str]] = {}
        for node in self._nodes.values():
            self._children.setdefault(node.parent, []).append(node.id)

    def __contains__(self, node: object) -> bool:
        return node in self._nodes

    def __getitem__(self, node: str) -> TaxonomyNode:
        try:
            return self._nodes[node]
        except KeyError:
            raise NotFound(f"unknown taxonomy node {node!r}") from None

    def __iter__(self) -> Iterator[TaxonomyNode]:
        return iter(self._nodes.values())

    def __len__(self) -> int:
        return len(self._nodes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Taxonomy):
            return NotImplemented
        return set(self._nodes.values()) == set(other._nodes.values())

    def children(self, node: str | None) -> list[str]:
        return sorted(self._children.get(node, []), key=lambda i: self._nodes[i].name)

    def at_level(self, level: Level | str) -> list[TaxonomyNode]:
        level = Level.parse(level)
        return [n for n in self.ordered() if n.level is level]

    def path(self, node: str) -> tuple[str, ...]:
        """Names from the big area down to ``node``."""
        names = []
        current: str | None = node
        while current is not None:
            n = self[current]
            names.append(n.name)
            current = n.parent
        return tuple(reversed(names))

    def ordered(self) -> list[TaxonomyNode]:
        """Depth-first order with siblings sorted by name."""
        out: list[TaxonomyNode] = []

        def walk(parent):
            for child in self.children(parent):
                out.append(self._nodes[child])
                walk(child)

        walk(None)
        return out

    def find(self, name: str, level: Level | str | None = None) -> TaxonomyNode:
        """Look a node up by id or by display name."""
        if name in self._nodes:
            return self._nodes[name]
        matches = [
            n for n in self._nodes.values()
            if n.name == name and (level is None or n.level is Level.parse(level))
        ]
        if len(matches) == 1:
            return matches[0]
        if not matches:
            raise NotFound(f"unknown taxonomy node {name!r}")
        raise NotFound(f"ambiguous node name {name!r}; qualify it with a level")


@dataclass(frozen=True)
class PanelRecord:
    entity: str
    node: str
    year: int
    documents: int
    citable_documents: int
    citations: int

    def __post_init__(self):
        for field in ("documents", "citable_documents", "citations"):
            value = getattr(self, field)
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise InconsistentPanel(f"{field} must be a non-negative integer, got {value!r}")
        if self.citable_documents > self.documents:
            raise InconsistentPanel(
                f"citable_documents ({self.citable_documents}) exceeds documents ({self.documents})"
                f" for {self.entity}/{self.node}/{self.year}"
            )

    @property
    def key(self) -> tuple[str, str, int]:
        return (self.entity, self.node, self.year)

    def count(self, measure: Measure, citable: bool = False) -> int:
        if measure is Measure.CITATIONS:
            return self.citations
        return self.citable_documents if citable else self.documents


YearSpan = tuple[int, int]


def as_span(years: int | YearSpan | range) -> YearSpan:
    """Normalize a single year, inclusive (first, last) pair or range."""
    if isinstance(years, range):
        if len(years) == 0 or years.step != 1:
            raise InvalidRange(f"empty or strided year range {years!r}")
        return (years.start, years[-1])
    if isinstance(years, int):
        return (years, years)
    first, last = years
    if first > last:
        raise InvalidRange(f"empty year range {first}..{last}")
    return (int(first), int(last))


class Panel:
    """Immutable collection of panel records with a designated baseline entity."""

    def __init__(
        self,
        taxonomy: Taxonomy,
        records: Iterable[PanelRecord],
        baseline_entity: str = DEFAULT_BASELINE,
        coverage: YearSpan | None = None,
    ):
        self.taxonomy = taxonomy
        self.baseline_entity = baseline_entity
        cells: dict[tuple[str, str, int], PanelRecord] = {}
        for rec in records:
            if rec.node != ALL_NODE and rec.node not in taxonomy:
                raise NotFound(f"record references unknown node {rec.node!r}")
            if rec.key in cells:
                raise InconsistentPanel(f"duplicate cell {rec.key}")
            cells[rec.key] = rec
        years = sorted({k[2] for k in cells})
        if coverage is None:
            coverage = (years[0], years[-1]) if years else (0, -1)
        elif years and (years[0] < coverage[0] or years[-1] > coverage[1]):
            raise InvalidRange(f"records span {years[0]}..{years[-1]} outside coverage {coverage}")
        self.coverage: YearSpan = (int(coverage[0]), int(coverage[1]))
        self._cells = dict(sorted(cells.items()))
        self._series: dict[tuple[str, str], dict[int, PanelRecord]] = {}
        for (entity, node, year), rec in self._cells.items():
            self._series.setdefault((entity, node), {})[year] = rec
        self.entities = tuple(sorted({k[0] for k in self._cells}))
        self._check_baseline()

    def _check_baseline(self):
        base = self.baseline_entity
        for (entity, node, year), rec in self._cells.items():
            if entity == base:
                continue
            ref = self._cells.get((base, node, year))
            if ref is None:
                raise InconsistentPanel(
                    f"{entity}/{node}/{year} has no matching {base!r} record"
                )
            for field in ("documents", "citable_documents", "citations"):
                if getattr(rec, field) > getattr(ref, field):
                    raise InconsistentPanel(
                        f"{entity}/{node}/{year}: {field} {getattr(rec, field)} exceeds"
                        f" baseline {getattr(ref, field)}"
                    )

    @property
    def records(self) -> tuple[PanelRecord, ...]:
        return tuple(self._cells.values())

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(range(self.coverage[0], self.coverage[1] + 1))

    def __len__(self) -> int:
        return len(self._cells)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Panel):
            return NotImplemented
        return (
            self.baseline_entity == other.baseline_entity
            and self.coverage == other.coverage
            and self.taxonomy == other.taxonomy
            and self._cells == other._cells
        )

    def get(self, entity: str, node: str, year: int) -> PanelRecord | None:
        return self._cells.get((entity, node, year))

    def cells(self, entity: str, node: str) -> Mapping[int, PanelRecord]:
        return self._series.get((entity, node), {})

    def nodes_with_data(self) -> set[str]:
        return {node for (_, node) in self._series}

    def with_baseline(self, baseline_entity: str) -> Panel:
        if baseline_entity == self.baseline_entity:
            return self
        return Panel(self.taxonomy, self.records, baseline_entity, self.coverage)

    def restrict(self, entities: Iterable[str]) -> Panel:
        keep = set(entities) | {self.baseline_entity}
        return Panel(
            self.taxonomy,
            (r for r in self.records if r.entity in keep),
            self.baseline_entity,
            self.coverage,
        )


def aggregate(
    panel: Panel,
    entity: str,
    node: str,
    measure: Measure,
    years: int | YearSpan | range,
    citable: bool = False,
) -> int | None:
    """Sum ``measure`` over the records of one (entity, node) within ``years``.

    Returns None when no record falls in the range (structurally absent),
    which callers must keep distinct from an observed zero. ``citable``
    switches the documents measure to the citable-documents column.
    """
    first, last = as_span(years)
    if entity not in panel.entities:
        raise NotFound(f"unknown entity {entity!r}")
    if node != ALL_NODE and node not in panel.taxonomy:
        raise NotFound(f"unknown taxonomy node {node!r}")
    lo, hi = panel.coverage
    if first < lo or last > hi:
        raise InvalidRange(f"years {first}..{last} outside panel coverage {lo}..{hi}")
    cells = panel.cells(entity, node)
    total = None
    for year in range(first, last + 1):
        rec = cells.get(year)
        if rec is not None:
            total = (total or 0) + rec.count(measure, citable)
    return total
