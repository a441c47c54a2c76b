"""Reading and writing panels.

The canonical file is UTF-8 CSV with exactly this header::

    entity,level,big_area,area,discipline,year,documents,citable_documents,citations

``level`` is one of ``all``, ``big_area``, ``area``, ``discipline``; taxonomy
columns deeper than the level stay empty, and ``all`` rows carry the
all-fields totals. Panels are persisted in the same format.
"""
from __future__ import annotations

import csv
import io
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Sequence, Union

from .errors import (
    DuplicateCell,
    InconsistentPanel,
    InconsistentTaxonomy,
    MissingColumn,
    ParseError,
    SchemaError,
)
from .model import ALL_NODE, DEFAULT_BASELINE, Level, Panel, PanelRecord, Taxonomy, TaxonomyNode, node_id

HEADER = (
    "entity", "level", "big_area", "area", "discipline",
    "year", "documents", "citable_documents", "citations",
)
COUNT_COLUMNS = ("documents", "citable_documents", "citations")
_LEVELS = ("all", "big_area", "area", "discipline")
_DEPTH = {"all": 0, "big_area": 1, "area": 2, "discipline": 3}

Source = Union[str, os.PathLike, IO[str]]


@dataclass(frozen=True)
class CanonicalRow:
    entity: str
    level: str
    big_area: str
    area: str
    discipline: str
    year: int
    documents: int
    citable_documents: int
    citations: int

    @property
    def names(self) -> tuple[str, ...]:
        return (self.big_area, self.area, self.discipline)[: _DEPTH[self.level]]

    @property
    def node(self) -> str:
        if self.level == "all":
            return ALL_NODE
        return node_id(Level(self.level), self.names[-1])

    def as_fields(self) -> list[str]:
        return [self.entity, self.level, self.big_area, self.area, self.discipline,
                str(self.year), str(self.documents), str(self.citable_documents), str(self.citations)]


def _open(source: Source, encoding: str = "utf-8"):
    if hasattr(source, "read"):
        return source, False
    return open(source, encoding=encoding, newline=""), True


def _int_field(text: str, column: str, line: int) -> int:
    value = text.strip()
    if not value.isdigit() or not value.isascii():
        raise ParseError(f"expected a non-negative integer, got {text!r}", line=line, column=column)
    return int(value)


def read_canonical_rows(source: Source) -> list[tuple[int, CanonicalRow]]:
    """Parse and validate rows; returns (line number, row) pairs."""
    handle, owned = _open(source, encoding="utf-8-sig")
    try:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"empty file; expected header {','.join(HEADER)}", line=1) from None
        if header:
            header[0] = header[0].lstrip("\ufeff")  # text streams keep a BOM
        if tuple(h.strip() for h in header) != HEADER:
            raise SchemaError(
                f"wrong header {','.join(header)!r}; expected {','.join(HEADER)}", line=1
            )
        rows = []
        for fields in reader:
            line = reader.line_num
            if not fields or (len(fields) == 1 and not fields[0].strip()):
                continue
            if len(fields) != len(HEADER):
                raise ParseError(f"expected {len(HEADER)} fields, got {len(fields)}", line=line)
            rec = dict(zip(HEADER, (f.strip() for f in fields)))
            if not rec["entity"]:
                raise ParseError("entity is empty", line=line, column="entity")
            level = rec["level"].lower()
            if level not in _LEVELS:
                raise ParseError(f"level must be one of {', '.join(_LEVELS)}, got {rec['level']!r}",
                                 line=line, column="level")
            depth = _DEPTH[level]
            for i, col in enumerate(("big_area", "area", "discipline")):
                if i < depth and not rec[col]:
                    raise ParseError(f"{col} is required for level {level}", line=line, column=col)
                if i >= depth and rec[col]:
                    raise ParseError(f"{col} must be empty for level {level}", line=line, column=col)
            year_text = rec["year"]
            if not re.fullmatch(r"[0-9]{4}", year_text):
                raise ParseError(f"year must be a 4-digit integer, got {year_text!r}", line=line, column="year")
            counts = {c: _int_field(rec[c], c, line) for c in COUNT_COLUMNS}
            if counts["citable_documents"] > counts["documents"]:
                raise ParseError("citable_documents exceeds documents", line=line, column="citable_documents")
            rows.append((line, CanonicalRow(rec["entity"], level, rec["big_area"], rec["area"],
                                            rec["discipline"], int(year_text), **counts)))
        return rows
    finally:
        if owned:
            handle.close()


def build_taxonomy(rows: Iterable[tuple[int, CanonicalRow]]) -> Taxonomy:
    """Derive the taxonomy from the distinct (big_area, area, discipline) paths."""
    parents: dict[str, tuple[str | None, int]] = {}
    names: dict[str, tuple[str, Level]] = {}
    for line, row in rows:
        path = row.names
        for depth in range(len(path)):
            level = (Level.BIG_AREA, Level.AREA, Level.DISCIPLINE)[depth]
            nid = node_id(level, path[depth])
            parent = node_id((Level.BIG_AREA, Level.AREA)[depth - 1], path[depth - 1]) if depth else None
            seen = parents.get(nid)
            if seen is None:
                parents[nid] = (parent, line)
                names[nid] = (path[depth], level)
            elif seen[0] != parent:
                raise InconsistentTaxonomy(
                    f"{level.value} {path[depth]!r} appears under {_name(seen[0])!r} (line {seen[1]})"
                    f" and {_name(parent)!r}",
                    line=line, column=("big_area", "area", "discipline")[depth],
                )
    return Taxonomy(TaxonomyNode(nid, names[nid][0], names[nid][1], parents[nid][0]) for nid in parents)


def _name(nid: str | None) -> str:
    return "" if nid is None else nid.split(":", 1)[1]


def rows_to_panel(
    rows: Sequence[tuple[int, CanonicalRow]] | Sequence[CanonicalRow],
    baseline: str = DEFAULT_BASELINE,
) -> Panel:
    numbered = [r if isinstance(r, tuple) else (i + 2, r) for i, r in enumerate(rows)]
    taxonomy = build_taxonomy(numbered)
    seen: dict[tuple[str, str, int], tuple[int, CanonicalRow]] = {}
    for line, row in numbered:
        key = (row.entity, row.node, row.year)
        if key in seen:
            first = seen[key][0]
            raise DuplicateCell(
                f"duplicate cell ({row.entity}, {row.node}, {row.year}) on lines {first} and {line}",
                lines=(first, line),
            )
        seen[key] = (line, row)
    if numbered and baseline not in {row.entity for _, row in numbered}:
        raise SchemaError(f"baseline entity {baseline!r} not present in input")
    for (entity, node, year), (line, row) in seen.items():
        if entity == baseline:
            continue
        ref = seen.get((baseline, node, year))
        if ref is None:
            raise InconsistentPanel(f"line {line}: no {baseline!r} row for ({node}, {year})")
        for col in COUNT_COLUMNS:
            if getattr(row, col) > getattr(ref[1], col):
                raise ParseError(
                    f"{col} {getattr(row, col)} exceeds {baseline!r} value {getattr(ref[1], col)}"
                    f" (line {ref[0]})",
                    line=line, column=col,
                )
    records = [
        PanelRecord(row.entity, row.node, row.year, row.documents, row.citable_documents, row.citations)
        for _, row in numbered
    ]
    return Panel(taxonomy, records, baseline_entity=baseline)


def parse_canonical(source: Source, baseline: str = DEFAULT_BASELINE) -> Panel:
    """Read a canonical CSV file into a validated panel."""
    return rows_to_panel(read_canonical_rows(source), baseline=baseline)


load_panel = parse_canonical


def panel_rows(panel: Panel) -> list[CanonicalRow]:
    """Canonical rows in a deterministic order: entity, taxonomy order, year."""
    order = {ALL_NODE: -1}
    order.update({n.id: i for i, n in enumerate(panel.taxonomy.ordered())})
    out = []
    for rec in sorted(panel.records, key=lambda r: (r.entity, order[r.node], r.year)):
        if rec.node == ALL_NODE:
            level, path = "all", ()
        else:
            node = panel.taxonomy[rec.node]
            level, path = node.level.value, panel.taxonomy.path(rec.node)
        path = tuple(path) + ("",) * (3 - len(path))
        out.append(CanonicalRow(rec.entity, level, *path, rec.year,
                                rec.documents, rec.citable_documents, rec.citations))
    return out


def write_canonical(rows: Iterable[CanonicalRow], target: Source) -> None:
    handle, owned = (target, False) if hasattr(target, "write") else (
        open(target, "w", encoding="utf-8", newline=""), True)
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        for row in rows:
            writer.writerow(row.as_fields())
    finally:
        if owned:
            handle.close()


def save_panel(panel: Panel, path: Source) -> None:
    write_canonical(panel_rows(panel), path)


def dumps_panel(panel: Panel) -> str:
    buf = io.StringIO()
    save_panel(panel, buf)
    return buf.getvalue()


# -- SCImago country-rank exports -------------------------------------------

SCIMAGO_COLUMNS = {
    "entity": "country",
    "documents": "documents",
    "citable_documents": "citable documents",
    "citations": "citations",
}


def normalize_count(text: str, column: str = "", line: int | None = None) -> int:
    """Integer from a locale-formatted count such as ``1.910`` or ``9,000,000``."""
    raw = text.strip().strip('"')
    cleaned = re.sub(r"[.,\s ']", "", raw)
    if not raw or not cleaned.isdigit() or not cleaned.isascii():
        raise ParseError(f"cannot read {text!r} as an integer count", line=line, column=column)
    groups = re.split(r"[.,\s ']", raw)
    if len(groups) > 1 and (not 1 <= len(groups[0]) <= 3 or any(len(g) != 3 for g in groups[1:])):
        raise ParseError(f"{text!r} is not a whole number with thousands separators",
                         line=line, column=column)
    return int(cleaned)


def _node_context(node: str | Sequence[str]) -> tuple[str, tuple[str, ...]]:
    if isinstance(node, str):
        if node in ("all", ALL_NODE, ""):
            return "all", ()
        node = tuple(part.strip() for part in node.split("/"))
    names = tuple(node)
    if not 1 <= len(names) <= 3 or not all(names):
        raise ValueError(f"node context must be 'all' or 1-3 taxonomy names, got {node!r}")
    return ("big_area", "area", "discipline")[len(names) - 1], names


def adapt_scimago(
    source: Source,
    entity: str | Iterable[str] | None,
    node: str | Sequence[str],
    year: int,
) -> list[CanonicalRow]:
    """Canonical rows from one downloaded country-rank export.

    The export carries neither its subject filter nor its year, so both come
    from the caller: ``node`` is ``"all"`` or a taxonomy path
    (``"Health Sciences/Medicine"`` or a tuple of names). ``entity`` selects
    which countries to keep; None keeps every row.
    """
    level, names = _node_context(node)
    padded = names + ("",) * (3 - len(names))
    wanted = None if entity is None else ({entity} if isinstance(entity, str) else set(entity))
    handle, owned = _open(source, encoding="utf-8-sig")
    try:
        reader = csv.reader(handle, delimiter=";", quotechar='"')
        try:
            header = [h.strip().lstrip("\ufeff").strip('"').lower() for h in next(reader)]
        except StopIteration:
            raise SchemaError("empty export", line=1) from None
        index = {}
        for field, name in SCIMAGO_COLUMNS.items():
            if name not in header:
                raise MissingColumn(f"export lacks a {name.title()!r} column", line=1, column=name)
            index[field] = header.index(name)
        out = []
        for fields in reader:
            line = reader.line_num
            if not any(f.strip() for f in fields):
                continue
            if len(fields) < len(header):
                raise ParseError(f"expected {len(header)} fields, got {len(fields)}", line=line)
            country = fields[index["entity"]].strip()
            if wanted is not None and country not in wanted:
                continue
            counts = {
                f: normalize_count(fields[index[f]], SCIMAGO_COLUMNS[f], line)
                for f in ("documents", "citable_documents", "citations")
            }
            if counts["citable_documents"] > counts["documents"]:
                raise ParseError("citable documents exceed documents", line=line,
                                 column="citable documents")
            out.append(CanonicalRow(country, level, *padded, int(year), **counts))
        return out
    finally:
        if owned:
            handle.close()
