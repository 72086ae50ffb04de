"""Labeling systems: definition files, detection, external predictions.

A system definition is a CSV with header ``system,sdg,query_id,query``
holding one query per row; multiple queries for the same SDG are
OR-combined at the system level (any matching query assigns the SDG).
External (black-box) predictions arrive as ``doc_id,sdg`` CSV and carry
no keyword evidence.
"""

from __future__ import annotations

import csv
import sys
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import Dataset
from .errors import IoError, SchemaError, SdgToolError
from .query import Node, TokenIndex, match_query, parse_query

__all__ = [
    "SystemEntry",
    "SystemDefinition",
    "Hit",
    "PredictionMatrix",
    "load_system",
    "detect",
    "to_matrix",
    "import_external_predictions",
    "keyword_frequencies",
]


@dataclass(frozen=True)
class SystemEntry:
    sdg: int
    query_id: str
    query_text: str
    query: Node


@dataclass(frozen=True)
class SystemDefinition:
    name: str
    entries: tuple[SystemEntry, ...]

    def __post_init__(self):
        if not self.entries:
            raise SchemaError(f"system {self.name!r} has no entries")
        ids = [e.query_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise SchemaError(f"system {self.name!r} has duplicate query_ids")


@dataclass(frozen=True)
class Hit:
    doc_id: str
    system: str
    sdg: int
    query_id: str
    matched_terms: tuple[tuple[str, tuple[int, ...]], ...]


class PredictionMatrix:
    """Boolean (doc_id, system, sdg) assignments plus coverage tracking.

    Coverage records which (doc, system) pairs were actually evaluated so
    that an absent assignment can be told apart from a system that was
    never run on the document.
    """

    def __init__(self):
        self._true: set[tuple[str, str, int]] = set()
        self._covered: set[tuple[str, str]] = set()

    def cover(self, doc_id: str, system: str) -> None:
        self._covered.add((doc_id, system))

    def add(self, doc_id: str, system: str, sdg: int) -> None:
        if not 1 <= sdg <= 17:
            raise SchemaError(f"SDG id {sdg} outside 1..17")
        self._true.add((doc_id, system, sdg))
        self._covered.add((doc_id, system))

    def is_predicted(self, doc_id: str, system: str, sdg: int) -> bool:
        return (doc_id, system, sdg) in self._true

    def predicted(self, doc_id: str, system: str) -> frozenset[int]:
        return frozenset(
            g for (d, s, g) in self._true if d == doc_id and s == system
        )

    def covers(self, doc_id: str, system: str) -> bool:
        return (doc_id, system) in self._covered

    @property
    def systems(self) -> list[str]:
        return sorted({s for (_, s) in self._covered})

    @property
    def assignments(self) -> list[tuple[str, str, int]]:
        return sorted(self._true)

    def merge(self, other: "PredictionMatrix") -> None:
        self._true |= other._true
        self._covered |= other._covered


def load_system(path: str | Path) -> SystemDefinition:
    """Load one system definition; all rows must share the system name."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read system file {path}: {exc}") from exc
    reader = csv.DictReader(raw.splitlines())
    required = {"system", "sdg", "query_id", "query"}
    if reader.fieldnames is None or not required <= set(reader.fieldnames):
        raise SchemaError(f"{path.name}: header must be 'system,sdg,query_id,query'")
    name: str | None = None
    entries: list[SystemEntry] = []
    seen_ids: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        where = f"{path.name}:{lineno}"
        system = (row.get("system") or "").strip()
        if not system:
            raise SchemaError(f"{where}: missing system name")
        if name is None:
            name = system
        elif system != name:
            raise SchemaError(f"{where}: mixed system names ({name!r} vs {system!r})")
        try:
            sdg = int(row.get("sdg") or "")
        except ValueError:
            raise SchemaError(f"{where}: non-integer sdg {row.get('sdg')!r}") from None
        if not 1 <= sdg <= 17:
            raise SchemaError(f"{where}: SDG id {sdg} outside 1..17")
        query_id = (row.get("query_id") or "").strip()
        if not query_id:
            raise SchemaError(f"{where}: missing query_id")
        if query_id in seen_ids:
            raise SchemaError(f"{where}: duplicate query_id {query_id!r}")
        seen_ids.add(query_id)
        query_text = row.get("query") or ""
        try:
            ast = parse_query(query_text)
        except SdgToolError as exc:
            _reraise_with_context(exc, system, query_id)
        entries.append(SystemEntry(sdg, query_id, query_text, ast))
    if name is None:
        raise SchemaError(f"{path.name}: no rows")
    return SystemDefinition(name, tuple(entries))


def _reraise_with_context(exc: SdgToolError, system: str, query_id: str):
    # keep the original error code (e.g. E_SYNTAX) while adding context
    err = exc.__class__.__new__(exc.__class__)
    Exception.__init__(err, f"system {system!r}, query {query_id!r}: {exc}")
    if hasattr(exc, "position"):
        err.position = exc.position
    raise err from exc


def detect(dataset: Dataset, systems: Sequence[SystemDefinition]) -> list[Hit]:
    """Run every system entry over every document; deterministic order."""
    if not systems:
        raise SchemaError("detect requires at least one system")
    hits: list[Hit] = []
    for doc in dataset.documents:
        index = TokenIndex(doc.tokens)
        for system in systems:
            for entry in system.entries:
                result = match_query(entry.query, doc.tokens, index=index)
                if result.matched:
                    hits.append(
                        Hit(doc.id, system.name, entry.sdg, entry.query_id, result.matched_terms)
                    )
    hits.sort(key=lambda h: (h.doc_id, h.system, h.sdg, h.query_id))
    return hits


def to_matrix(
    hits: Iterable[Hit], dataset: Dataset, systems: Sequence[SystemDefinition | str]
) -> PredictionMatrix:
    """Collapse hits to booleans; zero-hit documents appear as all-false rows."""
    matrix = PredictionMatrix()
    names = [s if isinstance(s, str) else s.name for s in systems]
    for doc in dataset.documents:
        for name in names:
            matrix.cover(doc.id, name)
    for hit in hits:
        matrix.add(hit.doc_id, hit.system, hit.sdg)
    return matrix


def import_external_predictions(
    path: str | Path,
    system_name: str,
    known_doc_ids: Iterable[str] | None = None,
    strict: bool = True,
) -> PredictionMatrix:
    """Import black-box predictions from a ``doc_id,sdg`` CSV.

    Unknown doc_ids raise E_SCHEMA when strict, otherwise they are
    skipped with a warning on stderr.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read predictions file {path}: {exc}") from exc
    known = None if known_doc_ids is None else set(known_doc_ids)
    matrix = PredictionMatrix()
    if known is not None:
        for doc_id in known:
            matrix.cover(doc_id, system_name)
    reader = csv.DictReader(raw.splitlines())
    if raw.strip() and (reader.fieldnames is None or not {"doc_id", "sdg"} <= set(reader.fieldnames)):
        raise SchemaError(f"{path.name}: header must be 'doc_id,sdg'")
    for lineno, row in enumerate(reader, start=2):
        where = f"{path.name}:{lineno}"
        doc_id = row.get("doc_id") or ""
        try:
            sdg = int(row.get("sdg") or "")
        except ValueError:
            raise SchemaError(f"{where}: non-integer sdg {row.get('sdg')!r}") from None
        if not 1 <= sdg <= 17:
            raise SchemaError(f"{where}: SDG id {sdg} outside 1..17")
        if known is not None and doc_id not in known:
            if strict:
                raise SchemaError(f"{where}: unknown doc_id {doc_id!r}")
            print(f"warning: {where}: skipping unknown doc_id {doc_id!r}", file=sys.stderr)
            continue
        matrix.add(doc_id, system_name, sdg)
    return matrix


def keyword_frequencies(hits: Iterable[Hit]) -> list[tuple[str, str, int]]:
    """Per-system keyword hit counts, summing matched positions over documents.

    Sorted by count descending, then (system, term) for stable output.
    """
    counts: Counter[tuple[str, str]] = Counter()
    for hit in hits:
        for pattern, positions in hit.matched_terms:
            counts[(hit.system, pattern)] += len(positions)
    return sorted(
        ((system, term, count) for (system, term), count in counts.items()),
        key=lambda row: (-row[2], row[0], row[1]),
    )
