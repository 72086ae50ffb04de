"""Tokenization and document collection ingestion.

Tokens are maximal runs of Unicode letters/digits, lowercased; every
other character (hyphens and apostrophes included) separates tokens.
Documents come from JSONL (one object per line: id, text, optional
labels / evaluated int arrays) or CSV (header ``id,text,labels,evaluated``,
labels/evaluated ``|``-separated).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import IoError, SchemaError

__all__ = [
    "ALL_SDGS",
    "Document",
    "LabeledDocument",
    "Dataset",
    "tokenize",
    "load_documents",
    "save_documents",
]

import re

ALL_SDGS = frozenset(range(1, 18))

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    return [m.group().lower() for m in _TOKEN_RE.finditer(text)]


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    tokens: tuple[str, ...]

    @property
    def word_count(self) -> int:
        return len(self.tokens)

    @classmethod
    def from_text(cls, doc_id: str, text: str) -> "Document":
        return cls(doc_id, text, tuple(tokenize(text)))


@dataclass(frozen=True)
class LabeledDocument(Document):
    labels: frozenset[int] = field(default_factory=frozenset)
    # the SDGs this document was actually judged for; scoring is
    # restricted to this set
    evaluated: frozenset[int] = ALL_SDGS

    @classmethod
    def from_text(
        cls,
        doc_id: str,
        text: str,
        labels: Iterable[int] = (),
        evaluated: Iterable[int] | None = None,
    ) -> "LabeledDocument":
        lab = frozenset(labels)
        ev = ALL_SDGS if evaluated is None else frozenset(evaluated)
        return cls(doc_id, text, tuple(tokenize(text)), lab, ev)


@dataclass(frozen=True)
class Dataset:
    name: str
    documents: tuple[Document, ...]
    kind: str = "unlabeled"  # labeled | unlabeled | synthetic

    def __post_init__(self):
        if not self.documents:
            raise SchemaError(f"dataset {self.name!r} is empty")
        ids = [d.id for d in self.documents]
        if len(set(ids)) != len(ids):
            raise SchemaError(f"dataset {self.name!r} has duplicate document ids")

    def by_id(self, doc_id: str) -> Document:
        for d in self.documents:
            if d.id == doc_id:
                return d
        raise KeyError(doc_id)

    @property
    def labeled(self) -> bool:
        return any(isinstance(d, LabeledDocument) for d in self.documents)


def _check_sdg_list(values, where: str) -> frozenset[int]:
    out = set()
    for v in values:
        if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= 17:
            raise SchemaError(f"{where}: SDG id {v!r} outside 1..17")
        out.add(v)
    return frozenset(out)


def _build_document(
    doc_id, text, labels, evaluated, where: str
) -> Document:
    if not isinstance(doc_id, str) or not doc_id:
        raise SchemaError(f"{where}: missing or invalid 'id'")
    if not isinstance(text, str):
        raise SchemaError(f"{where}: missing or invalid 'text'")
    if labels is None and evaluated is None:
        return Document.from_text(doc_id, text)
    lab = _check_sdg_list(labels or [], where)
    ev = ALL_SDGS if evaluated is None else _check_sdg_list(evaluated, where)
    if not lab <= ev:
        raise SchemaError(f"{where}: labels {sorted(lab - ev)} outside the evaluated set")
    if not ev:
        raise SchemaError(f"{where}: empty 'evaluated' set on a labeled record")
    return LabeledDocument(doc_id, text, tuple(tokenize(text)), lab, ev)


def _parse_int_list(raw: str, where: str) -> list[int] | None:
    if raw is None or raw == "":
        return None
    out = []
    for part in raw.split("|"):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise SchemaError(f"{where}: non-integer SDG id {part!r}") from None
    return out


def load_documents(
    path: str | Path,
    format: str | None = None,
    name: str | None = None,
    kind: str | None = None,
) -> Dataset:
    """Load a dataset from JSONL or CSV (format inferred from the suffix)."""
    path = Path(path)
    if format is None:
        format = "csv" if path.suffix.lower() == ".csv" else "jsonl"
    if format not in ("jsonl", "csv"):
        raise SchemaError(f"unknown dataset format {format!r}")
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read dataset {path}: {exc}") from exc

    documents: list[Document] = []
    if format == "jsonl":
        for lineno, line in enumerate(raw.splitlines(), start=1):
            if not line.strip():
                continue
            where = f"{path.name}:{lineno}"
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"{where}: invalid JSON ({exc})") from exc
            if not isinstance(record, dict):
                raise SchemaError(f"{where}: expected a JSON object")
            documents.append(
                _build_document(
                    record.get("id"),
                    record.get("text"),
                    record.get("labels"),
                    record.get("evaluated"),
                    where,
                )
            )
    else:
        reader = csv.DictReader(raw.splitlines())
        required = {"id", "text"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise SchemaError(f"{path.name}: CSV header must include 'id' and 'text'")
        for lineno, row in enumerate(reader, start=2):
            where = f"{path.name}:{lineno}"
            documents.append(
                _build_document(
                    row.get("id"),
                    row.get("text"),
                    _parse_int_list(row.get("labels"), where),
                    _parse_int_list(row.get("evaluated"), where),
                    where,
                )
            )

    if kind is None:
        kind = "labeled" if any(isinstance(d, LabeledDocument) for d in documents) else "unlabeled"
    return Dataset(name or path.stem, tuple(documents), kind)


def save_documents(dataset: Dataset, path: str | Path) -> None:
    """Write a dataset as JSONL; a round-trip through load_documents is lossless."""
    path = Path(path)
    lines = []
    for doc in dataset.documents:
        record: dict = {"id": doc.id, "text": doc.text}
        if isinstance(doc, LabeledDocument):
            record["labels"] = sorted(doc.labels)
            record["evaluated"] = sorted(doc.evaluated)
        lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write dataset {path}: {exc}") from exc
