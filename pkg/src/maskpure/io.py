"""Corpus ingestion, model persistence and report emission."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

from .classifier import ClassifierModel
from .errors import CorpusFormatError, EmptyCorpus, EmptyText
from .filler import FillerModel
from .text import Text, tokenize

FORMATS = ("csv", "jsonl")


def infer_format(path: str | Path) -> str:
    suffix = Path(path).suffix.lower().lstrip(".")
    if suffix in ("jsonl", "ndjson", "json"):
        return "jsonl"
    if suffix in ("csv", "tsv", "txt"):
        return "csv"
    raise ValueError(f"cannot infer corpus format from {path}; pass --format")


def _label(value, line: int) -> int:
    if isinstance(value, bool):
        raise CorpusFormatError(f"label must be a positive integer, got {value!r}", line)
    try:
        label = int(value)
    except (TypeError, ValueError):
        raise CorpusFormatError(f"label must be a positive integer, got {value!r}", line) from None
    if isinstance(value, float) and value != label or label < 1:
        raise CorpusFormatError(f"label must be a positive integer, got {value!r}", line)
    return label


def _text(raw, line: int) -> Text:
    if not isinstance(raw, str):
        raise CorpusFormatError("text must be a string", line)
    try:
        return tokenize(raw)
    except EmptyText:
        raise CorpusFormatError("empty text", line) from None


def _read_csv(path: Path) -> list[tuple[Text, int]]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise CorpusFormatError(f"expected 3 fields (label,title,description), got {len(row)}", line)
            label, title, description = row
            out.append((_text(f"{title} {description}", line), _label(label.strip(), line)))
    return out


def _read_jsonl(path: Path) -> list[tuple[Text, int]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line, raw in enumerate(fh, 1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as e:
                raise CorpusFormatError(f"invalid JSON: {e.msg}", line) from None
            if not isinstance(obj, dict) or "text" not in obj or "label" not in obj:
                raise CorpusFormatError('expected an object with "text" and "label"', line)
            out.append((_text(obj["text"], line), _label(obj["label"], line)))
    return out


def ingest_corpus(path: str | Path, format: str | None = None) -> list[tuple[Text, int]]:
    """Read labelled texts, preserving file order.

    CSV rows follow the AG News layout ``label,title,description`` (title and
    description joined by a space); JSONL lines are ``{"text": ..., "label": ...}``.
    """
    path = Path(path)
    fmt = format or infer_format(path)
    if fmt not in FORMATS:
        raise ValueError(f"unknown corpus format {fmt!r}")
    records = _read_csv(path) if fmt == "csv" else _read_jsonl(path)
    if not records:
        raise EmptyCorpus(f"{path} contains no records")
    return records


def save_model(model: FillerModel | ClassifierModel, path: str | Path, config: dict | None = None) -> None:
    d = model.to_dict()
    if config is not None:
        d["config"] = config
    Path(path).write_text(dumps(d, indent=1), encoding="utf-8")


def load_filler(path: str | Path) -> FillerModel:
    return FillerModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def load_classifier(path: str | Path) -> ClassifierModel:
    return ClassifierModel.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def dumps(obj, indent: int | None = None) -> str:
    """Canonical JSON: sorted keys, no locale or platform dependence."""
    if indent is None:
        return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return json.dumps(obj, sort_keys=True, indent=indent, ensure_ascii=False) + "\n"


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    Path(path).write_text("".join(dumps(r) + "\n" for r in records), encoding="utf-8")
