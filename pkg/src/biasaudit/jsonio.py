"""JSONL/CSV wire formats and digest helpers.

All writers are deterministic: keys are emitted in a fixed order, floats use
repr, newlines are ``\\n``, and files end with a trailing newline, so repeated
runs from identical inputs produce byte-identical artifacts.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterable, Iterator

from .errors import SchemaError, ValidationError
from .evaluation import PredictionRecord
from .preprocess import AnalysisUnit, Document


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _rows(path: Path) -> Iterator[tuple[int, dict]]:
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"bad JSON: {exc}", path=str(path), lines=[line_no]) from None
            if not isinstance(row, dict):
                raise SchemaError("row is not an object", path=str(path), lines=[line_no])
            yield line_no, row


def _dump(row: dict) -> str:
    return json.dumps(row, ensure_ascii=False)


def read_corpus(path: str | Path) -> list[Document]:
    """Load a corpus JSONL (one labeled document per line)."""
    docs = []
    for line_no, row in _rows(Path(path)):
        try:
            docs.append(
                Document(
                    id=row["id"],
                    text=row["text"],
                    label=row["label"],
                    language=row["language"],
                    split=row.get("split", "train"),
                )
            )
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise SchemaError(f"bad document: {exc}", path=str(path), lines=[line_no]) from None
    return docs


def write_corpus(docs: Iterable[Document], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for d in docs:
            fh.write(
                _dump(
                    {"id": d.id, "text": d.text, "label": d.label, "language": d.language, "split": d.split}
                )
                + "\n"
            )


def read_units(path: str | Path) -> list[AnalysisUnit]:
    units = []
    for line_no, row in _rows(Path(path)):
        try:
            units.append(
                AnalysisUnit(
                    unit_id=row["unit_id"],
                    doc_id=row["doc_id"],
                    index=row["index"],
                    kind=row["kind"],
                    text=row["text"],
                    label=row["label"],
                    token_count=row["token_count"],
                    word_count=row["word_count"],
                )
            )
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise SchemaError(f"bad unit: {exc}", path=str(path), lines=[line_no]) from None
    return units


def write_units(units: Iterable[AnalysisUnit], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for u in units:
            fh.write(
                _dump(
                    {
                        "unit_id": u.unit_id,
                        "doc_id": u.doc_id,
                        "index": u.index,
                        "kind": u.kind,
                        "text": u.text,
                        "label": u.label,
                        "token_count": u.token_count,
                        "word_count": u.word_count,
                    }
                )
                + "\n"
            )


def read_predictions(path: str | Path) -> list[PredictionRecord]:
    records = []
    for line_no, row in _rows(Path(path)):
        try:
            scores = row.get("scores")
            records.append(
                PredictionRecord(
                    unit_id=row["unit_id"],
                    predicted=row["predicted"],
                    scores=tuple(scores) if scores is not None else None,
                )
            )
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise SchemaError(f"bad prediction: {exc}", path=str(path), lines=[line_no]) from None
    return records


def write_predictions(records: Iterable[PredictionRecord], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            row: dict = {"unit_id": r.unit_id, "predicted": r.predicted}
            if r.scores is not None:
                row["scores"] = list(r.scores)
            fh.write(_dump(row) + "\n")


def write_csv(path: str | Path, header: list[str], rows: Iterable[list[str]]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_csv_cell(c) for c in row) + "\n")


def _csv_cell(cell: str) -> str:
    if any(ch in cell for ch in ',"\n'):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def write_json(path: str | Path, payload) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")
