"""Corpus ingestion, tokenization, and training-sample emission.

Corpora are UTF-8 line-delimited JSON files, one object per line with
fields ``id``, ``text`` and ``source_tag``. Emitted samples use the same
framing with a versioned record schema so a written file can be read back
field-identically.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .errors import EmptyDocument, PipelineError
from .tokenizer import Tokenizer

log = logging.getLogger(__name__)

SAMPLE_SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class Document:
    """A raw corpus document."""

    id: str
    text: str
    source_tag: str = ""


@dataclass
class TokenSequence:
    """Token ids for one document plus per-token character spans.

    ``char_offsets[i]`` is the (start, end) slice of ``text`` that token i
    was read from, so any token span maps back to the exact source text.
    """

    doc_id: str
    tokens: list[int]
    char_offsets: list[tuple[int, int]]
    text: str

    def __len__(self) -> int:
        return len(self.tokens)

    def span_text(self, start: int, end: int) -> str:
        """Source text covering tokens [start, end)."""
        if start >= end:
            return ""
        return self.text[self.char_offsets[start][0] : self.char_offsets[end - 1][1]]


@dataclass(frozen=True)
class SampleDependency:
    """One verified context as recorded in an emitted sample.

    ``stream_start``/``stream_len`` locate the context's tokens inside the
    sample token stream, so chunk tokens are recoverable from the record
    alone.
    """

    source_doc_id: str
    anchor: int
    gain: float
    base_entropy: float
    conditioned_entropy: float
    similarity: float
    rank: int
    stream_start: int
    stream_len: int

    def chunk_tokens(self, sample_tokens: list[int]) -> list[int]:
        return sample_tokens[self.stream_start : self.stream_start + self.stream_len]


@dataclass
class TrainingSample:
    """A constructed training sequence: verified contexts, then the root.

    ``dependencies`` are in canonical (ascending anchor) order;
    ``permutation[k]`` is the dependency index emitted in slot k of the
    token stream. The root document's tokens are always contiguous and
    final.
    """

    root_doc_id: str
    dependencies: list[SampleDependency]
    permutation: list[int]
    total_tokens: int
    separator_positions: list[int]
    tokens: list[int]
    strategy: str = "shuffle"
    bin_index: int | None = field(default=None, compare=False)


def ingest_documents(
    path: str | Path,
    limit: int | None = None,
    on_error: Callable[[int, str], None] | None = None,
) -> Iterator[Document]:
    """Stream documents from a line-delimited corpus file, in file order.

    Malformed lines (bad JSON, missing/empty fields, duplicate ids) are
    record-level errors: reported via ``on_error(line_no, message)`` (or
    logged) and skipped while the stream continues. An unreadable file
    raises.
    """

    def report(line_no: int, message: str) -> None:
        if on_error is not None:
            on_error(line_no, message)
        else:
            log.warning("%s line %d: %s", path, line_no, message)

    seen_ids: set[str] = set()
    yielded = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if limit is not None and yielded >= limit:
                break
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                report(line_no, f"invalid JSON: {exc}")
                continue
            if not isinstance(record, dict) or "id" not in record or "text" not in record:
                report(line_no, "record missing required fields id/text")
                continue
            doc_id = str(record["id"])
            text = record["text"]
            if not isinstance(text, str) or not text.strip():
                report(line_no, f"document {doc_id!r} has empty text")
                continue
            if doc_id in seen_ids:
                report(line_no, f"duplicate document id {doc_id!r}")
                continue
            seen_ids.add(doc_id)
            yielded += 1
            yield Document(id=doc_id, text=text, source_tag=str(record.get("source_tag", "")))


def tokenize_document(doc: Document, tokenizer: Tokenizer) -> TokenSequence:
    """Tokenize one document; deterministic for a fixed tokenizer."""
    if not doc.text.strip():
        raise EmptyDocument(f"document {doc.id!r} is empty")
    ids, offsets = tokenizer.encode(doc.text)
    if not ids:
        raise EmptyDocument(f"document {doc.id!r} has no tokens")
    return TokenSequence(doc_id=doc.id, tokens=ids, char_offsets=offsets, text=doc.text)


def _sample_record(sample: TrainingSample) -> dict:
    return {
        "schema_version": SAMPLE_SCHEMA_VERSION,
        "root_doc_id": sample.root_doc_id,
        "strategy": sample.strategy,
        "total_tokens": sample.total_tokens,
        "permutation": sample.permutation,
        "separator_positions": sample.separator_positions,
        "tokens": sample.tokens,
        "dependencies": [
            {
                "source_doc_id": dep.source_doc_id,
                "anchor_position": dep.anchor,
                "gain": dep.gain,
                "base_entropy": dep.base_entropy,
                "conditioned_entropy": dep.conditioned_entropy,
                "similarity": dep.similarity,
                "rank": dep.rank,
                "stream_start": dep.stream_start,
                "stream_len": dep.stream_len,
            }
            for dep in sample.dependencies
        ],
    }


def _sample_from_record(record: dict) -> TrainingSample:
    version = record.get("schema_version")
    if version != SAMPLE_SCHEMA_VERSION:
        raise PipelineError(f"unsupported sample schema_version {version!r}")
    deps = [
        SampleDependency(
            source_doc_id=d["source_doc_id"],
            anchor=int(d["anchor_position"]),
            gain=float(d["gain"]),
            base_entropy=float(d["base_entropy"]),
            conditioned_entropy=float(d["conditioned_entropy"]),
            similarity=float(d["similarity"]),
            rank=int(d["rank"]),
            stream_start=int(d["stream_start"]),
            stream_len=int(d["stream_len"]),
        )
        for d in record["dependencies"]
    ]
    return TrainingSample(
        root_doc_id=record["root_doc_id"],
        dependencies=deps,
        permutation=[int(i) for i in record["permutation"]],
        total_tokens=int(record["total_tokens"]),
        separator_positions=[int(i) for i in record["separator_positions"]],
        tokens=[int(t) for t in record["tokens"]],
        strategy=record.get("strategy", "shuffle"),
    )


def write_samples(samples: Iterable[TrainingSample], path: str | Path) -> int:
    """Write samples as line-delimited records; returns the count written."""
    count = 0
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for sample in samples:
                fh.write(json.dumps(_sample_record(sample)) + "\n")
                count += 1
    except OSError as exc:
        raise PipelineError(
            f"sample write failed after {count} records, partial file at {path}: {exc}"
        ) from exc
    return count


def read_samples(path: str | Path) -> Iterator[TrainingSample]:
    """Read back samples written by :func:`write_samples`."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield _sample_from_record(json.loads(line))
