"""Deterministic word-level tokenization with a frozen vocabulary.

The built-in tokenizer segments on word characters and single punctuation
marks, maps out-of-vocabulary tokens to a reserved UNK id, and records the
character span of every token so any token span can be mapped back to the
exact source text.
"""

from __future__ import annotations

import json
import re
from abc import ABC, abstractmethod
from collections import Counter
from pathlib import Path
from typing import Iterable

UNK_ID = 0
SEP_ID = 1
UNK_TOKEN = "<unk>"
SEP_TOKEN = "<sep>"

_SEGMENT_RE = re.compile(r"\w+|[^\w\s]")


def segment(text: str) -> list[tuple[str, int, int]]:
    """Split text into (token, start, end) pieces; offsets are char indices."""
    return [(m.group(0), m.start(), m.end()) for m in _SEGMENT_RE.finditer(text)]


class Tokenizer(ABC):
    """Immutable text <-> token-id codec with a fixed vocabulary."""

    @property
    @abstractmethod
    def vocab_size(self) -> int: ...

    @abstractmethod
    def encode(self, text: str) -> tuple[list[int], list[tuple[int, int]]]:
        """Return (token ids, per-token (start, end) char offsets)."""

    @abstractmethod
    def decode(self, ids: Iterable[int]) -> str:
        """Best-effort text for a token-id span (space joined)."""


class WordTokenizer(Tokenizer):
    """Word/punctuation tokenizer with a frozen, count-ordered vocabulary.

    Ids 0 and 1 are reserved for UNK and a separator token that never
    occurs in encoded text. Remaining ids are assigned by descending
    corpus frequency (ties broken lexically) so the mapping is a pure
    function of the training corpus.
    """

    def __init__(self, vocab: dict[str, int]):
        if vocab.get(UNK_TOKEN) != UNK_ID or vocab.get(SEP_TOKEN) != SEP_ID:
            raise ValueError("vocab must reserve ids 0 (<unk>) and 1 (<sep>)")
        self._vocab = dict(vocab)
        self._inverse = {i: t for t, i in self._vocab.items()}

    @classmethod
    def build(cls, texts: Iterable[str], max_vocab: int | None = None) -> "WordTokenizer":
        counts: Counter[str] = Counter()
        for text in texts:
            counts.update(tok for tok, _, _ in segment(text))
        ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if max_vocab is not None:
            ordered = ordered[: max(0, max_vocab - 2)]
        vocab = {UNK_TOKEN: UNK_ID, SEP_TOKEN: SEP_ID}
        for token, _ in ordered:
            vocab[token] = len(vocab)
        return cls(vocab)

    @property
    def vocab_size(self) -> int:
        return len(self._vocab)

    def token_id(self, token: str) -> int:
        return self._vocab.get(token, UNK_ID)

    def encode(self, text: str) -> tuple[list[int], list[tuple[int, int]]]:
        ids: list[int] = []
        offsets: list[tuple[int, int]] = []
        for token, start, end in segment(text):
            ids.append(self._vocab.get(token, UNK_ID))
            offsets.append((start, end))
        return ids, offsets

    def decode(self, ids: Iterable[int]) -> str:
        return " ".join(self._inverse.get(i, UNK_TOKEN) for i in ids)

    def save(self, path: str | Path) -> None:
        payload = {"schema_version": "1", "kind": "word", "vocab": self._vocab}
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "WordTokenizer":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("kind") != "word":
            raise ValueError(f"not a word tokenizer file: {path}")
        return cls({str(k): int(v) for k, v in payload["vocab"].items()})
