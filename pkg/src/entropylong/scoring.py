"""Next-token distributions and per-position predictive entropy.

A scorer is anything that maps a token prefix to a distribution over the
next token. Two implementations are provided: a smoothed n-gram model for
self-contained desk-scale runs, and an HTTP client for a remote scorer
service speaking the /score and /dist wire protocol.

Entropies are natural-log (nats) throughout.
"""

from __future__ import annotations

import logging
import time
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import requests

from .corpus_io import TokenSequence
from .errors import (
    ContextOverflow,
    InvalidDistribution,
    NoTrainingData,
    ScorerUnavailable,
)

log = logging.getLogger(__name__)

DIST_SUM_TOL = 1e-9


def entropy(probs: Sequence[float] | np.ndarray) -> float:
    """Shannon entropy of a next-token distribution, in nats.

    0 * ln 0 counts as 0. Raises InvalidDistribution if the vector has a
    negative entry or does not sum to 1 within tolerance.
    """
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise InvalidDistribution("distribution must be a non-empty vector")
    if np.any(p < 0):
        raise InvalidDistribution("distribution has negative entries")
    total = float(p.sum())
    if abs(total - 1.0) > DIST_SUM_TOL:
        raise InvalidDistribution(f"distribution sums to {total!r}, not 1")
    nz = p[p > 0]
    return max(float(-(nz * np.log(nz)).sum()), 0.0)


class Scorer(ABC):
    """Provider of next-token distributions over a fixed vocabulary."""

    @property
    @abstractmethod
    def vocab_size(self) -> int: ...

    @property
    @abstractmethod
    def max_context(self) -> int: ...

    @abstractmethod
    def next_token_distribution(self, prefix: Sequence[int]) -> np.ndarray:
        """Distribution over the token following ``prefix``. Deterministic."""

    def entropies(self, tokens: Sequence[int], positions: Sequence[int]) -> np.ndarray:
        """Entropy at each requested position; position t conditions on tokens[:t]."""
        return np.array(
            [entropy(self.next_token_distribution(tokens[:t])) for t in positions],
            dtype=np.float64,
        )

    def entropy_at(self, tokens: Sequence[int], position: int) -> float:
        return float(self.entropies(tokens, [position])[0])


@dataclass
class NGramModel:
    """Exact n-gram counts of a training corpus with add-k smoothing.

    ``counts[ctx]`` maps a context tuple (length 0..order-1) to successor
    counts; ``context_totals[ctx]`` is their sum. Immutable once trained.
    """

    order: int
    vocab_size: int
    smoothing_k: float
    counts: dict[tuple[int, ...], Counter] = field(default_factory=dict)
    context_totals: dict[tuple[int, ...], int] = field(default_factory=dict)


def train_ngram(
    corpus: Iterable[TokenSequence | Sequence[int]],
    order: int,
    smoothing_k: float,
    vocab_size: int,
) -> NGramModel:
    """Count all context lengths 0..order-1 over the corpus."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if smoothing_k <= 0:
        raise ValueError(f"smoothing_k must be > 0, got {smoothing_k}")
    counts: dict[tuple[int, ...], Counter] = {}
    n_seqs = 0
    for seq in corpus:
        tokens = seq.tokens if isinstance(seq, TokenSequence) else list(seq)
        n_seqs += 1
        for t, token in enumerate(tokens):
            for c in range(min(order - 1, t) + 1):
                ctx = tuple(tokens[t - c : t])
                bucket = counts.get(ctx)
                if bucket is None:
                    bucket = counts[ctx] = Counter()
                bucket[token] += 1
    if n_seqs == 0:
        raise NoTrainingData("n-gram training corpus is empty")
    totals = {ctx: sum(bucket.values()) for ctx, bucket in counts.items()}
    return NGramModel(
        order=order,
        vocab_size=vocab_size,
        smoothing_k=smoothing_k,
        counts=counts,
        context_totals=totals,
    )


class NGramScorer(Scorer):
    """Scorer backed by an NGramModel.

    With ``prefix_cache`` on (the default), n-gram occurrences inside the
    scored prefix are added to the trained counts before smoothing, so
    content prepended to a document shifts its next-token distributions
    the way in-context evidence shifts a neural model's. The model itself
    is never mutated and scoring stays a pure function of (model, prefix).
    """

    def __init__(self, model: NGramModel, prefix_cache: bool = True,
                 max_context: int = 2**31 - 1):
        self.model = model
        self.prefix_cache = prefix_cache
        self._max_context = max_context

    @classmethod
    def train(
        cls,
        corpus: Iterable[TokenSequence | Sequence[int]],
        order: int,
        smoothing_k: float,
        vocab_size: int,
        prefix_cache: bool = True,
    ) -> "NGramScorer":
        return cls(train_ngram(corpus, order, smoothing_k, vocab_size),
                   prefix_cache=prefix_cache)

    @property
    def vocab_size(self) -> int:
        return self.model.vocab_size

    @property
    def max_context(self) -> int:
        return self._max_context

    def next_token_distribution(self, prefix: Sequence[int]) -> np.ndarray:
        if len(prefix) > self._max_context:
            raise ContextOverflow(
                f"prefix of {len(prefix)} tokens exceeds max context {self._max_context}"
            )
        model = self.model
        c = min(model.order - 1, len(prefix))
        ctx = tuple(prefix[len(prefix) - c :]) if c else ()
        probs = np.full(model.vocab_size, model.smoothing_k, dtype=np.float64)
        static = model.counts.get(ctx)
        if static:
            idx = np.fromiter(static.keys(), dtype=np.int64, count=len(static))
            vals = np.fromiter(static.values(), dtype=np.float64, count=len(static))
            probs[idx] += vals
        if self.prefix_cache and c:
            arr = np.asarray(prefix, dtype=np.int64)
            n = arr.size - c  # windows that have a successor inside the prefix
            if n > 0:
                mask = np.ones(n, dtype=bool)
                for j, t in enumerate(ctx):
                    mask &= arr[j : j + n] == t
                successors = arr[c:][mask[: arr.size - c]]
                if successors.size:
                    np.add.at(probs, successors, 1.0)
        return probs / probs.sum()


class RemoteScorer(Scorer):
    """Client for a scorer service speaking POST /score and POST /dist.

    /score returns entropies (nats) for requested positions; /dist returns
    a full (possibly top-p truncated) next-token distribution, which the
    client renormalizes. Truncated responses are counted in
    ``truncated_responses`` for stats reporting.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0, retries: int = 2,
                 session: requests.Session | None = None):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.session = session or requests.Session()
        self.truncated_responses = 0
        self._info: dict | None = None

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                if method == "GET":
                    resp = self.session.get(self.endpoint + path, timeout=self.timeout)
                else:
                    resp = self.session.post(self.endpoint + path, json=payload,
                                             timeout=self.timeout)
                if resp.status_code >= 500:
                    last_exc = ScorerUnavailable(
                        f"{path} returned {resp.status_code}", attempts=attempt + 1)
                elif resp.status_code >= 400:
                    raise ScorerUnavailable(
                        f"{path} rejected request: {resp.status_code} {resp.text[:200]}",
                        attempts=attempt + 1,
                    )
                else:
                    return resp.json()
            except requests.RequestException as exc:
                last_exc = exc
            if attempt < self.retries:
                time.sleep(0.1 * 2**attempt)
        raise ScorerUnavailable(
            f"scorer at {self.endpoint} unreachable: {last_exc}",
            attempts=self.retries + 1,
        )

    @property
    def info(self) -> dict:
        if self._info is None:
            self._info = self._request("GET", "/info")
        return self._info

    @property
    def vocab_size(self) -> int:
        return int(self.info["vocab_size"])

    @property
    def max_context(self) -> int:
        return int(self.info["max_context"])

    def next_token_distribution(self, prefix: Sequence[int]) -> np.ndarray:
        if len(prefix) > self.max_context:
            raise ContextOverflow(
                f"prefix of {len(prefix)} tokens exceeds max context {self.max_context}"
            )
        data = self._request("POST", "/dist", {"tokens": [int(t) for t in prefix]})
        probs = np.asarray(data["probs"], dtype=np.float64)
        total = float(probs.sum())
        if total <= 0:
            raise InvalidDistribution("remote scorer returned a zero distribution")
        if abs(total - 1.0) > 1e-6:
            self.truncated_responses += 1
        return probs / total

    def entropies(self, tokens: Sequence[int], positions: Sequence[int]) -> np.ndarray:
        if len(tokens) > self.max_context:
            raise ContextOverflow(
                f"sequence of {len(tokens)} tokens exceeds max context {self.max_context}"
            )
        data = self._request(
            "POST",
            "/score",
            {"tokens": [int(t) for t in tokens], "positions": [int(p) for p in positions]},
        )
        if data.get("truncated"):
            self.truncated_responses += 1
        return np.asarray(data["entropies"], dtype=np.float64)


@dataclass
class EntropyProfile:
    """Per-position entropies of one document with population statistics."""

    doc_id: str
    entropies: np.ndarray
    mean: float
    std: float

    @classmethod
    def from_entropies(cls, doc_id: str, entropies: Sequence[float] | np.ndarray) -> "EntropyProfile":
        values = np.asarray(entropies, dtype=np.float64)
        return cls(
            doc_id=doc_id,
            entropies=values,
            mean=float(values.mean()),
            std=float(values.std()),  # population std: the doc is the population
        )

    def __len__(self) -> int:
        return int(self.entropies.size)


def profile_document(scorer: Scorer, seq: TokenSequence) -> EntropyProfile:
    """Entropy at every position of ``seq``; position t conditions on tokens[:t]."""
    if len(seq) < 1:
        raise ValueError(f"sequence {seq.doc_id!r} is empty")
    positions = list(range(len(seq)))
    try:
        values = scorer.entropies(seq.tokens, positions)
    except (ContextOverflow, ScorerUnavailable) as exc:
        if getattr(exc, "position", None) is None:
            exc.position = len(seq) - 1
        raise
    return EntropyProfile.from_entropies(seq.doc_id, values)
