"""Interpolated n-gram language model over event sequences.

Smoothing is interpolated absolute discounting in the Kneser-Ney style: one
discount per order (auto-estimated from singleton/doubleton counts or fixed),
continuation counts for every order below the top, and a unigram level that
is itself interpolated with a uniform floor over the full candidate set so
every outcome has strictly positive probability.

Candidates are the event vocabulary plus the end-of-sequence marker and an
unknown-event bucket. The start marker is context only; it is never counted
or predicted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence, Union

from .errors import EmptyCorpus, EmptySequence, MalformedCorpus
from .scheduling import EventCorpus, EventSequence
from .tokens import SpecialToken, Token, parse_token

START = SpecialToken.SEQUENCE_START.value
END = SpecialToken.SEQUENCE_END.value
UNK = SpecialToken.UNKNOWN.value

Gram = tuple[str, ...]
Outcome = Union[Token, SpecialToken]

DISCOUNT_FLOOR = 0.05
DISCOUNT_CEIL = 0.95
DISCOUNT_FALLBACK = 0.5


@dataclass(frozen=True)
class ModelConfig:
    """order = history length + 1; discount None means auto-estimate."""

    order: int = 3
    discount: float | None = None

    def __post_init__(self):
        if not 2 <= self.order <= 5:
            raise ValueError(f"order must be in [2, 5], got {self.order}")
        if self.discount is not None and not 0.0 < self.discount < 1.0:
            raise ValueError("fixed discount must lie in (0, 1)")


@dataclass
class _OrderTables:
    """Per-order lookup tables derived from the gram counts."""

    grams: dict[Gram, int]
    context_totals: dict[Gram, int] = field(default_factory=dict)
    context_distinct: dict[Gram, int] = field(default_factory=dict)

    @classmethod
    def build(cls, grams: dict[Gram, int]) -> "_OrderTables":
        tables = cls(grams=grams)
        for gram, count in grams.items():
            ctx = gram[:-1]
            tables.context_totals[ctx] = tables.context_totals.get(ctx, 0) + count
            tables.context_distinct[ctx] = tables.context_distinct.get(ctx, 0) + 1
        return tables


class NGramModel:
    """Trained, immutable event-sequence model.

    Construct via train() or load(); do not mutate after construction.
    """

    def __init__(
        self,
        config: ModelConfig,
        counts: dict[int, dict[Gram, int]],
        vocab_texts: Sequence[str],
        total_events: int,
    ):
        self.config = config
        self.counts = counts
        self.vocab_texts = tuple(vocab_texts)
        self.total_events = total_events
        self.vocab_events = tuple(Token(*t.split(",")) for t in self.vocab_texts)
        # Full outcome alphabet: events, end marker, unknown bucket.
        self.candidate_texts = (*self.vocab_texts, END, UNK)
        self._vocab_set = set(self.vocab_texts)
        self.discounts = self._estimate_discounts()
        self._tables = self._derive_tables()

    # -- construction helpers -------------------------------------------

    def _estimate_discounts(self) -> dict[int, float]:
        if self.config.discount is not None:
            return {k: self.config.discount for k in range(1, self.config.order + 1)}
        discounts = {}
        for k in range(1, self.config.order + 1):
            values = self.counts[k].values()
            n1 = sum(1 for c in values if c == 1)
            n2 = sum(1 for c in values if c == 2)
            if n1 + 2 * n2 == 0:
                discounts[k] = DISCOUNT_FALLBACK
            else:
                raw = n1 / (n1 + 2 * n2)
                discounts[k] = min(max(raw, DISCOUNT_FLOOR), DISCOUNT_CEIL)
        return discounts

    def _derive_tables(self) -> dict[int, _OrderTables]:
        """Top order scores on raw counts; lower orders on continuation
        counts (distinct one-longer left contexts in the raw tables)."""
        n = self.config.order
        tables: dict[int, _OrderTables] = {n: _OrderTables.build(self.counts[n])}
        for k in range(1, n):
            cont: dict[Gram, int] = {}
            for gram in self.counts[k + 1]:
                suffix = gram[1:]
                cont[suffix] = cont.get(suffix, 0) + 1
            tables[k] = _OrderTables.build(cont)
        return tables

    # -- queries ---------------------------------------------------------

    def _normalize_history(self, history: Sequence[Token]) -> Gram:
        """Map to texts (OOV -> <unk>), trim to order-1, left-pad with <s>."""
        n = self.config.order
        texts = []
        for token in history:
            if not isinstance(token, Token):
                raise TypeError("history must contain event tokens only")
            texts.append(token.text if token.text in self._vocab_set else UNK)
        texts = texts[-(n - 1):]
        pad = n - 1 - len(texts)
        return (START,) * pad + tuple(texts)

    def _outcome_text(self, outcome: Outcome) -> str:
        if outcome is SpecialToken.SEQUENCE_END:
            return END
        if outcome is SpecialToken.UNKNOWN:
            return UNK
        if isinstance(outcome, Token):
            return outcome.text if outcome.text in self._vocab_set else UNK
        raise ValueError(f"{outcome} is not a predictable outcome")

    def _prob_text(self, w: str, h: Gram, k: int) -> float:
        if k == 1:
            t = self._tables[1]
            total = t.context_totals[()]
            count = t.grams.get((w,), 0)
            d = self.discounts[1]
            uniform = 1.0 / len(self.candidate_texts)
            backoff = d * t.context_distinct[()] / total
            return max(count - d, 0.0) / total + backoff * uniform
        t = self._tables[k]
        total = t.context_totals.get(h, 0)
        if total == 0:
            return self._prob_text(w, h[1:], k - 1)
        count = t.grams.get(h + (w,), 0)
        d = self.discounts[k]
        backoff = d * t.context_distinct[h] / total
        return max(count - d, 0.0) / total + backoff * self._prob_text(w, h[1:], k - 1)

    def prob(self, nxt: Outcome, history: Sequence[Token]) -> float:
        """Smoothed conditional probability of the next outcome.

        Total over the candidate set (vocabulary + end marker + unknown);
        strictly positive for every member of that set.
        """
        h = self._normalize_history(history)
        return self._prob_text(self._outcome_text(nxt), h, self.config.order)

    def next_distribution(self, history: Sequence[Token]) -> list[tuple[Outcome, float]]:
        """All candidates except the unknown bucket, most probable first.

        Ties break ascending by canonical text (the end marker sorts as
        "</s>"). Probabilities sum to 1 minus the unknown share.
        """
        h = self._normalize_history(history)
        n = self.config.order
        scored: list[tuple[float, str, Outcome]] = []
        for token, text in zip(self.vocab_events, self.vocab_texts):
            scored.append((self._prob_text(text, h, n), text, token))
        scored.append((self._prob_text(END, h, n), END, SpecialToken.SEQUENCE_END))
        scored.sort(key=lambda item: (-item[0], item[1]))
        return [(outcome, p) for p, _, outcome in scored]

    def sequence_logprob(self, seq: EventSequence) -> float:
        """log2 probability of the sequence including its end marker."""
        if not seq.tokens:
            raise EmptySequence("cannot score an empty sequence")
        n = self.config.order
        padded: list[str] = [START] * (n - 1)
        total = 0.0
        for token in seq.tokens:
            text = token.text if token.text in self._vocab_set else UNK
            h = tuple(padded[-(n - 1):])
            total += math.log2(self._prob_text(text, h, n))
            padded.append(text)
        h = tuple(padded[-(n - 1):])
        total += math.log2(self._prob_text(END, h, n))
        return total

    def perplexity(self, corpus: EventCorpus) -> float:
        """2 ** (-average log2 prob per predicted position)."""
        if not corpus.sequences:
            raise EmptyCorpus("cannot evaluate an empty corpus")
        total_logprob = 0.0
        positions = 0
        for seq in corpus.sequences:
            total_logprob += self.sequence_logprob(seq)
            positions += len(seq.tokens) + 1
        return 2.0 ** (-total_logprob / positions)

    # -- serialization ----------------------------------------------------

    def _payload(self) -> dict:
        return {
            "format": "helion-ngram-model",
            "version": 1,
            "config": {"order": self.config.order, "discount": self.config.discount},
            "vocab": list(self.vocab_texts),
            "total_events": self.total_events,
            "counts": {
                str(k): sorted([list(g), c] for g, c in grams.items())
                for k, grams in self.counts.items()
            },
        }

    def dump(self, sink: IO[str]) -> None:
        """Versioned JSON dump; load() restores a query-equivalent model."""
        json.dump(self._payload(), sink, sort_keys=True, separators=(",", ":"))

    def dumps(self) -> str:
        return json.dumps(self._payload(), sort_keys=True, separators=(",", ":"))


def load(source: IO[str] | IO[bytes] | str) -> NGramModel:
    """Restore a model from its JSON dump."""
    if isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedCorpus(f"model file is not valid JSON: {exc}") from None
    if payload.get("format") != "helion-ngram-model" or payload.get("version") != 1:
        raise MalformedCorpus("unrecognized model file format")
    config = ModelConfig(
        order=payload["config"]["order"], discount=payload["config"]["discount"]
    )
    counts = {
        int(k): {tuple(gram): count for gram, count in entries}
        for k, entries in payload["counts"].items()
    }
    return NGramModel(
        config=config,
        counts=counts,
        vocab_texts=payload["vocab"],
        total_events=payload["total_events"],
    )


def train(corpus: EventCorpus, config: ModelConfig = ModelConfig()) -> NGramModel:
    """Count all k-grams (k = 1..order) over padded sequences and freeze.

    Each sequence gets order-1 start markers and one end marker; windows are
    counted only where they end at a predicted position, so the start marker
    never appears as a unigram or as a context's extension.
    """
    sequences = [s for s in corpus.sequences if s.tokens]
    if not sequences:
        raise EmptyCorpus("training corpus has no nonempty sequences")
    n = config.order
    counts: dict[int, dict[Gram, int]] = {k: {} for k in range(1, n + 1)}
    vocab: dict[str, None] = {}
    total_events = 0
    for seq in sequences:
        texts = [t.text for t in seq.tokens]
        for t in texts:
            vocab.setdefault(t)
        total_events += len(texts)
        padded = [START] * (n - 1) + texts + [END]
        for pos in range(n - 1, len(padded)):
            for k in range(1, n + 1):
                gram = tuple(padded[pos - k + 1 : pos + 1])
                table = counts[k]
                table[gram] = table.get(gram, 0) + 1
    return NGramModel(
        config=config,
        counts=counts,
        vocab_texts=sorted(vocab),
        total_events=total_events,
    )


def corpus_vocab_size(corpus: EventCorpus) -> int:
    """Distinct event tokens in a corpus."""
    return len({t.text for s in corpus.sequences for t in s.tokens})


def parse_history(texts: Iterable[str]) -> list[Token]:
    """Parse history token texts, rejecting reserved forms."""
    history = []
    for text in texts:
        token = parse_token(text)
        if isinstance(token, SpecialToken):
            raise MalformedCorpus(f"reserved form {text!r} is not a history event")
        history.append(token)
    return history
