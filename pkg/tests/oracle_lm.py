"""Brute-force reference for the smoothed next-event probability.

Independent of the package internals on purpose: counts are rebuilt here
with plain nested loops over padded text sequences, and the interpolated
absolute-discounting recursion is spelled out step by step. Test corpora
are tiny, so clarity beats speed.
"""

from __future__ import annotations

from collections import Counter

START = "<s>"
END = "</s>"
UNK = "<unk>"


def padded(seq: list[str], order: int) -> list[str]:
    return [START] * (order - 1) + list(seq) + [END]


def count_windows(sequences: list[list[str]], order: int, k: int) -> Counter:
    """Counts of k-grams whose last element is a predicted position."""
    counts: Counter = Counter()
    for seq in sequences:
        row = padded(seq, order)
        for end in range(order - 1, len(row)):
            counts[tuple(row[end - k + 1 : end + 1])] += 1
    return counts


def estimate_discount(counts: Counter, fixed: float | None) -> float:
    if fixed is not None:
        return fixed
    once = sum(1 for c in counts.values() if c == 1)
    twice = sum(1 for c in counts.values() if c == 2)
    if once + 2 * twice == 0:
        return 0.5
    return min(max(once / (once + 2 * twice), 0.05), 0.95)


class OracleModel:
    """Reference scorer over a list of token-text sequences."""

    def __init__(self, sequences: list[list[str]], order: int, fixed_discount: float | None = None):
        self.order = order
        self.sequences = [list(s) for s in sequences]
        self.vocab = sorted({t for s in sequences for t in s})
        self.candidates = [*self.vocab, END, UNK]
        self.raw = {k: count_windows(self.sequences, order, k) for k in range(1, order + 1)}
        self.discounts = {k: estimate_discount(self.raw[k], fixed_discount) for k in self.raw}
        # Continuation counts: distinct one-longer left contexts, per order.
        self.cont: dict[int, Counter] = {}
        for k in range(1, order):
            table: Counter = Counter()
            for gram in self.raw[k + 1]:
                table[gram[1:]] += 1
            self.cont[k] = table

    def _history(self, history: list[str]) -> tuple[str, ...]:
        mapped = [t if t in self.vocab else UNK for t in history]
        mapped = mapped[-(self.order - 1):]
        while len(mapped) < self.order - 1:
            mapped.insert(0, START)
        return tuple(mapped)

    def prob(self, w: str, history: list[str]) -> float:
        if w not in self.candidates:
            w = UNK
        return self._level(w, self._history(history), self.order)

    def _level(self, w: str, h: tuple[str, ...], k: int) -> float:
        if k == 1:
            table = self.cont[1]
            total = sum(table.values())
            distinct = len(table)
            d = self.discounts[1]
            uniform = 1.0 / len(self.candidates)
            top = table[(w,)] - d if table[(w,)] > d else 0.0
            return top / total + (d * distinct / total) * uniform
        table = self.raw[k] if k == self.order else self.cont[k]
        extensions = {g[-1]: c for g, c in table.items() if g[:-1] == h}
        total = sum(extensions.values())
        if total == 0:
            return self._level(w, h[1:], k - 1)
        d = self.discounts[k]
        count = extensions.get(w, 0)
        top = count - d if count > d else 0.0
        backoff = d * len(extensions) / total
        return top / total + backoff * self._level(w, h[1:], k - 1)
