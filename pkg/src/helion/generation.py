"""Scenario generation: extend a seed history with the most (or least)
probable events.

Up picks the argmax of the smoothed next-event distribution at each step,
down the argmin; ties break ascending by canonical token text. The chosen
event is fed back into the history before the next step, for both flavors.
Sequence markers and the unknown bucket are never candidates, so a k-step
request always yields k events.
"""

from __future__ import annotations

import enum
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .errors import EmptyVocabulary, MalformedCorpus, SessionExhausted
from .model import NGramModel
from .tokens import SpecialToken, Token, parse_token


class Flavor(enum.Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class Scenario:
    seed_history: tuple[Token, ...]
    events: tuple[Token, ...]
    flavor: Flavor
    order_used: int
    per_event_logprob: tuple[float, ...]


def _pick(model: NGramModel, history: list[Token], flavor: Flavor) -> tuple[Token, float]:
    if not model.vocab_events:
        raise EmptyVocabulary("model has no event vocabulary")
    sign = -1.0 if flavor is Flavor.UP else 1.0
    best: tuple[float, str, Token, float] | None = None
    for token, text in zip(model.vocab_events, model.vocab_texts):
        p = model.prob(token, history)
        key = (sign * p, text)
        if best is None or key < (best[0], best[1]):
            best = (sign * p, text, token, p)
    assert best is not None
    return best[2], best[3]


def generate(model: NGramModel, history: list[Token], k: int, flavor: Flavor) -> Scenario:
    """Extend history with k events chosen greedily per the flavor."""
    if k < 1:
        raise ValueError("k must be >= 1")
    cursor = list(history)
    events: list[Token] = []
    logprobs: list[float] = []
    for _ in range(k):
        token, p = _pick(model, cursor, flavor)
        events.append(token)
        logprobs.append(math.log2(p))
        cursor.append(token)
    return Scenario(
        seed_history=tuple(history),
        events=tuple(events),
        flavor=flavor,
        order_used=model.config.order,
        per_event_logprob=tuple(logprobs),
    )


class GenerationSession:
    """Incremental generation: step() yields exactly the events generate()
    would produce, one at a time. Single-owner mutable state; callers must
    serialize access.
    """

    def __init__(self, model: NGramModel, history: list[Token], flavor: Flavor, limit: int):
        if limit < 1:
            raise ValueError("limit must be >= 1")
        self.model = model
        self.flavor = flavor
        self.limit = limit
        self.seed_history = tuple(history)
        self.cursor = list(history)
        self.emitted: list[Token] = []
        self.logprobs: list[float] = []

    @property
    def remaining(self) -> int:
        return self.limit - len(self.emitted)

    def step(self) -> tuple[Token, float]:
        if self.remaining <= 0:
            raise SessionExhausted(f"session already emitted {self.limit} events")
        token, p = _pick(self.model, self.cursor, self.flavor)
        logprob = math.log2(p)
        self.cursor.append(token)
        self.emitted.append(token)
        self.logprobs.append(logprob)
        return token, logprob


def scenario_lines(scenario: Scenario) -> list[str]:
    return [
        f"{token.text}\t{logprob:.6f}"
        for token, logprob in zip(scenario.events, scenario.per_event_logprob)
    ]


def write_scenario(scenario: Scenario, path: Path) -> Path:
    """Write one scenario TSV (token<TAB>log2 prob per line), atomically."""
    path.parent.mkdir(parents=True, exist_ok=True)
    content = "".join(line + "\n" for line in scenario_lines(scenario))
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(content)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_outputs(up: Scenario, down: Scenario, directory: Path | str) -> tuple[Path, Path]:
    """Write up.tsv and down.tsv for a pair of scenarios sharing a seed."""
    if up.seed_history != down.seed_history:
        raise ValueError("up and down scenarios must share the same seed history")
    directory = Path(directory)
    up_path = write_scenario(up, directory / "up.tsv")
    down_path = write_scenario(down, directory / "down.tsv")
    return up_path, down_path


def read_scenario_tokens(source: str) -> list[Token]:
    """Parse the token column of a scenario TSV back into events."""
    tokens = []
    for lineno, line in enumerate(source.splitlines(), start=1):
        if not line.strip():
            continue
        text = line.split("\t")[0].strip()
        token = parse_token(text)
        if isinstance(token, SpecialToken):
            raise MalformedCorpus(f"line {lineno}: reserved form {text!r} in scenario")
        tokens.append(token)
    return tokens
