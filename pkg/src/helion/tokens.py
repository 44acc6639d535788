"""Event tokens, vocabularies, routines, and their textual formats.

A token is one home-automation event: a <device, attribute, action> triple.
The canonical text form is ``device,attribute,action`` (lowercase, no
whitespace). Three reserved forms exist for sequence modeling: ``<s>``,
``</s>``, and ``<unk>``; they are never valid event tokens.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from typing import IO, Iterable, Union

from .errors import (
    DuplicateRoutineId,
    MalformedRoutine,
    MalformedToken,
    MalformedVocabulary,
    UnknownToken,
)

IDENTIFIER_RE = re.compile(r"[a-z][a-z0-9_]*\Z")


class SpecialToken(enum.Enum):
    """Reserved sequence markers; values are the exact text forms."""

    SEQUENCE_START = "<s>"
    SEQUENCE_END = "</s>"
    UNKNOWN = "<unk>"


RESERVED_FORMS = {t.value for t in SpecialToken}


@dataclass(frozen=True, order=True)
class Token:
    """One home-automation event.

    All three fields must be lowercase snake_case identifiers.
    """

    device: str
    attribute: str
    action: str

    def __post_init__(self):
        for field in (self.device, self.attribute, self.action):
            if not IDENTIFIER_RE.match(field):
                raise MalformedToken(
                    f"field {field!r} is not a lowercase snake_case identifier"
                )

    @property
    def text(self) -> str:
        return f"{self.device},{self.attribute},{self.action}"

    def __str__(self) -> str:
        return self.text


AnyToken = Union[Token, SpecialToken]


def parse_token(text: str) -> AnyToken:
    """Parse canonical token text into a Token, or a SpecialToken for the
    reserved forms.

    Raises MalformedToken on wrong field count, illegal characters, or an
    empty field.
    """
    if not text:
        raise MalformedToken("empty token text")
    if text in RESERVED_FORMS:
        return SpecialToken(text)
    fields = text.split(",")
    if len(fields) != 3:
        raise MalformedToken(
            f"expected 3 comma-separated fields, got {len(fields)}: {text!r}"
        )
    return Token(*fields)


def format_token(token: AnyToken) -> str:
    """Canonical text form; inverse of parse_token on its own output."""
    if isinstance(token, SpecialToken):
        return token.value
    return token.text


class TimeRange(enum.Enum):
    EARLY_MORNING = "early_morning"
    MORNING = "morning"
    NOON = "noon"
    AFTERNOON = "afternoon"
    EVENING = "evening"
    NIGHT = "night"
    LATE_NIGHT = "late_night"
    ANY = "any"


class DayRange(enum.Enum):
    MOSTLY_WEEKDAYS = "mostly_weekdays"
    MOSTLY_WEEKENDS = "mostly_weekends"
    ANY = "any"


class Frequency(enum.Enum):
    MANY_TIMES_A_DAY = "many_times_a_day"
    FEW_TIMES_A_DAY = "few_times_a_day"
    ONCE_A_DAY = "once_a_day"
    FEW_TIMES_A_WEEK = "few_times_a_week"
    ONCE_A_WEEK = "once_a_week"
    FEW_TIMES_A_MONTH = "few_times_a_month"


@dataclass(frozen=True)
class ExecutionIndicators:
    """User-supplied hints about when and how often a routine runs."""

    time_range: TimeRange
    day_range: DayRange
    frequency: Frequency


@dataclass(frozen=True)
class Routine:
    """A trigger-action rule: IF trigger THEN actions, plus indicators."""

    id: str
    trigger: Token
    actions: tuple[Token, ...]
    indicators: ExecutionIndicators

    def __post_init__(self):
        if not self.actions:
            raise MalformedRoutine(f"routine {self.id!r} has no actions")

    def tokens(self) -> tuple[Token, ...]:
        """Trigger followed by actions, in emission order."""
        return (self.trigger, *self.actions)


class Vocabulary:
    """The set of allowed (device, attribute) pairs and their actions.

    Equality ignores entry order; action order within an entry is preserved
    (it determines an entity's initial state).
    """

    def __init__(self, entries: Iterable[tuple[str, str, tuple[str, ...]]] = ()):
        self._entries: dict[tuple[str, str], tuple[str, ...]] = {}
        for device, attribute, actions in entries:
            self._add(device, attribute, actions)

    def _add(self, device: str, attribute: str, actions: tuple[str, ...]):
        for field in (device, attribute, *actions):
            if not IDENTIFIER_RE.match(field):
                raise MalformedVocabulary(f"bad identifier {field!r}")
        if not actions:
            raise MalformedVocabulary(f"empty action list for {device},{attribute}")
        if len(set(actions)) != len(actions):
            raise MalformedVocabulary(f"duplicate action for {device},{attribute}")
        key = (device, attribute)
        if key in self._entries:
            raise MalformedVocabulary(f"duplicate entry {device},{attribute}")
        self._entries[key] = tuple(actions)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self._entries == other._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def entries(self) -> list[tuple[str, str, tuple[str, ...]]]:
        return [(d, a, acts) for (d, a), acts in self._entries.items()]

    def actions_for(self, device: str, attribute: str) -> tuple[str, ...] | None:
        return self._entries.get((device, attribute))

    def validate(self, token: Token) -> bool:
        """True iff (device, attribute) is known and the action is allowed.

        Never raises; anything that is not a plain Token is invalid.
        """
        if not isinstance(token, Token):
            return False
        allowed = self._entries.get((token.device, token.attribute))
        return allowed is not None and token.action in allowed

    def all_tokens(self) -> list[Token]:
        """Every valid token, in entry order then action order."""
        return [
            Token(d, a, action)
            for (d, a), actions in self._entries.items()
            for action in actions
        ]


def load_vocabulary(source: IO[bytes] | IO[str] | str) -> Vocabulary:
    """Load a vocabulary from TSV text.

    One entry per line: ``device<TAB>attribute<TAB>action1|action2|...``.
    Lines starting with ``#`` and blank lines are ignored.
    """
    text = _read_text(source)
    vocab = Vocabulary()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise MalformedVocabulary(
                f"line {lineno}: expected 3 tab-separated fields, got {len(parts)}"
            )
        device, attribute, actions_field = parts
        actions = tuple(a for a in actions_field.split("|"))
        try:
            vocab._add(device, attribute, actions)
        except MalformedVocabulary as exc:
            raise MalformedVocabulary(f"line {lineno}: {exc}") from None
    return vocab


def load_routines(source: IO[bytes] | IO[str] | str, vocab: Vocabulary) -> list[Routine]:
    """Load routines from a JSON array and validate every token against vocab.

    Raises MalformedRoutine for structural problems, UnknownToken when a
    token is not in the vocabulary, and DuplicateRoutineId for repeated ids.
    """
    text = _read_text(source)
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRoutine(f"invalid JSON: {exc}") from None
    return routines_from_obj(raw, vocab)


def routines_from_obj(raw: object, vocab: Vocabulary) -> list[Routine]:
    """Build validated routines from already-parsed JSON data."""
    if not isinstance(raw, list):
        raise MalformedRoutine("routine file must be a JSON array")
    routines: list[Routine] = []
    seen_ids: set[str] = set()
    for i, item in enumerate(raw):
        routine = _routine_from_dict(item, i, vocab)
        if routine.id in seen_ids:
            raise DuplicateRoutineId(f"duplicate routine id {routine.id!r}")
        seen_ids.add(routine.id)
        routines.append(routine)
    return routines


def _routine_from_dict(item: object, index: int, vocab: Vocabulary) -> Routine:
    if not isinstance(item, dict):
        raise MalformedRoutine(f"routine #{index} is not an object")
    where = f"routine #{index}"
    rid = item.get("id")
    if not isinstance(rid, str) or not rid:
        raise MalformedRoutine(f"{where}: missing or empty id")
    where = f"routine {rid!r}"

    trigger_text = item.get("trigger")
    if not isinstance(trigger_text, str):
        raise MalformedRoutine(f"{where}: trigger must be a single token string")
    trigger = _event_token(trigger_text, where, vocab)

    actions_raw = item.get("actions")
    if not isinstance(actions_raw, list) or not actions_raw:
        raise MalformedRoutine(f"{where}: actions must be a nonempty array")
    actions = tuple(_event_token(a, where, vocab) for a in actions_raw)

    ind_raw = item.get("indicators")
    if not isinstance(ind_raw, dict):
        raise MalformedRoutine(f"{where}: missing indicators object")
    try:
        indicators = ExecutionIndicators(
            time_range=TimeRange(ind_raw["time_range"]),
            day_range=DayRange(ind_raw["day_range"]),
            frequency=Frequency(ind_raw["frequency"]),
        )
    except (KeyError, ValueError) as exc:
        raise MalformedRoutine(f"{where}: bad indicators: {exc}") from None

    return Routine(id=rid, trigger=trigger, actions=actions, indicators=indicators)


def _event_token(text: object, where: str, vocab: Vocabulary) -> Token:
    if not isinstance(text, str):
        raise MalformedRoutine(f"{where}: token must be a string")
    try:
        token = parse_token(text)
    except MalformedToken as exc:
        raise MalformedRoutine(f"{where}: {exc}") from None
    if isinstance(token, SpecialToken):
        raise MalformedRoutine(f"{where}: reserved form {text!r} is not an event")
    if not vocab.validate(token):
        raise UnknownToken(text, context=where)
    return token


def _read_text(source: IO[bytes] | IO[str] | str) -> str:
    if isinstance(source, str):
        return source
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data
