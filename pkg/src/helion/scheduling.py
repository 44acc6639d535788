"""Informed scheduling: expand routines into month-long event sequences.

Each routine's execution indicators (time range, day range, frequency) are
turned into concrete firings on a minute-resolution timeline. Scheduling is
fully deterministic for a given (routines, config) pair; every routine draws
from its own RNG stream derived from the config seed and the routine id, so
a routine's firings do not depend on which other routines are present.
"""

from __future__ import annotations

import enum
import hashlib
import json
import random
from dataclasses import dataclass
from typing import IO, Sequence

from .errors import (
    DuplicateRoutineId,
    EmptyRoutineSet,
    MalformedCorpus,
    MalformedRoutine,
    MalformedToken,
    UnknownRoutineId,
)
from .tokens import (
    DayRange,
    Frequency,
    Routine,
    SpecialToken,
    TimeRange,
    Token,
    Vocabulary,
    parse_token,
    routines_from_obj,
)

MINUTES_PER_DAY = 1440
DAYS_PER_WEEK = 7
DAYS_PER_MONTH = 30

# Half-open [start, end) minute-of-day spans for each time-range label.
TIME_WINDOWS: dict[TimeRange, tuple[int, int]] = {
    TimeRange.EARLY_MORNING: (300, 480),
    TimeRange.MORNING: (480, 660),
    TimeRange.NOON: (660, 840),
    TimeRange.AFTERNOON: (840, 1020),
    TimeRange.EVENING: (1020, 1260),
    TimeRange.NIGHT: (1260, 1440),
    TimeRange.LATE_NIGHT: (0, 300),
    TimeRange.ANY: (0, MINUTES_PER_DAY),
}


class Period(enum.Enum):
    DAY = "day"
    WEEK = "week"
    MONTH = "month"


PERIOD_DAYS = {Period.DAY: 1, Period.WEEK: DAYS_PER_WEEK, Period.MONTH: DAYS_PER_MONTH}

# (per-period min, per-period max, period) for each frequency label.
FREQUENCY_BANDS: dict[Frequency, tuple[int, int, Period]] = {
    Frequency.MANY_TIMES_A_DAY: (5, 10, Period.DAY),
    Frequency.FEW_TIMES_A_DAY: (2, 4, Period.DAY),
    Frequency.ONCE_A_DAY: (1, 1, Period.DAY),
    Frequency.FEW_TIMES_A_WEEK: (2, 4, Period.WEEK),
    Frequency.ONCE_A_WEEK: (1, 1, Period.WEEK),
    Frequency.FEW_TIMES_A_MONTH: (2, 4, Period.MONTH),
}


class Weekday(enum.IntEnum):
    MONDAY = 0
    TUESDAY = 1
    WEDNESDAY = 2
    THURSDAY = 3
    FRIDAY = 4
    SATURDAY = 5
    SUNDAY = 6


WEEKEND = {Weekday.SATURDAY, Weekday.SUNDAY}


def time_window(time_range: TimeRange) -> tuple[int, int]:
    """Half-open (start, end) minute-of-day window for a time-range label."""
    return TIME_WINDOWS[time_range]


def frequency_band(frequency: Frequency) -> tuple[int, int, Period]:
    """(min, max, period) firing-count band for a frequency label."""
    return FREQUENCY_BANDS[frequency]


@dataclass(frozen=True)
class ScheduleConfig:
    days: int = DAYS_PER_MONTH
    seed: int = 0
    weekday_bias: float = 0.9
    start_weekday: Weekday = Weekday.MONDAY

    def __post_init__(self):
        if self.days < 1:
            raise ValueError("days must be >= 1")
        if not 0.0 <= self.weekday_bias <= 1.0:
            raise ValueError("weekday_bias must be in [0, 1]")


@dataclass(frozen=True, order=True)
class Firing:
    """One scheduled execution: minutes since schedule start + routine id."""

    timestamp: int
    routine_id: str


@dataclass(frozen=True)
class EventSequence:
    """An ordered run of event tokens, e.g. one simulated user-month."""

    tokens: tuple[Token, ...]
    origin: str | None = None


@dataclass(frozen=True)
class EventCorpus:
    sequences: tuple[EventSequence, ...]

    def total_events(self) -> int:
        return sum(len(s.tokens) for s in self.sequences)


def _routine_rng(seed: int, routine_id: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}\x1f{routine_id}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def _weekday_of(day: int, cfg: ScheduleConfig) -> Weekday:
    return Weekday((int(cfg.start_weekday) + day) % 7)


def _period_chunks(days: int, period: Period) -> list[tuple[int, int, bool]]:
    """Split the horizon into (start_day, end_day, complete) period chunks."""
    span = PERIOD_DAYS[period]
    chunks = []
    start = 0
    while start < days:
        end = min(start + span, days)
        chunks.append((start, end, end - start == span))
        start = end
    return chunks


def _pick_day(
    rng: random.Random,
    weekday_pool: list[int],
    weekend_pool: list[int],
    day_range: DayRange,
    weekday_bias: float,
) -> int | None:
    """Draw one day without replacement, honoring the day-range bias.

    For mostly_weekdays each firing goes to a weekend day with probability
    1 - weekday_bias (mirrored for mostly_weekends); if the chosen pool is
    exhausted the other one is used.
    """
    if day_range is DayRange.ANY:
        total = len(weekday_pool) + len(weekend_pool)
        if total == 0:
            return None
        idx = rng.randrange(total)
        if idx < len(weekday_pool):
            return weekday_pool.pop(idx)
        return weekend_pool.pop(idx - len(weekday_pool))

    weekend_prob = (
        1.0 - weekday_bias if day_range is DayRange.MOSTLY_WEEKDAYS else weekday_bias
    )
    prefer_weekend = rng.random() < weekend_prob
    pool = weekend_pool if prefer_weekend else weekday_pool
    if not pool:
        pool = weekday_pool if prefer_weekend else weekend_pool
    if not pool:
        return None
    return pool.pop(rng.randrange(len(pool)))


def _schedule_routine(routine: Routine, cfg: ScheduleConfig) -> list[Firing]:
    rng = _routine_rng(cfg.seed, routine.id)
    lo, hi, period = frequency_band(routine.indicators.frequency)
    win_start, win_end = time_window(routine.indicators.time_range)
    day_range = routine.indicators.day_range

    firings: list[Firing] = []
    for start, end, _complete in _period_chunks(cfg.days, period):
        count = rng.randint(lo, hi)
        if period is Period.DAY:
            # The chunk is a single day; day-range bias cannot apply because
            # the frequency band pins the per-day count.
            days_chosen = [start] * count
        else:
            weekday_pool = [
                d for d in range(start, end) if _weekday_of(d, cfg) not in WEEKEND
            ]
            weekend_pool = [
                d for d in range(start, end) if _weekday_of(d, cfg) in WEEKEND
            ]
            days_chosen = []
            for _ in range(count):
                day = _pick_day(rng, weekday_pool, weekend_pool, day_range, cfg.weekday_bias)
                if day is None:
                    break  # partial chunk ran out of days; undershoot only
                days_chosen.append(day)
        for day in days_chosen:
            minute = rng.randrange(win_start, win_end)
            firings.append(Firing(day * MINUTES_PER_DAY + minute, routine.id))
    return firings


def schedule(routines: Sequence[Routine], cfg: ScheduleConfig) -> list[Firing]:
    """Produce the sorted firing list for a routine set.

    Deterministic for fixed inputs; ties on timestamp break by routine id.
    """
    if not routines:
        raise EmptyRoutineSet("cannot schedule an empty routine set")
    ids = [r.id for r in routines]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise DuplicateRoutineId(f"duplicate routine ids: {', '.join(dupes)}")
    firings: list[Firing] = []
    for routine in routines:
        firings.extend(_schedule_routine(routine, cfg))
    firings.sort()
    return firings


def expand(firings: Sequence[Firing], routines: Sequence[Routine]) -> EventSequence:
    """Turn firings into the token sequence: trigger then actions, per firing."""
    by_id = {r.id: r for r in routines}
    tokens: list[Token] = []
    for firing in firings:
        routine = by_id.get(firing.routine_id)
        if routine is None:
            raise UnknownRoutineId(f"firing references unknown routine {firing.routine_id!r}")
        tokens.extend(routine.tokens())
    return EventSequence(tokens=tuple(tokens))


def build_corpus(
    users: Sequence[tuple[Sequence[Routine], ScheduleConfig]],
    labels: Sequence[str] | None = None,
) -> EventCorpus:
    """One event sequence per (routines, config) user entry, in input order."""
    sequences = []
    for i, (routines, cfg) in enumerate(users):
        label = labels[i] if labels is not None else f"user{i:02d}"
        firings = schedule(routines, cfg)
        seq = expand(firings, routines)
        sequences.append(EventSequence(tokens=seq.tokens, origin=label))
    return EventCorpus(sequences=tuple(sequences))


@dataclass(frozen=True)
class UserRoutines:
    """One user's routine set as loaded from a routines file."""

    label: str
    routines: tuple[Routine, ...]
    seed: int | None = None


def load_user_routines(
    source: IO[bytes] | IO[str] | str, vocab: Vocabulary
) -> list[UserRoutines]:
    """Load a routines file: either a bare routine array (one user) or
    ``{"users": [{"id", "routines", "seed"?}, ...]}`` for a whole cohort."""
    if isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRoutine(f"invalid JSON: {exc}") from None
    if isinstance(raw, list):
        return [UserRoutines(label="user00", routines=tuple(routines_from_obj(raw, vocab)))]
    if isinstance(raw, dict) and isinstance(raw.get("users"), list):
        users = []
        seen: set[str] = set()
        for i, entry in enumerate(raw["users"]):
            if not isinstance(entry, dict):
                raise MalformedRoutine(f"user #{i} is not an object")
            label = entry.get("id") or f"user{i:02d}"
            if label in seen:
                raise MalformedRoutine(f"duplicate user id {label!r}")
            seen.add(label)
            seed = entry.get("seed")
            if seed is not None and not isinstance(seed, int):
                raise MalformedRoutine(f"user {label!r}: seed must be an integer")
            routines = tuple(routines_from_obj(entry.get("routines", []), vocab))
            users.append(UserRoutines(label=label, routines=routines, seed=seed))
        return users
    raise MalformedRoutine("routines file must be a JSON array or a users object")


def derive_user_seed(base_seed: int, index: int, label: str) -> int:
    """Stable per-user seed so one base seed drives a whole cohort."""
    digest = hashlib.sha256(f"{base_seed}\x1f{index}\x1f{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def corpus_from_users(
    users: Sequence[UserRoutines], days: int, base_seed: int
) -> EventCorpus:
    """Schedule and expand every user; explicit per-user seeds win over the
    derived ones."""
    entries = []
    labels = []
    for i, user in enumerate(users):
        seed = user.seed if user.seed is not None else derive_user_seed(base_seed, i, user.label)
        entries.append((user.routines, ScheduleConfig(days=days, seed=seed)))
        labels.append(user.label)
    return build_corpus(entries, labels=labels)


def dump_corpus(corpus: EventCorpus) -> str:
    """Corpus TSV text: one sequence per line, tab-separated token texts."""
    return "".join(
        "\t".join(t.text for t in seq.tokens) + "\n" for seq in corpus.sequences
    )


def load_corpus(source: IO[bytes] | IO[str] | str) -> EventCorpus:
    """Parse corpus TSV; blank lines are ignored."""
    if isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    sequences = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        tokens = []
        for cell in line.split("\t"):
            cell = cell.strip()
            if not cell:
                continue
            try:
                token = parse_token(cell)
            except MalformedToken as exc:
                raise MalformedCorpus(f"line {lineno}: {exc}") from None
            if isinstance(token, SpecialToken):
                raise MalformedCorpus(
                    f"line {lineno}: reserved form {cell!r} is not a corpus event"
                )
            tokens.append(token)
        if tokens:
            sequences.append(EventSequence(tokens=tuple(tokens), origin=f"line{lineno}"))
    return EventCorpus(sequences=tuple(sequences))
