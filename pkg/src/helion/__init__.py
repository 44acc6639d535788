"""Helion: event-sequence modeling and scenario-based testing for smart homes.

Pipeline: routines + execution indicators -> scheduled event corpus ->
interpolated n-gram model -> up/down scenarios -> execution on a virtual
smart-home platform.
"""

from .errors import (
    DuplicateRoutineId,
    EmptyCorpus,
    EmptyRoutineSet,
    EmptySequence,
    EmptyVocabulary,
    HelionError,
    IllegalState,
    MalformedCorpus,
    MalformedPolicy,
    MalformedRoutine,
    MalformedToken,
    MalformedVocabulary,
    SessionExhausted,
    UnknownEntity,
    UnknownRoutineId,
    UnknownToken,
)
from .generation import (
    Flavor,
    GenerationSession,
    Scenario,
    generate,
    read_scenario_tokens,
    write_outputs,
    write_scenario,
)
from .model import ModelConfig, NGramModel, load, parse_history, train
from .scheduling import (
    EventCorpus,
    EventSequence,
    Firing,
    ScheduleConfig,
    Weekday,
    build_corpus,
    dump_corpus,
    expand,
    frequency_band,
    load_corpus,
    schedule,
    time_window,
)
from .simulator import (
    BusEvent,
    Cause,
    Entity,
    EntityKind,
    ExecutionReport,
    PlatformState,
    PolicyRule,
    Severity,
    StateCondition,
    build_registry,
    call_service,
    execute_scenario,
    load_policies,
    replay_log,
    snapshot,
)
from .tokens import (
    DayRange,
    ExecutionIndicators,
    Frequency,
    Routine,
    SpecialToken,
    TimeRange,
    Token,
    Vocabulary,
    format_token,
    load_routines,
    load_vocabulary,
    parse_token,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
