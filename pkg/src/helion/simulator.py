"""Virtual smart-home platform: entity registry, service calls, event bus,
automation propagation, and policy checking.

Entities are derived from the vocabulary, one per (device, attribute), with
``device_attribute`` ids. Every state change goes through call_service and
is appended to the bus log, so replaying the log from initial states always
reproduces the current snapshot.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import IO, Sequence

from .errors import (
    EmptyVocabulary,
    IllegalState,
    MalformedPolicy,
    MalformedVocabulary,
    UnknownEntity,
)
from .generation import Scenario
from .tokens import Routine, Token, Vocabulary


class EntityKind(enum.Enum):
    BOOLEAN = "boolean"
    SELECT = "select"


class Cause(enum.Enum):
    SCENARIO = "scenario"
    AUTOMATION = "automation"
    MANUAL = "manual"


class Severity(enum.Enum):
    WARN = "warn"
    VIOLATION = "violation"


@dataclass
class Entity:
    """Stateful stand-in for one device attribute."""

    entity_id: str
    kind: EntityKind
    states: tuple[str, ...]
    current: str


@dataclass(frozen=True)
class BusEvent:
    seq_no: int
    entity_id: str
    old_state: str
    new_state: str
    cause: Cause

    def to_dict(self) -> dict:
        return {
            "seq_no": self.seq_no,
            "entity_id": self.entity_id,
            "old_state": self.old_state,
            "new_state": self.new_state,
            "cause": self.cause.value,
        }


@dataclass(frozen=True)
class StateCondition:
    """``entity IS state`` or ``entity IS NOT state``."""

    entity_id: str
    state: str
    negate: bool = False

    def holds(self, states: dict[str, str]) -> bool:
        match = states.get(self.entity_id) == self.state
        return not match if self.negate else match


@dataclass(frozen=True)
class PolicyRule:
    """Violated when every `when` condition holds and any `require` fails."""

    id: str
    description: str
    when: tuple[StateCondition, ...]
    require: tuple[StateCondition, ...]
    severity: Severity

    def violated_by(self, states: dict[str, str]) -> bool:
        if not all(c.holds(states) for c in self.when):
            return False
        return any(not c.holds(states) for c in self.require)


@dataclass
class PlatformState:
    entities: dict[str, Entity]
    bus_log: list[BusEvent] = field(default_factory=list)
    violations: list[tuple[int, str]] = field(default_factory=list)
    policies: list[PolicyRule] = field(default_factory=list)


@dataclass
class AutomationFiring:
    routine_id: str
    trigger_seq_no: int
    event: BusEvent

    def to_dict(self) -> dict:
        return {
            "routine_id": self.routine_id,
            "trigger_seq_no": self.trigger_seq_no,
            **self.event.to_dict(),
        }


@dataclass
class ViolationRecord:
    seq_no: int
    rule_id: str
    severity: Severity
    description: str

    def to_dict(self) -> dict:
        return {
            "seq_no": self.seq_no,
            "rule_id": self.rule_id,
            "severity": self.severity.value,
            "description": self.description,
        }


@dataclass
class ExecutionReport:
    applied: list[BusEvent] = field(default_factory=list)
    automation_firings: list[AutomationFiring] = field(default_factory=list)
    chain_limit_hits: int = 0
    violations: list[ViolationRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "applied": [e.to_dict() for e in self.applied],
            "automation_firings": [f.to_dict() for f in self.automation_firings],
            "chain_limit_hits": self.chain_limit_hits,
            "violations": [v.to_dict() for v in self.violations],
        }


def entity_id_for(token: Token) -> str:
    return f"{token.device}_{token.attribute}"


def build_registry(vocab: Vocabulary) -> PlatformState:
    """One entity per (device, attribute); two states make a boolean entity,
    more make a select; initial state is the first listed action."""
    if not vocab:
        raise EmptyVocabulary("cannot build a registry from an empty vocabulary")
    entities: dict[str, Entity] = {}
    for device, attribute, actions in sorted(vocab.entries()):
        entity_id = f"{device}_{attribute}"
        if entity_id in entities:
            raise MalformedVocabulary(
                f"entity id collision: {entity_id!r} maps to two vocabulary entries"
            )
        kind = EntityKind.BOOLEAN if len(actions) == 2 else EntityKind.SELECT
        entities[entity_id] = Entity(
            entity_id=entity_id, kind=kind, states=actions, current=actions[0]
        )
    return PlatformState(entities=entities)


def call_service(
    ps: PlatformState, entity_id: str, target_state: str, cause: Cause
) -> BusEvent:
    """Set an entity to a target state and broadcast the change.

    Setting the current state again still appends an event (command-bus
    semantics: every executed token is broadcast).
    """
    entity = ps.entities.get(entity_id)
    if entity is None:
        raise UnknownEntity(f"unknown entity {entity_id!r}")
    if target_state not in entity.states:
        raise IllegalState(
            f"entity {entity_id!r} does not allow state {target_state!r}"
        )
    event = BusEvent(
        seq_no=len(ps.bus_log) + 1,
        entity_id=entity_id,
        old_state=entity.current,
        new_state=target_state,
        cause=cause,
    )
    entity.current = target_state
    ps.bus_log.append(event)
    return event


def snapshot(ps: PlatformState) -> dict[str, str]:
    """Read-only copy of every entity's current state."""
    return {eid: entity.current for eid, entity in ps.entities.items()}


def _check_policies(ps: PlatformState, event: BusEvent, report: ExecutionReport) -> None:
    states = snapshot(ps)
    for rule in ps.policies:
        if rule.violated_by(states):
            ps.violations.append((event.seq_no, rule.id))
            report.violations.append(
                ViolationRecord(
                    seq_no=event.seq_no,
                    rule_id=rule.id,
                    severity=rule.severity,
                    description=rule.description,
                )
            )


def execute_scenario(
    ps: PlatformState,
    scenario: Scenario | Sequence[Token],
    automations: Sequence[Routine] = (),
    max_chain: int = 8,
) -> ExecutionReport:
    """Apply scenario events in order, fire matching automations, and check
    policies after every bus event.

    Automation propagation is breadth-first from each scenario event and is
    capped at max_chain automation events per scenario event; hitting the
    cap truncates the remaining chain and counts one chain-limit hit.

    UnknownEntity/IllegalState abort execution; the raised error carries the
    partial report and the offending token text.
    """
    events = scenario.events if isinstance(scenario, Scenario) else tuple(scenario)
    report = ExecutionReport()
    for token in events:
        entity_id = entity_id_for(token)
        try:
            event = call_service(ps, entity_id, token.action, Cause.SCENARIO)
        except (UnknownEntity, IllegalState) as exc:
            exc.report = report
            exc.token_text = token.text
            raise
        report.applied.append(event)
        _check_policies(ps, event, report)
        _propagate(ps, token, event.seq_no, automations, max_chain, report)
    return report


def _propagate(
    ps: PlatformState,
    applied_token: Token,
    seq_no: int,
    automations: Sequence[Routine],
    max_chain: int,
    report: ExecutionReport,
) -> None:
    # Queue of (routine, seq_no of its trigger event), in declaration order.
    queue = [(r, seq_no) for r in automations if r.trigger == applied_token]
    emitted = 0
    while queue:
        routine, trigger_seq = queue.pop(0)
        for action in routine.actions:
            if emitted >= max_chain:
                report.chain_limit_hits += 1
                return
            event = call_service(
                ps, entity_id_for(action), action.action, Cause.AUTOMATION
            )
            emitted += 1
            report.automation_firings.append(
                AutomationFiring(routine_id=routine.id, trigger_seq_no=trigger_seq, event=event)
            )
            _check_policies(ps, event, report)
            queue.extend(
                (r, event.seq_no) for r in automations if r.trigger == action
            )


def replay_log(
    initial_states: dict[str, str], bus_log: Sequence[BusEvent]
) -> dict[str, str]:
    """Fold the bus log over initial states; the result must match the live
    snapshot (used by audits and tests)."""
    states = dict(initial_states)
    for event in bus_log:
        states[event.entity_id] = event.new_state
    return states


def load_policies(source: IO[bytes] | IO[str] | str, ps: PlatformState) -> list[PolicyRule]:
    """Parse the policy JSON and check entity references against the registry."""
    if isinstance(source, str):
        text = source
    else:
        data = source.read()
        text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedPolicy(f"invalid JSON: {exc}") from None
    return policies_from_obj(raw, ps)


def policies_from_obj(raw: object, ps: PlatformState) -> list[PolicyRule]:
    if not isinstance(raw, list):
        raise MalformedPolicy("policy file must be a JSON array")
    rules = []
    seen: set[str] = set()
    for i, item in enumerate(raw):
        if not isinstance(item, dict):
            raise MalformedPolicy(f"rule #{i} is not an object")
        rule_id = item.get("id")
        if not isinstance(rule_id, str) or not rule_id:
            raise MalformedPolicy(f"rule #{i}: missing id")
        if rule_id in seen:
            raise MalformedPolicy(f"duplicate rule id {rule_id!r}")
        seen.add(rule_id)
        try:
            severity = Severity(item.get("severity", "violation"))
        except ValueError:
            raise MalformedPolicy(f"rule {rule_id!r}: bad severity") from None
        rules.append(
            PolicyRule(
                id=rule_id,
                description=str(item.get("description", "")),
                when=_conditions(item.get("when", []), rule_id, ps),
                require=_conditions(item.get("require", []), rule_id, ps),
                severity=severity,
            )
        )
    return rules


def _conditions(raw: object, rule_id: str, ps: PlatformState) -> tuple[StateCondition, ...]:
    if not isinstance(raw, list):
        raise MalformedPolicy(f"rule {rule_id!r}: conditions must be an array")
    conditions = []
    for item in raw:
        if not isinstance(item, dict) or "entity" not in item:
            raise MalformedPolicy(f"rule {rule_id!r}: bad condition {item!r}")
        entity_id = item["entity"]
        if "is" in item:
            state, negate = item["is"], False
        elif "is_not" in item:
            state, negate = item["is_not"], True
        else:
            raise MalformedPolicy(f"rule {rule_id!r}: condition needs is/is_not")
        entity = ps.entities.get(entity_id)
        if entity is None:
            raise MalformedPolicy(f"rule {rule_id!r}: unknown entity {entity_id!r}")
        if state not in entity.states:
            raise MalformedPolicy(
                f"rule {rule_id!r}: entity {entity_id!r} has no state {state!r}"
            )
        conditions.append(StateCondition(entity_id=entity_id, state=state, negate=negate))
    return tuple(conditions)
