"""Publish-subscribe instrumentation of every engine step.

Listeners run synchronously on the engine thread in subscription order, so a
listener may block (this is how the debugger pauses a run). A listener that
raises aborts the run with EngineFault.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

from .errors import EngineFault, StateError

if TYPE_CHECKING:
    from .engine import Fact

TOLD = "told"
DEQUEUED = "dequeued"
RULE_FIRED = "rule-fired"
FACT_STORED = "fact-stored"
FACT_REMOVED = "fact-removed"
FAILURE = "failure"
SUSPENDED = "suspended"
FIXPOINT = "fixpoint"
TX_BEGIN = "tx-begin"
TX_COMMIT = "tx-commit"
TX_PARTIAL_COMMIT = "tx-partial-commit"
TX_ROLLBACK = "tx-rollback"

EVENT_KINDS = (
    TOLD, DEQUEUED, RULE_FIRED, FACT_STORED, FACT_REMOVED,
    FAILURE, SUSPENDED, FIXPOINT,
    TX_BEGIN, TX_COMMIT, TX_PARTIAL_COMMIT, TX_ROLLBACK,
)


@dataclass(frozen=True, slots=True)
class Event:
    """One engine step. Unused payload fields stay at their defaults."""

    seq: int
    kind: str
    fact: "Fact | None" = None
    rule: int | None = None
    active: "Fact | None" = None
    partners: tuple = ()
    consumed: tuple = ()
    body: tuple = ()
    reason: str | None = None
    depth: int | None = None

    def facts(self) -> tuple:
        """Every fact referenced by the payload."""
        out = []
        if self.fact is not None:
            out.append(self.fact)
        if self.active is not None:
            out.append(self.active)
        out.extend(self.partners)
        out.extend(self.consumed)
        out.extend(self.body)
        return tuple(out)

    def involves_constraint(self, name: str) -> bool:
        return any(f.constraint == name for f in self.facts())

    def render(self) -> str:
        parts = [self.kind]
        if self.kind == RULE_FIRED:
            parts.append(f"rule={self.rule}")
            parts.append(f"active={self.active.render()}")
            parts.append("partners=[" + ", ".join(f.render() for f in self.partners) + "]")
            parts.append("consumed=[" + ", ".join(f.render() for f in self.consumed) + "]")
            parts.append("body=[" + ", ".join(f.render() for f in self.body) + "]")
        elif self.fact is not None:
            parts.append(self.fact.render())
        if self.reason is not None:
            parts.append(f"reason={self.reason}")
        if self.depth is not None:
            parts.append(f"depth={self.depth}")
        return " ".join(parts)


class EventBus:
    """Per-handler listener fan-out with a strictly increasing seq counter."""

    def __init__(self):
        self._listeners: dict[int, Callable[[Event], None]] = {}
        self._snapshot: tuple[Callable[[Event], None], ...] = ()
        self._next_id = 1
        self._seq = 0

    def subscribe(self, listener: Callable[[Event], None]) -> int:
        sid = self._next_id
        self._next_id += 1
        self._listeners[sid] = listener
        self._snapshot = tuple(self._listeners.values())
        return sid

    def unsubscribe(self, sid: int) -> None:
        if sid not in self._listeners:
            raise StateError("unknown-subscription", f"no subscription {sid}")
        del self._listeners[sid]
        self._snapshot = tuple(self._listeners.values())

    def emit(self, kind: str, **payload) -> Event:
        event = Event(seq=self._seq, kind=kind, **payload)
        self._seq += 1
        # the snapshot is rebuilt on (un)subscribe, so changes from inside a
        # listener take effect from the next event
        for listener in self._snapshot:
            try:
                listener(event)
            except EngineFault:
                raise
            except Exception as e:
                raise EngineFault(f"listener raised: {e}") from e
        return event


@dataclass(frozen=True)
class Breakpoint:
    """Pause target: a rule index, a constraint name, or step mode."""

    rule: int | None = None
    constraint: str | None = None
    step: bool = False

    def matches(self, event: Event) -> bool:
        if self.step:
            return event.kind == DEQUEUED
        if self.rule is not None:
            return event.kind == RULE_FIRED and event.rule == self.rule
        if self.constraint is not None:
            return event.involves_constraint(self.constraint)
        return False


class BreakpointSet:
    """Mutable breakpoint collection keyed by id."""

    def __init__(self):
        self._entries: dict[int, Breakpoint] = {}
        self._next_id = 1

    def add(self, bp: Breakpoint) -> int:
        bid = self._next_id
        self._next_id += 1
        self._entries[bid] = bp
        return bid

    def remove(self, bid: int) -> None:
        if bid not in self._entries:
            raise StateError("unknown-breakpoint", f"no breakpoint {bid}")
        del self._entries[bid]

    def entries(self) -> dict[int, Breakpoint]:
        return dict(self._entries)

    def matches(self, event: Event) -> bool:
        return any(bp.matches(event) for bp in self._entries.values())

    def __len__(self):
        return len(self._entries)
