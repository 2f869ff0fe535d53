"""Nested savepoints over the full handler state (goal, store, status).

Snapshots are value copies isolated from later mutation; the stack nests
arbitrarily and rollback restores the saved state exactly, including a
Failed status (the over-constrained recovery path).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from .errors import NoOpenTransaction

if TYPE_CHECKING:
    from .engine import Fact, RunStatus


@dataclass(frozen=True)
class Snapshot:
    goal: tuple
    store: dict
    status: object
    suspend_reason: object


class TransactionStack:
    def __init__(self):
        self._stack: list[Snapshot] = []

    @property
    def depth(self) -> int:
        return len(self._stack)

    def begin(self, snapshot: Snapshot) -> int:
        self._stack.append(snapshot)
        return len(self._stack)

    def commit(self) -> int:
        if not self._stack:
            raise NoOpenTransaction()
        self._stack.pop()
        return len(self._stack)

    def partial_commit(self, snapshot: Snapshot) -> int:
        if not self._stack:
            raise NoOpenTransaction()
        self._stack[-1] = snapshot
        return len(self._stack)

    def rollback(self) -> tuple[Snapshot, int]:
        if not self._stack:
            raise NoOpenTransaction()
        snap = self._stack.pop()
        return snap, len(self._stack)
