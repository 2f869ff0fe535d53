"""A deliberately naive re-implementation of the run semantics, used only to
differential-test the engine.

The store is a flat list scanned linearly, there is no occurrence index
(every rule's heads are re-scanned per dequeued fact), and matching is
re-derived from scratch. Guard implementations are shared with the engine on
purpose: the machinery under test is matching and firing, not the guards.
Ordering decisions mirror the engine's documented ones (candidates in key
order, first remaining head outermost, replace on insert, terminal failure)
so the two event streams must be identical.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .engine import FAIL, Fact, Handler, RunStatus, SuspendReason
from .errors import EngineFault, TellOnFailed
from .events import (
    DEQUEUED,
    FACT_REMOVED,
    FACT_STORED,
    FAILURE,
    FIXPOINT,
    RULE_FIRED,
    SUSPENDED,
    TOLD,
    Event,
)
from .rules import WILDCARD, Literal
from .values import type_check, values_equal


@dataclass
class OracleResult:
    goal: tuple[Fact, ...]
    store: tuple[Fact, ...]  # sorted by (constraint, key)
    status: RunStatus
    events: list[Event] = field(default_factory=list)

    def kinds(self) -> list[str]:
        return [e.kind for e in self.events]


class _NaiveRun:
    def __init__(self, handler: Handler, goal_limit: int | None, max_steps: int | None):
        self.rules = handler.rules
        self.registry = handler._registry
        self.goal_limit = goal_limit
        self.store: list[Fact] = []
        self.goal: deque[Fact] = deque()
        self.status = RunStatus.FIXPOINT
        self.events: list[Event] = []
        self.seq = 0
        self.max_steps = max_steps
        self.steps = 0
        self._pass_candidates: dict[str, list[Fact]] = {}

    def emit(self, kind, **payload):
        self.events.append(Event(seq=self.seq, kind=kind, **payload))
        self.seq += 1

    def tell(self, fact: Fact):
        if self.status is RunStatus.FAILED:
            raise TellOnFailed()
        self.goal.append(fact)
        self.emit(TOLD, fact=fact)
        self.main_loop()

    def main_loop(self):
        forced = False
        limit_tripped = False
        while not (forced or limit_tripped) and self.goal:
            fact = self.goal.popleft()
            self.emit(DEQUEUED, fact=fact)
            self.steps += 1
            if self.max_steps is not None and self.steps >= self.max_steps:
                # mirrors the engine-side budget listener calling force_exit()
                forced = True
            if fact.constraint == FAIL:
                self.status = RunStatus.FAILED
                self.emit(FAILURE)
                return
            self.fire_all_rules(fact)
            if self.goal_limit is not None and len(self.goal) > self.goal_limit:
                limit_tripped = True
        if self.goal:
            self.status = RunStatus.SUSPENDED
            reason = SuspendReason.FORCED if forced else SuspendReason.LIMIT
            self.emit(SUSPENDED, reason=reason.value)
        else:
            self.status = RunStatus.FIXPOINT
            self.emit(FIXPOINT)

    def candidates(self, name: str) -> list[Fact]:
        # the store never changes inside one firing pass, so the sorted scan
        # is shared across the pass (cleared in fire_all_rules)
        found = self._pass_candidates.get(name)
        if found is None:
            found = [f for f in self.store if f.constraint == name]
            found.sort(key=Fact.key_order)
            self._pass_candidates[name] = found
        return found

    def match_atom(self, atom, fact: Fact, frame: dict) -> dict | None:
        out = frame
        for patterns, values in (
            (atom.key_patterns, fact.key),
            (atom.data_patterns, fact.data),
        ):
            if patterns is None:
                continue
            for pat, value in zip(patterns, values):
                if pat is WILDCARD:
                    continue
                if isinstance(pat, Literal):
                    if not values_equal(pat.value, value):
                        return None
                else:
                    if pat.symbol in out:
                        if not values_equal(out[pat.symbol], value):
                            return None
                    else:
                        if out is frame:
                            out = dict(frame)
                        out[pat.symbol] = value
        return out

    def all_combos(self, heads, frame):
        if not heads:
            return [((), frame)]
        results = []

        def rec(i, fr, chosen):
            if i == len(heads):
                results.append((tuple(chosen), fr))
                return
            for cand in self.candidates(heads[i].signature.name):
                if cand in chosen:
                    continue
                nxt = self.match_atom(heads[i], cand, fr)
                if nxt is not None:
                    rec(i + 1, nxt, chosen + [cand])

        rec(0, frame, [])
        return results

    def eval_guards(self, guards, frame):
        for guard in guards:
            args = []
            for kind, payload in guard.plan:
                if kind == "bind":
                    value = frame.get(payload)
                    if value is None:
                        raise EngineFault(
                            f"symbol {payload.name!r} unset in guard {guard.name!r}"
                        )
                    args.append(value)
                else:
                    args.append(payload)
            out = self.registry.invoke(guard.name, guard.negated, args, frame)
            if out is None:
                return None
            if out:
                frame = {**frame, **out}
        return frame

    def instantiate(self, atom, frame) -> Fact:
        values = []
        for (kind, payload), tag in zip(atom.plan, atom.tags):
            if kind == "lit":
                value = payload
            else:
                value = frame.get(payload)
                if value is None:
                    raise EngineFault(
                        f"symbol {payload.name!r} unset while instantiating "
                        f"{atom.signature.name}"
                    )
            if not type_check(value, tag):
                raise EngineFault(
                    f"body fact {atom.signature.name} violates its signature"
                )
            values.append(value)
        n = atom.signature.key_arity
        return Fact(atom.signature.name, tuple(values[:n]), tuple(values[n:]))

    def remove_fact(self, fact: Fact):
        for i, f in enumerate(self.store):
            if f == fact:
                del self.store[i]
                self.emit(FACT_REMOVED, fact=fact)
                return
        raise EngineFault("removal of a fact not in the naive store")

    def fire_all_rules(self, fact: Fact):
        self._pass_candidates = {}
        removal: list[Fact] = []
        for rule in self.rules:
            for hpos, head in enumerate(rule.heads):
                if head.passive or head.signature.name != fact.constraint:
                    continue
                frame0 = self.match_atom(head, fact, {})
                if frame0 is None:
                    continue
                rest = [h for i, h in enumerate(rule.heads) if i != hpos]
                fired = False
                partners: list[Fact] = []
                consumed_partners: list[Fact] = []
                bodies: list[Fact] = []
                for combo, frame in self.all_combos(rest, frame0):
                    final = self.eval_guards(rule.guards, frame)
                    if final is None:
                        continue
                    fired = True
                    for atom in rule.body:
                        bf = self.instantiate(atom, final)
                        self.goal.append(bf)
                        bodies.append(bf)
                    for helem, pfact in zip(rest, combo):
                        if pfact not in partners:
                            partners.append(pfact)
                        if not helem.keep:
                            if pfact not in removal:
                                removal.append(pfact)
                            if pfact not in consumed_partners:
                                consumed_partners.append(pfact)
                if not fired:
                    continue
                consumes_active = not head.keep
                consumed = ([fact] if consumes_active else []) + consumed_partners
                self.emit(
                    RULE_FIRED,
                    rule=rule.index,
                    active=fact,
                    partners=tuple(partners),
                    consumed=tuple(consumed),
                    body=tuple(bodies),
                )
                if consumes_active:
                    for f in removal:
                        self.remove_fact(f)
                    return
        for f in removal:
            self.remove_fact(f)
        old = next(
            (f for f in self.store if f.constraint == fact.constraint and f.key == fact.key),
            None,
        )
        if old is not None:
            self.remove_fact(old)
        self.store.append(fact)
        self.emit(FACT_STORED, fact=fact)


def oracle_run(
    handler: Handler,
    tells: list[Fact],
    goal_limit: int | None = None,
    max_steps: int | None = None,
) -> OracleResult:
    """Run the naive semantics over a compiled handler's rule program.

    ``tells`` are processed in order; telling stops if the run fails or
    suspends. ``max_steps`` bounds total dequeues, forcing an exit exactly
    like a listener calling force_exit() on the engine side.
    """
    run = _NaiveRun(handler, goal_limit, max_steps)
    for fact in tells:
        if run.status is RunStatus.FAILED:
            break
        run.tell(fact)
        if run.status is RunStatus.SUSPENDED:
            break
    store = sorted(run.store, key=lambda f: (f.constraint, f.key_order()))
    return OracleResult(tuple(run.goal), tuple(store), run.status, run.events)
