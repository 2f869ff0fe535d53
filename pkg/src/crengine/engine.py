"""The operational core: fact store, goal queue, main loop, and rule firing.

The handler state is (goal, store, status). Telling a fact appends it to the
goal FIFO and runs the main loop: facts are dequeued one at a time; a `fail`
fact fails the run; otherwise every applicable rule fires for the fact.

Firing walks the occurrence index for the fact's constraint in (rule, head
position) order. For each matching active head element, every combination of
pairwise-distinct store facts matching the remaining head elements is tried
(outermost loop over the first remaining head, candidates in key order); when
all guards succeed the body facts are appended to the goal and the matched
facts without `keep` are marked for removal. Marked facts stay matchable
until the pass ends, so rules that fire in one pass behave as if they fired
simultaneously. If a firing head element lacks `keep`, the dequeued fact is
consumed and the remaining rules are cut off; otherwise the fact is inserted
into the store at the end of the pass, replacing any fact with the same key
(each constraint is a partial function from key tuple to data tuple).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, Sequence

from . import events as ev
from .errors import (
    ARITY_MISMATCH,
    DECLARATION_AFTER_SETUP,
    DUPLICATE_CONSTRAINT,
    INVALID_PATTERN,
    RESERVED_NAME,
    UNKNOWN_CONSTRAINT,
    BeginDuringRun,
    EngineFault,
    FactTypeError,
    HandlerFault,
    ResumeNotSuspended,
    StateError,
    TellOnFailed,
)
from .guards import GuardRegistry
from .rules import (
    WILDCARD,
    Bind,
    BodyAtom,
    ConstraintSignature,
    GuardAtom,
    HeadElement,
    Literal,
    PatternAtom,
    Rule,
    RuleBuilder,
    compile_rules,
    match_head,
)
from .transactions import Snapshot, TransactionStack
from .values import (
    SymbolRef,
    Tag,
    Value,
    as_tag,
    from_python,
    render_value,
    tuple_sort_key,
    type_check,
    values_equal,
)

FAIL = "fail"
WILDCARD_NAME = "_"


class RunStatus(Enum):
    FIXPOINT = "fixpoint"
    SUSPENDED = "suspended"
    FAILED = "failed"
    RUNNING = "running"


class SuspendReason(Enum):
    FORCED = "forced"
    LIMIT = "limit"


@dataclass(frozen=True)
class Fact:
    """One constraint literal: constraint name, key tuple, data tuple."""

    constraint: str
    key: tuple[Value, ...]
    data: tuple[Value, ...]

    def render(self) -> str:
        text = f"{self.constraint}({', '.join(render_value(v) for v in self.key)})"
        if self.data:
            text += f" -> ({', '.join(render_value(v) for v in self.data)})"
        return text

    def key_order(self):
        cached = self.__dict__.get("_korder")
        if cached is None:
            cached = tuple_sort_key(self.key)
            object.__setattr__(self, "_korder", cached)
        return cached


class Store:
    """Per constraint, an ordered map from key tuple to the stored fact.

    Key-ordered iteration is cached per constraint; reads vastly outnumber
    mutations during rule firing.
    """

    def __init__(self, names: Iterable[str] = ()):
        self._maps: dict[str, dict[tuple[Value, ...], Fact]] = {n: {} for n in names}
        self._sorted: dict[str, list[Fact]] = {}

    def add_constraint(self, name: str) -> None:
        self._maps[name] = {}

    def facts_of(self, name: str) -> list[Fact]:
        cached = self._sorted.get(name)
        if cached is None:
            cached = sorted(self._maps[name].values(), key=Fact.key_order)
            self._sorted[name] = cached
        return cached

    def get(self, name: str, key: tuple[Value, ...]) -> Fact | None:
        return self._maps[name].get(key)

    def put(self, fact: Fact) -> Fact | None:
        """Insert, returning the replaced fact if the key was taken."""
        old = self._maps[fact.constraint].get(fact.key)
        self._maps[fact.constraint][fact.key] = fact
        self._sorted.pop(fact.constraint, None)
        return old

    def remove(self, fact: Fact) -> None:
        del self._maps[fact.constraint][fact.key]
        self._sorted.pop(fact.constraint, None)

    def all_facts(self) -> list[Fact]:
        out = []
        for name in sorted(self._maps):
            out.extend(self.facts_of(name))
        return out

    def copy_maps(self) -> dict:
        return {name: dict(m) for name, m in self._maps.items()}

    def load_maps(self, maps: dict) -> None:
        self._maps = {name: dict(m) for name, m in maps.items()}
        self._sorted = {}


class _ConstraintDecl:
    """Result of ``Handler.constraint``; ``with_`` adds the data fields."""

    def __init__(self, handler: "Handler", name: str, key_tags: tuple[Tag, ...]):
        self._handler = handler
        self._name = name
        self._key_tags = key_tags
        self._register(())

    def _register(self, data_tags: tuple[Tag, ...]) -> None:
        sig = ConstraintSignature(self._name, self._key_tags, data_tags)
        self._handler._signatures[self._name] = sig

    def with_(self, *data_types) -> "_ConstraintDecl":
        self._register(tuple(as_tag(t) for t in data_types))
        return self


class Handler:
    """A unit of constraint declarations, rules, guards, and private state.

    Build one in a setup phase (symbols, constraints, guards, rules), then
    ``compile()`` it; afterwards drive it with ``tell``/``select`` and the
    transaction operations. A handler instance is single-threaded.
    """

    def __init__(self, name: str = "handler", goal_limit: int | None = None):
        self.name = name
        self.goal_limit = goal_limit
        self._next_sid = 0
        self._symbols: list[SymbolRef] = []
        self.wildcard = self._new_symbol(WILDCARD_NAME)
        self.fail = self._new_symbol(FAIL)
        self._signatures: dict[str, ConstraintSignature] = {
            FAIL: ConstraintSignature(FAIL, (), ())
        }
        self._rules: list[Rule] = []
        self._registry = GuardRegistry()
        self._occurrences: dict[str, tuple[tuple[int, int], ...]] = {}
        self._compiled = False

        self._goal: deque[Fact] = deque()
        self._store = Store([FAIL])
        self._status = RunStatus.FIXPOINT
        self._suspend_reason: SuspendReason | None = None
        self._user_forced = False
        self._bus = ev.EventBus()
        self._tx = TransactionStack()

    # -- setup phase ---------------------------------------------------

    def _new_symbol(self, name: str) -> SymbolRef:
        sym = SymbolRef(name, self._next_sid, self)
        self._next_sid += 1
        self._symbols.append(sym)
        return sym

    def symbol(self, name: str) -> SymbolRef:
        if name in (FAIL, WILDCARD_NAME):
            raise HandlerFault(RESERVED_NAME, f"symbol {name!r} is predefined")
        return self._new_symbol(name)

    def symbols(self, *names: str) -> tuple[SymbolRef, ...]:
        return tuple(self.symbol(n) for n in names)

    def constraint(self, name: SymbolRef | str, *key_types) -> _ConstraintDecl:
        self._require_setup()
        name = name.name if isinstance(name, SymbolRef) else name
        if name in (FAIL, WILDCARD_NAME):
            raise HandlerFault(RESERVED_NAME, f"{name!r} cannot be declared")
        if name in self._signatures:
            raise HandlerFault(DUPLICATE_CONSTRAINT, f"{name!r} already declared")
        decl = _ConstraintDecl(self, name, tuple(as_tag(t) for t in key_types))
        self._store.add_constraint(name)
        return decl

    def register_guard(self, name, fn, params, variadic_tail=None, returns_truth=True):
        self._require_setup()
        return self._registry.register(name, fn, params, variadic_tail, returns_truth)

    def when(self, symbol: SymbolRef, *patterns) -> RuleBuilder:
        self._require_setup()
        rule = Rule(index=len(self._rules) + 1)
        rule.heads.append(self._make_head(symbol, patterns, rule.index))
        self._rules.append(rule)
        return RuleBuilder(self, rule)

    def compile(self) -> "Handler":
        """End the setup phase: validate rules and build the occurrence index."""
        self._occurrences = compile_rules(self._rules, self._registry)
        self._occ_plan = {}
        for name, entries in self._occurrences.items():
            plan = []
            for rpos, hpos in entries:
                rule = self._rules[rpos]
                rest = tuple(h for i, h in enumerate(rule.heads) if i != hpos)
                plan.append((rule, rule.heads[hpos], rest))
            self._occ_plan[name] = tuple(plan)
        self._compiled = True
        return self

    def _require_setup(self):
        if self._compiled:
            raise HandlerFault(DECLARATION_AFTER_SETUP, "handler already compiled")

    def _require_compiled(self):
        if not self._compiled:
            raise EngineFault("handler is not compiled")

    # -- pattern and atom construction (used by RuleBuilder) ------------

    def _signature_for(self, symbol, rule_index=None) -> ConstraintSignature:
        name = symbol.name if isinstance(symbol, SymbolRef) else symbol
        sig = self._signatures.get(name)
        if sig is None:
            raise HandlerFault(
                UNKNOWN_CONSTRAINT, f"constraint {name!r} is not declared",
                rule_index=rule_index,
            )
        return sig

    def _pattern(self, x, rule_index=None) -> PatternAtom:
        if isinstance(x, SymbolRef):
            if x.owner is not self:
                raise HandlerFault(
                    INVALID_PATTERN, f"symbol {x.name!r} belongs to another handler",
                    rule_index=rule_index,
                )
            if x.name == WILDCARD_NAME:
                return WILDCARD
            if x.name == FAIL:
                raise HandlerFault(
                    RESERVED_NAME, "fail cannot be used as a value pattern",
                    rule_index=rule_index,
                )
            return Bind(x)
        if x is WILDCARD:
            return WILDCARD
        try:
            return Literal(from_python(x))
        except ValueError as e:
            raise HandlerFault(INVALID_PATTERN, str(e), rule_index=rule_index) from e

    def _make_head(self, symbol, patterns, rule_index) -> HeadElement:
        sig = self._signature_for(symbol, rule_index)
        if len(patterns) != sig.key_arity:
            raise HandlerFault(
                ARITY_MISMATCH,
                f"{sig.name} declares {sig.key_arity} keys, got {len(patterns)}",
                rule_index=rule_index,
            )
        keys = tuple(self._pattern(p, rule_index) for p in patterns)
        return HeadElement(sig, keys)

    def _make_body(self, symbol, patterns, rule_index) -> BodyAtom:
        sig = self._signature_for(symbol, rule_index)
        if len(patterns) != sig.key_arity:
            raise HandlerFault(
                ARITY_MISMATCH,
                f"{sig.name} declares {sig.key_arity} keys, got {len(patterns)}",
                rule_index=rule_index,
            )
        keys = tuple(self._pattern(p, rule_index) for p in patterns)
        return BodyAtom(sig, keys)

    # -- state inspection ------------------------------------------------

    @property
    def status(self) -> RunStatus:
        return self._status

    @property
    def suspend_reason(self) -> SuspendReason | None:
        return self._suspend_reason

    @property
    def rules(self) -> tuple[Rule, ...]:
        return tuple(self._rules)

    @property
    def signatures(self) -> dict[str, ConstraintSignature]:
        return dict(self._signatures)

    @property
    def occurrences(self) -> dict[str, tuple[tuple[int, int], ...]]:
        return dict(self._occurrences)

    @property
    def depth(self) -> int:
        return self._tx.depth

    def goal_facts(self) -> tuple[Fact, ...]:
        return tuple(self._goal)

    def store_facts(self) -> tuple[Fact, ...]:
        return tuple(self._store.all_facts())

    def select(
        self, constraint: SymbolRef | str, key_pattern: Sequence | None = None
    ) -> list[Fact]:
        """All stored facts of a constraint whose keys match the pattern.

        Pattern entries are values or wildcards (the handler's wildcard
        symbol or rules.WILDCARD); facts come back in key order.
        """
        sig = self._signature_for(constraint)
        facts = list(self._store.facts_of(sig.name))
        if key_pattern is None:
            return facts
        pattern = [self._pattern(p) for p in key_pattern]
        if len(pattern) != sig.key_arity:
            raise HandlerFault(
                ARITY_MISMATCH,
                f"{sig.name} declares {sig.key_arity} keys, got {len(pattern)}",
            )
        if any(isinstance(p, Bind) for p in pattern):
            raise HandlerFault(INVALID_PATTERN, "select patterns are values or wildcards")
        out = []
        for fact in facts:
            ok = True
            for pat, value in zip(pattern, fact.key):
                if pat is WILDCARD:
                    continue
                if not values_equal(pat.value, value):
                    ok = False
                    break
            if ok:
                out.append(fact)
        return out

    # -- events ----------------------------------------------------------

    def subscribe(self, listener: Callable[[ev.Event], None]) -> int:
        return self._bus.subscribe(listener)

    def unsubscribe(self, sid: int) -> None:
        self._bus.unsubscribe(sid)

    # -- telling and running ----------------------------------------------

    def make_fact(self, constraint: SymbolRef | str, values: Sequence) -> Fact:
        """Build and type-check a fact; positional values are keys then data."""
        sig = self._signature_for(constraint)
        n, m = sig.key_arity, sig.data_arity
        if len(values) != n + m:
            raise HandlerFault(
                ARITY_MISMATCH,
                f"{sig.name} takes {n} keys and {m} data values, got {len(values)}",
            )
        wrapped = [from_python(v) for v in values]
        for v, tag in zip(wrapped, list(sig.key_tags) + list(sig.data_tags)):
            if not type_check(v, tag):
                raise FactTypeError(
                    f"{render_value(v)} does not fit {tag.name} in {sig.name}"
                )
        return Fact(sig.name, tuple(wrapped[:n]), tuple(wrapped[n:]))

    def tell(self, constraint: SymbolRef | str, *values) -> RunStatus:
        return self.tell_fact(self.make_fact(constraint, values))

    def tell_fact(self, fact: Fact) -> RunStatus:
        self._require_compiled()
        if self._status is RunStatus.FAILED:
            raise TellOnFailed()
        if self._status is RunStatus.RUNNING:
            raise StateError("busy", "handler is running")
        fact = self.make_fact(fact.constraint, list(fact.key) + list(fact.data))
        self._goal.append(fact)
        self._bus.emit(ev.TOLD, fact=fact)
        return self._main_loop()

    def run(self) -> RunStatus:
        """Run the main loop on the current state (a tell without a fact)."""
        self._require_compiled()
        if self._status is RunStatus.FAILED:
            raise StateError("run-on-failed", "cannot run a failed handler")
        if self._status is RunStatus.RUNNING:
            raise StateError("busy", "handler is running")
        return self._main_loop()

    def resume(self) -> RunStatus:
        if self._status is not RunStatus.SUSPENDED:
            raise ResumeNotSuspended()
        return self._main_loop()

    def force_exit(self) -> None:
        """Ask the main loop to exit after the current firing pass completes.

        Call from a guard (or listener) during a run; a no-op otherwise.
        """
        if self._status is RunStatus.RUNNING:
            self._user_forced = True

    def _main_loop(self) -> RunStatus:
        self._status = RunStatus.RUNNING
        self._suspend_reason = None
        self._user_forced = False
        limit_tripped = False
        try:
            while not (self._user_forced or limit_tripped) and self._goal:
                fact = self._goal.popleft()
                self._bus.emit(ev.DEQUEUED, fact=fact)
                if fact.constraint == FAIL:
                    self._status = RunStatus.FAILED
                    self._bus.emit(ev.FAILURE)
                    return self._status
                self._fire_all_rules(fact)
                if self.goal_limit is not None and len(self._goal) > self.goal_limit:
                    limit_tripped = True
        finally:
            if self._status is RunStatus.RUNNING:
                if self._goal:
                    self._status = RunStatus.SUSPENDED
                    self._suspend_reason = (
                        SuspendReason.FORCED if self._user_forced else SuspendReason.LIMIT
                    )
                else:
                    self._status = RunStatus.FIXPOINT
            self._user_forced = False
        if self._status is RunStatus.SUSPENDED:
            self._bus.emit(ev.SUSPENDED, reason=self._suspend_reason.value)
        else:
            self._bus.emit(ev.FIXPOINT)
        return self._status

    def _fire_all_rules(self, fact: Fact) -> None:
        removal: dict[Fact, None] = {}
        for rule, head, rest in self._occ_plan.get(fact.constraint, ()):
            frame0 = match_head(head, fact, {})
            if frame0 is None:
                continue
            fired = False
            partners_seen: dict[Fact, None] = {}
            consumed_partners: dict[Fact, None] = {}
            bodies: list[Fact] = []
            for combo, frame in self._combinations(rest, frame0):
                final = self._eval_guards(rule.guards, frame)
                if final is None:
                    continue
                fired = True
                for atom in rule.body:
                    bf = self._instantiate(atom, final)
                    self._goal.append(bf)
                    bodies.append(bf)
                for helem, pfact in zip(rest, combo):
                    partners_seen.setdefault(pfact)
                    if not helem.keep:
                        removal.setdefault(pfact)
                        consumed_partners.setdefault(pfact)
            if not fired:
                continue
            consumes_active = not head.keep
            consumed = ([fact] if consumes_active else []) + list(consumed_partners)
            self._bus.emit(
                ev.RULE_FIRED,
                rule=rule.index,
                active=fact,
                partners=tuple(partners_seen),
                consumed=tuple(consumed),
                body=tuple(bodies),
            )
            if consumes_active:
                self._remove_marked(removal)
                return
        self._remove_marked(removal)
        self._insert(fact)

    def _combinations(
        self, heads: tuple[HeadElement, ...], frame: dict
    ) -> Iterator[tuple[tuple[Fact, ...], dict]]:
        """All tuples of pairwise-distinct store facts matching ``heads``.

        Deterministic: candidates per head in key order, first head outermost.
        The store is not mutated during a pass, so the iteration is stable.
        """
        if not heads:
            yield (), frame
            return
        chosen: list[Fact] = []

        def rec(i: int, fr: dict) -> Iterator[tuple[tuple[Fact, ...], dict]]:
            if i == len(heads):
                yield tuple(chosen), fr
                return
            for candidate in self._store.facts_of(heads[i].signature.name):
                if candidate in chosen:
                    continue
                nxt = match_head(heads[i], candidate, fr)
                if nxt is None:
                    continue
                chosen.append(candidate)
                yield from rec(i + 1, nxt)
                chosen.pop()

        yield from rec(0, frame)

    def _eval_guards(self, guards: list[GuardAtom], frame: dict) -> dict | None:
        for guard in guards:
            args: list = []
            for kind, payload in guard.plan:
                if kind == "lit":
                    args.append(payload)
                elif kind == "bind":
                    value = frame.get(payload)
                    if value is None:
                        raise EngineFault(
                            f"symbol {payload.name!r} unset in guard {guard.name!r}"
                        )
                    args.append(value)
                else:
                    args.append(payload)
            out = self._registry.invoke(guard.name, guard.negated, args, frame)
            if out is None:
                return None
            if out:
                frame = {**frame, **out}
        return frame

    def _instantiate(self, atom: BodyAtom, frame: dict) -> Fact:
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
                    f"body fact {atom.signature.name}: {render_value(value)} "
                    f"does not fit {tag.name}"
                )
            values.append(value)
        n = atom.signature.key_arity
        return Fact(atom.signature.name, tuple(values[:n]), tuple(values[n:]))

    def _remove_marked(self, removal: dict[Fact, None]) -> None:
        for fact in removal:
            self._store.remove(fact)
            self._bus.emit(ev.FACT_REMOVED, fact=fact)

    def _insert(self, fact: Fact) -> None:
        old = self._store.get(fact.constraint, fact.key)
        if old is not None:
            self._store.remove(old)
            self._bus.emit(ev.FACT_REMOVED, fact=old)
        self._store.put(fact)
        self._bus.emit(ev.FACT_STORED, fact=fact)

    # -- transactions ------------------------------------------------------

    def _snapshot(self) -> Snapshot:
        return Snapshot(
            goal=tuple(self._goal),
            store=self._store.copy_maps(),
            status=self._status,
            suspend_reason=self._suspend_reason,
        )

    def _restore(self, snap: Snapshot) -> None:
        self._goal = deque(snap.goal)
        self._store.load_maps(snap.store)
        self._status = snap.status
        self._suspend_reason = snap.suspend_reason

    def _no_run(self):
        if self._status is RunStatus.RUNNING:
            raise StateError("busy", "handler is running")

    def begin(self) -> int:
        if self._status is RunStatus.RUNNING:
            raise BeginDuringRun()
        depth = self._tx.begin(self._snapshot())
        self._bus.emit(ev.TX_BEGIN, depth=depth)
        return depth

    def commit(self) -> int:
        self._no_run()
        depth = self._tx.commit()
        self._bus.emit(ev.TX_COMMIT, depth=depth)
        return depth

    def partial_commit(self) -> int:
        self._no_run()
        depth = self._tx.partial_commit(self._snapshot())
        self._bus.emit(ev.TX_PARTIAL_COMMIT, depth=depth)
        return depth

    def rollback(self) -> int:
        self._no_run()
        snap, depth = self._tx.rollback()
        self._restore(snap)
        self._bus.emit(ev.TX_ROLLBACK, depth=depth)
        return depth
