"""Rule model: constraint signatures, pattern atoms, the fluent rule builder,
head matching, and rule compilation into the occurrence index.

A rule is built left to right through exactly the sections head -> guard ->
body. ``and_`` is disambiguated by its first argument: a string names a guard
(a leading ``!`` negates it), a symbol names a constraint atom for the
current section. ``with_`` attaches data patterns to the most recent head or
body atom. ``passive``/``keep`` modify the most recent head element.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    ALL_HEADS_PASSIVE,
    ARITY_MISMATCH,
    EMPTY_HEAD,
    GUARD_ARITY_MISMATCH,
    INVALID_PATTERN,
    MODIFIER_ON_BODY,
    NEGATED_GUARD_OUT_PARAM,
    SECTION_ORDER,
    UNBOUND_SYMBOL,
    UNKNOWN_GUARD,
    HandlerFault,
)
from .guards import GuardRegistry, Out
from .values import SymbolRef, Tag, Value, render_value, values_equal


@dataclass(frozen=True)
class ConstraintSignature:
    name: str
    key_tags: tuple[Tag, ...]
    data_tags: tuple[Tag, ...]

    @property
    def key_arity(self) -> int:
        return len(self.key_tags)

    @property
    def data_arity(self) -> int:
        return len(self.data_tags)


@dataclass(frozen=True)
class Literal:
    value: Value

    def render(self) -> str:
        return render_value(self.value)


@dataclass(frozen=True)
class Bind:
    symbol: SymbolRef

    def render(self) -> str:
        return self.symbol.name


class _Wildcard:
    def render(self) -> str:
        return "_"

    def __repr__(self):
        return "WILDCARD"


WILDCARD = _Wildcard()

PatternAtom = Literal | Bind | _Wildcard


@dataclass
class HeadElement:
    signature: ConstraintSignature
    key_patterns: tuple[PatternAtom, ...]
    data_patterns: tuple[PatternAtom, ...] | None = None  # None: no .with_ yet
    passive: bool = False
    keep: bool = False


@dataclass
class GuardAtom:
    name: str
    negated: bool
    args: tuple[PatternAtom, ...]
    # attached at compile: resolved GuardSpec and a per-argument extraction
    # plan of ("out", symbol) | ("lit", value) | ("bind", symbol) entries
    spec: object = None
    plan: tuple = ()


@dataclass
class BodyAtom:
    signature: ConstraintSignature
    key_patterns: tuple[PatternAtom, ...]
    data_patterns: tuple[PatternAtom, ...] | None = None
    # attached at compile: flat extraction plan plus the declared tags
    plan: tuple = ()
    tags: tuple = ()


@dataclass
class Rule:
    """One rule; ``index`` is its 1-based position in definition order."""

    index: int
    heads: list[HeadElement] = field(default_factory=list)
    guards: list[GuardAtom] = field(default_factory=list)
    body: list[BodyAtom] = field(default_factory=list)

    def label(self) -> str:
        parts = []
        for i, h in enumerate(self.heads):
            verb = "when" if i == 0 else ".and"
            args = ", ".join([h.signature.name] + [p.render() for p in h.key_patterns])
            parts.append(f"{verb}({args})")
            if h.data_patterns is not None:
                parts.append(".with(" + ", ".join(p.render() for p in h.data_patterns) + ")")
            if h.passive:
                parts.append(".passive()")
            if h.keep:
                parts.append(".keep()")
        for i, g in enumerate(self.guards):
            verb = ".where" if i == 0 else ".and"
            name = ("!" if g.negated else "") + g.name
            args = ", ".join([f'"{name}"'] + [p.render() for p in g.args])
            parts.append(f"{verb}({args})")
        for i, b in enumerate(self.body):
            verb = ".then" if i == 0 else ".and"
            args = ", ".join([b.signature.name] + [p.render() for p in b.key_patterns])
            parts.append(f"{verb}({args})")
            if b.data_patterns is not None:
                parts.append(".with(" + ", ".join(p.render() for p in b.data_patterns) + ")")
        return "".join(parts)


# Occurrence index: constraint name -> ((rule list position, head position)...)
# over active head elements, in (rule, head) order.
OccurrenceIndex = dict[str, tuple[tuple[int, int], ...]]


def match_head(element: HeadElement, fact, frame: dict) -> dict | None:
    """Match one fact against one head element under a binding frame.

    Returns the extended frame or None. The input frame is never mutated;
    a repeated symbol requires equal values across its positions. An element
    without data patterns matches any data.
    """
    result = frame
    for patterns, values in (
        (element.key_patterns, fact.key),
        (element.data_patterns, fact.data),
    ):
        if patterns is None:
            continue
        for pat, value in zip(patterns, values):
            if pat is WILDCARD:
                continue
            if type(pat) is Literal:
                if not values_equal(pat.value, value):
                    return None
            else:
                bound = result.get(pat.symbol)
                if bound is None:
                    if result is frame:
                        result = dict(frame)
                    result[pat.symbol] = value
                elif not values_equal(bound, value):
                    return None
    return result


class RuleBuilder:
    """Fluent chain for one rule; created by ``Handler.when``.

    The rule is registered as soon as ``when`` runs, so a head-only chain is
    already a complete rule. Every method returns the builder.
    """

    def __init__(self, handler, rule: Rule):
        self._handler = handler
        self._rule = rule
        self._section = "head"
        self._last_atom = rule.heads[0]

    def _fault(self, kind: str, message: str):
        raise HandlerFault(kind, message, rule_index=self._rule.index)

    def and_(self, first, *patterns) -> "RuleBuilder":
        if isinstance(first, str):
            return self._add_guard(first, patterns)
        if isinstance(first, SymbolRef):
            if self._section == "head":
                self._add_head(first, patterns)
            elif self._section == "body":
                self._add_body(first, patterns)
            else:
                self._fault(SECTION_ORDER, "head atom after guards; use then() for body")
            return self
        self._fault(INVALID_PATTERN, "and_ expects a constraint symbol or a guard name")

    def where(self, name, *patterns) -> "RuleBuilder":
        if not isinstance(name, str):
            self._fault(INVALID_PATTERN, "where expects a guard name string")
        return self._add_guard(name, patterns)

    def then(self, symbol, *patterns) -> "RuleBuilder":
        if self._section == "body":
            self._fault(SECTION_ORDER, "then() may start the body only once")
        if not isinstance(symbol, SymbolRef):
            self._fault(INVALID_PATTERN, "then expects a constraint symbol")
        self._section = "body"
        self._add_body(symbol, patterns)
        return self

    def with_(self, *patterns) -> "RuleBuilder":
        atom = self._last_atom
        if not isinstance(atom, (HeadElement, BodyAtom)):
            self._fault(SECTION_ORDER, "with_ must follow a head or body atom")
        if atom.data_patterns is not None:
            self._fault(SECTION_ORDER, "with_ given twice for one atom")
        sig = atom.signature
        if len(patterns) != sig.data_arity:
            self._fault(
                ARITY_MISMATCH,
                f"{sig.name} declares {sig.data_arity} data fields, got {len(patterns)}",
            )
        atom.data_patterns = tuple(self._handler._pattern(p, self._rule.index) for p in patterns)
        return self

    def passive(self) -> "RuleBuilder":
        return self._modifier("passive")

    def keep(self) -> "RuleBuilder":
        return self._modifier("keep")

    def _modifier(self, which: str) -> "RuleBuilder":
        if self._section != "head" or not isinstance(self._last_atom, HeadElement):
            self._fault(MODIFIER_ON_BODY, f"{which}() is a head modifier")
        setattr(self._last_atom, which, True)
        return self

    def _add_head(self, symbol: SymbolRef, patterns) -> None:
        elem = self._handler._make_head(symbol, patterns, self._rule.index)
        self._rule.heads.append(elem)
        self._last_atom = elem

    def _add_body(self, symbol: SymbolRef, patterns) -> None:
        atom = self._handler._make_body(symbol, patterns, self._rule.index)
        self._rule.body.append(atom)
        self._last_atom = atom

    def _add_guard(self, name: str, patterns) -> "RuleBuilder":
        if self._section == "body":
            self._fault(SECTION_ORDER, "guards must precede the body")
        self._section = "guard"
        negated = name.startswith("!")
        bare = name[1:] if negated else name
        if not bare:
            self._fault(INVALID_PATTERN, "empty guard name")
        args = tuple(self._handler._pattern(p, self._rule.index) for p in patterns)
        atom = GuardAtom(bare, negated, args)
        self._rule.guards.append(atom)
        self._last_atom = atom
        return self


def compile_rules(
    rules: list[Rule], registry: GuardRegistry
) -> OccurrenceIndex:
    """Validate every rule and build the occurrence index.

    Faults carry the rule's 1-based index and the atom position within the
    offending section.
    """
    for rule in rules:
        _validate_rule(rule, registry)
    index: dict[str, list[tuple[int, int]]] = {}
    for pos, rule in enumerate(rules):
        for hpos, head in enumerate(rule.heads):
            if head.passive:
                continue
            index.setdefault(head.signature.name, []).append((pos, hpos))
    return {name: tuple(entries) for name, entries in index.items()}


def _validate_rule(rule: Rule, registry: GuardRegistry) -> None:
    if not rule.heads:
        raise HandlerFault(EMPTY_HEAD, "rule has no head", rule_index=rule.index)
    if all(h.passive for h in rule.heads):
        raise HandlerFault(
            ALL_HEADS_PASSIVE, "every head is passive; the rule can never fire",
            rule_index=rule.index,
        )

    bound: set[SymbolRef] = set()
    for head in rule.heads:
        for pat in list(head.key_patterns) + list(head.data_patterns or ()):
            if isinstance(pat, Bind):
                bound.add(pat.symbol)

    for gpos, guard in enumerate(rule.guards):
        spec = registry.lookup(guard.name)
        if spec is None:
            raise HandlerFault(
                UNKNOWN_GUARD, f"guard {guard.name!r} is not registered",
                rule_index=rule.index, position=gpos,
            )
        if not spec.arity_ok(len(guard.args)):
            raise HandlerFault(
                GUARD_ARITY_MISMATCH,
                f"guard {guard.name!r} expects {len(spec.params)}"
                + ("+" if spec.variadic_tail else "")
                + f" arguments, got {len(guard.args)}",
                rule_index=rule.index, position=gpos,
            )
        if guard.negated and spec.has_out(len(guard.args)):
            raise HandlerFault(
                NEGATED_GUARD_OUT_PARAM,
                f"negated guard {guard.name!r} cannot take out parameters",
                rule_index=rule.index, position=gpos,
            )
        outs: list[SymbolRef] = []
        plan = []
        for i, arg in enumerate(guard.args):
            param = spec.param_at(i)
            if isinstance(param, Out):
                if not isinstance(arg, Bind):
                    raise HandlerFault(
                        INVALID_PATTERN,
                        f"out parameter {i} of guard {guard.name!r} needs a symbol",
                        rule_index=rule.index, position=gpos,
                    )
                outs.append(arg.symbol)
                plan.append(("out", arg.symbol))
            else:
                if arg is WILDCARD:
                    raise HandlerFault(
                        INVALID_PATTERN,
                        f"wildcard has no value to pass to guard {guard.name!r}",
                        rule_index=rule.index, position=gpos,
                    )
                if isinstance(arg, Bind):
                    if arg.symbol not in bound:
                        raise HandlerFault(
                            UNBOUND_SYMBOL,
                            f"symbol {arg.symbol.name!r} used in guard {guard.name!r} before binding",
                            rule_index=rule.index, position=gpos,
                        )
                    plan.append(("bind", arg.symbol))
                else:
                    plan.append(("lit", arg.value))
        guard.spec = spec
        guard.plan = tuple(plan)
        bound.update(outs)

    for bpos, atom in enumerate(rule.body):
        sig = atom.signature
        if atom.data_patterns is None and sig.data_arity > 0:
            raise HandlerFault(
                ARITY_MISMATCH,
                f"body atom {sig.name} needs {sig.data_arity} data patterns",
                rule_index=rule.index, position=bpos,
            )
        plan = []
        for pat in list(atom.key_patterns) + list(atom.data_patterns or ()):
            if pat is WILDCARD:
                raise HandlerFault(
                    INVALID_PATTERN, "wildcard cannot appear in a body atom",
                    rule_index=rule.index, position=bpos,
                )
            if isinstance(pat, Bind):
                if pat.symbol not in bound:
                    raise HandlerFault(
                        UNBOUND_SYMBOL,
                        f"body symbol {pat.symbol.name!r} is never bound",
                        rule_index=rule.index, position=bpos,
                    )
                plan.append(("bind", pat.symbol))
            else:
                plan.append(("lit", pat.value))
        atom.plan = tuple(plan)
        atom.tags = tuple(sig.key_tags) + tuple(sig.data_tags)
