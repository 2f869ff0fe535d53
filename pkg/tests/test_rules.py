from __future__ import annotations

import pytest

from crengine import (
    Fact,
    Handler,
    HandlerFault,
    In,
    Out,
    WILDCARD,
    build_order_interval_handler,
    from_python,
    match_head,
)
from crengine.rules import Bind, HeadElement, Literal


def fresh():
    """Handler with pair a(str,str), unary b(int), and c(str)->(int,int)."""
    h = Handler("t")
    a, b, c = h.symbols("a", "b", "c")
    h.constraint(a, str, str)
    h.constraint(b, int)
    h.constraint(c, str).with_(int, int)
    return h, a, b, c


# -- declarations -------------------------------------------------------


def test_declare_examples():
    h = Handler("t")
    dom, leq = h.symbols("dom", "leq")
    h.constraint(dom, str).with_(int, int)
    sig = h.signatures["dom"]
    assert (sig.key_arity, sig.data_arity) == (1, 2)
    h.constraint(leq, str, str)
    assert (h.signatures["leq"].key_arity, h.signatures["leq"].data_arity) == (2, 0)
    with pytest.raises(HandlerFault) as e:
        h.constraint(leq, str)
    assert e.value.kind == "duplicate-constraint"


def test_fail_predeclared_and_reserved():
    h = Handler("t")
    assert h.signatures["fail"].key_arity == 0
    with pytest.raises(HandlerFault) as e:
        h.constraint("fail")
    assert e.value.kind == "reserved-name"
    with pytest.raises(HandlerFault):
        h.symbol("_")
    with pytest.raises(HandlerFault):
        h.symbol("fail")


def test_declaration_after_compile():
    h, a, b, c = fresh()
    h.compile()
    with pytest.raises(HandlerFault) as e:
        h.constraint("late", str)
    assert e.value.kind == "declaration-after-setup"
    with pytest.raises(HandlerFault):
        h.when(a)


def test_symbol_ids_unique():
    h = Handler("t")
    syms = h.symbols(*[f"s{i}" for i in range(10)])
    assert len({s.sid for s in syms}) == 10


# -- builder ------------------------------------------------------------


def test_builder_sections_and_order():
    h, a, b, c = fresh()
    X, Y = h.symbols("X", "Y")
    builder = h.when(a, X, Y).and_(b, 3).passive().where("equals", X, Y).then(a, Y, X)
    rule = builder._rule
    assert len(rule.heads) == 2
    assert rule.heads[1].passive and not rule.heads[0].passive
    assert len(rule.guards) == 1 and not rule.guards[0].negated
    assert len(rule.body) == 1
    assert rule.index == 1


def test_negation_parsed_from_name():
    h, a, b, c = fresh()
    X = h.symbol("X")
    rule = h.when(a, X, X).where("!equals", X, X)._rule
    assert rule.guards[0].negated and rule.guards[0].name == "equals"


def test_and_disambiguation_string_vs_symbol():
    h, a, b, c = fresh()
    X = h.symbol("X")
    rule = h.when(a, X, X).and_("equals", X, X).then(a, X, X).and_(a, X, X)._rule
    assert len(rule.heads) == 1
    assert len(rule.guards) == 1
    assert len(rule.body) == 2


def test_modifier_on_body_rejected():
    h, a, b, c = fresh()
    X = h.symbol("X")
    with pytest.raises(HandlerFault) as e:
        h.when(a, X, X).then(a, X, X).keep()
    assert e.value.kind == "modifier-on-body"


def test_head_after_guard_rejected():
    h, a, b, c = fresh()
    X = h.symbol("X")
    with pytest.raises(HandlerFault) as e:
        h.when(a, X, X).where("equals", X, X).and_(a, X, X)
    assert e.value.kind == "section-order"


def test_key_arity_checked_eagerly():
    h, a, b, c = fresh()
    X = h.symbol("X")
    with pytest.raises(HandlerFault) as e:
        h.when(a, X)
    assert e.value.kind == "arity-mismatch" and e.value.rule_index == 1


def test_partial_with_is_arity_mismatch():
    h, a, b, c = fresh()
    X, A = h.symbols("X", "A")
    with pytest.raises(HandlerFault) as e:
        h.when(c, X).with_(A)
    assert e.value.kind == "arity-mismatch"


def test_unknown_constraint_in_rule():
    h, a, b, c = fresh()
    ghost = h.symbol("ghost")
    with pytest.raises(HandlerFault) as e:
        h.when(ghost)
    assert e.value.kind == "unknown-constraint"


def test_foreign_symbol_rejected():
    h1 = fresh()[0]
    h2 = fresh()[0]
    a1 = next(s for s in h1._symbols if s.name == "a")
    x2 = h2.symbol("X")
    with pytest.raises(HandlerFault) as e:
        h1.when(a1, x2, x2)
    assert e.value.kind == "invalid-pattern"


def test_fail_not_usable_as_pattern():
    h, a, b, c = fresh()
    X = h.symbol("X")
    with pytest.raises(HandlerFault) as e:
        h.when(a, X, h.fail)
    assert e.value.kind == "reserved-name"


# -- compile faults -------------------------------------------------------


def test_unknown_guard_reported_with_rule_index():
    h, a, b, c = fresh()
    X = h.symbol("X")
    h.when(a, X, X)
    h.when(a, X, X).where("nosuch", X)
    with pytest.raises(HandlerFault) as e:
        h.compile()
    assert e.value.kind == "unknown-guard"
    assert e.value.rule_index == 2


def test_guard_arity_mismatch():
    h, a, b, c = fresh()
    X = h.symbol("X")
    h.when(a, X, X).where("equals", X)
    with pytest.raises(HandlerFault) as e:
        h.compile()
    assert e.value.kind == "guard-arity-mismatch"


def test_unbound_body_symbol():
    h, a, b, c = fresh()
    X, Z = h.symbols("X", "Z")
    h.when(a, X, X).then(a, X, Z)
    with pytest.raises(HandlerFault) as e:
        h.compile()
    assert e.value.kind == "unbound-body-symbol" and e.value.rule_index == 1


def test_unbound_guard_argument():
    h, a, b, c = fresh()
    X, Z = h.symbols("X", "Z")
    h.when(a, X, X).where("equals", X, Z)
    with pytest.raises(HandlerFault) as e:
        h.compile()
    assert e.value.kind == "unbound-body-symbol"


def test_guard_out_binds_for_later_atoms():
    h = Handler("t")
    p = h.symbol("p")
    h.constraint(p, int)
    X, E = h.symbols("X", "E")
    h.register_guard("bump", lambda a, e: e.set(a + 1), [In(int), Out()], returns_truth=False)
    h.when(p, X).where("bump", X, E).then(p, E)
    h.compile()


def test_negated_guard_with_out_param():
    h = Handler("t")
    p = h.symbol("p")
    h.constraint(p, int)
    X, E = h.symbols("X", "E")
    h.register_guard("bump", lambda a, e: e.set(a + 1), [In(int), Out()], returns_truth=False)
    h.when(p, X).where("!bump", X, E)
    with pytest.raises(HandlerFault) as e:
        h.compile()
    assert e.value.kind == "negated-guard-out-param"


def test_all_heads_passive():
    h, a, b, c = fresh()
    X = h.symbol("X")
    h.when(a, X, X).passive().and_(a, X, X).passive()
    with pytest.raises(HandlerFault) as e:
        h.compile()
    assert e.value.kind == "all-heads-passive" and e.value.rule_index == 1


def test_wildcard_in_body_rejected():
    h, a, b, c = fresh()
    X = h.symbol("X")
    h.when(a, X, X).then(a, X, h.wildcard)
    with pytest.raises(HandlerFault) as e:
        h.compile()
    assert e.value.kind == "invalid-pattern"


def test_body_atom_missing_data_patterns():
    h, a, b, c = fresh()
    X = h.symbol("X")
    h.when(c, X).then(c, X)
    with pytest.raises(HandlerFault) as e:
        h.compile()
    assert e.value.kind == "arity-mismatch"


# -- occurrence index -----------------------------------------------------


def test_occurrence_index_of_worked_example():
    h = build_order_interval_handler()
    occ = h.occurrences
    # active occurrences counted by hand from the rule listing
    assert occ["leq"] == ((0, 0), (4, 0))
    assert occ["eq"] == ((1, 0), (5, 0), (6, 0), (7, 0))
    assert occ["dom"] == ((7, 1), (7, 2), (8, 0), (9, 0), (10, 0))
    assert occ["lt"] == ((2, 0),)
    assert occ["neq"] == ((3, 0),)
    # no passive occurrence appears; every active one appears exactly once
    seen = set()
    for name, entries in occ.items():
        for rpos, hpos in entries:
            head = h.rules[rpos].heads[hpos]
            assert not head.passive
            assert head.signature.name == name
            assert (rpos, hpos) not in seen
            seen.add((rpos, hpos))
    active = {
        (rpos, hpos)
        for rpos, rule in enumerate(h.rules)
        for hpos, head in enumerate(rule.heads)
        if not head.passive
    }
    assert seen == active


def test_compilation_deterministic():
    a = build_order_interval_handler()
    b = build_order_interval_handler()
    assert a.occurrences == b.occurrences
    assert [r.index for r in a.rules] == [r.index for r in b.rules]
    assert [r.label() for r in a.rules] == [r.label() for r in b.rules]


# -- match_head -----------------------------------------------------------


def test_match_repeated_symbol():
    h, a, b, c = fresh()
    X = h.symbol("X")
    elem = HeadElement(h.signatures["a"], (Bind(X), Bind(X)), ())
    same = Fact("a", (from_python("a"), from_python("a")), ())
    diff = Fact("a", (from_python("a"), from_python("b")), ())
    assert match_head(elem, same, {}) == {X: from_python("a")}
    assert match_head(elem, diff, {}) is None


def test_match_extends_existing_frame_without_mutation():
    h, a, b, c = fresh()
    X, A, B = h.symbols("X", "A", "B")
    elem = HeadElement(h.signatures["c"], (Bind(X),), (Bind(A), Bind(B)))
    fact = Fact("c", (from_python("x"),), (from_python(3), from_python(10)))
    base = {X: from_python("x")}
    frame = match_head(elem, fact, base)
    assert frame == {X: from_python("x"), A: from_python(3), B: from_python(10)}
    assert base == {X: from_python("x")}
    assert match_head(elem, fact, base) == frame


def test_match_literal_and_wildcard():
    h, a, b, c = fresh()
    elem = HeadElement(
        h.signatures["c"], (Literal(from_python("x")),), (WILDCARD, Literal(from_python(9)))
    )
    hit = Fact("c", (from_python("x"),), (from_python(1), from_python(9)))
    miss = Fact("c", (from_python("x"),), (from_python(1), from_python(8)))
    assert match_head(elem, hit, {}) == {}
    assert match_head(elem, miss, {}) is None


def test_match_missing_with_is_wildcard_data():
    h, a, b, c = fresh()
    X = h.symbol("X")
    elem = HeadElement(h.signatures["c"], (Bind(X),), None)
    fact = Fact("c", (from_python("x"),), (from_python(1), from_python(2)))
    assert match_head(elem, fact, {}) == {X: from_python("x")}


def test_rule_labels_render_the_chain():
    h = build_order_interval_handler()
    labels = [r.label() for r in h.rules]
    assert labels[0] == "when(leq, X, X)"
    assert labels[4] == "when(leq, X, Y).and(leq, Y, X).passive().then(eq, X, Y)"
    assert labels[8] == 'when(dom, X).with(A, B).where("!lessOrEqual", A, B).then(fail)'
