from __future__ import annotations

import pytest

from crengine import (
    Breakpoint,
    BreakpointSet,
    EngineFault,
    StateError,
    build_order_interval_handler,
)
from crengine.events import DEQUEUED, RULE_FIRED
from conftest import observable_state


def kinds(log):
    return [e.kind for e in log]


# -- golden event log for the strict-inequality rewrite ----------------------

LT_GOLDEN = [
    ("told", 'lt("a", "b")'),
    ("dequeued", 'lt("a", "b")'),
    ("rule-fired", None),
    ("dequeued", 'leq("a", "b")'),
    ("fact-stored", 'leq("a", "b")'),
    ("dequeued", 'neq("a", "b")'),
    ("fact-stored", 'neq("a", "b")'),
    ("fixpoint", None),
]


def test_lt_golden_log(order_handler):
    log = []
    order_handler.subscribe(log.append)
    order_handler.tell("lt", "a", "b")
    got = [(e.kind, e.fact.render() if e.fact else None) for e in log]
    assert got == LT_GOLDEN
    fired = log[2]
    assert fired.rule == 3
    assert fired.active.render() == 'lt("a", "b")'
    assert fired.partners == ()
    assert [f.render() for f in fired.consumed] == ['lt("a", "b")']
    assert [f.render() for f in fired.body] == ['leq("a", "b")', 'neq("a", "b")']


def test_fail_golden_log(order_handler):
    log = []
    order_handler.subscribe(log.append)
    order_handler.tell("fail")
    assert kinds(log) == ["told", "dequeued", "failure"]


def test_seq_strictly_increases(order_handler):
    log = []
    order_handler.subscribe(log.append)
    order_handler.tell("dom", "x", 0, 10)
    order_handler.begin()
    order_handler.tell("dom", "x", 3, 15)
    order_handler.rollback()
    seqs = [e.seq for e in log]
    assert seqs == sorted(seqs)
    assert len(set(seqs)) == len(seqs)


def test_multiple_listeners_in_subscription_order(order_handler):
    order = []
    order_handler.subscribe(lambda e: order.append(("first", e.seq)))
    order_handler.subscribe(lambda e: order.append(("second", e.seq)))
    order_handler.tell("leq", "a", "b")
    assert order[0][0] == "first" and order[1][0] == "second"
    assert [o for o in order if o[0] == "first"] == [
        ("first", s) for _, s in order if _ == "first"
    ]


def test_unsubscribe_stops_delivery(order_handler):
    log = []
    sid = order_handler.subscribe(log.append)
    order_handler.tell("leq", "a", "b")
    seen = len(log)
    order_handler.unsubscribe(sid)
    order_handler.tell("leq", "b", "c")
    assert len(log) == seen
    with pytest.raises(StateError):
        order_handler.unsubscribe(sid)


def test_subscribe_from_listener_takes_effect_next_event(order_handler):
    late = []

    def listener(event):
        if event.kind == "told":
            order_handler.subscribe(late.append)

    order_handler.subscribe(listener)
    order_handler.tell("leq", "a", "b")
    assert kinds(late) == ["dequeued", "fact-stored", "fixpoint"]


def test_listener_transparency(order_handler):
    noisy = build_order_interval_handler()
    for _ in range(3):
        noisy.subscribe(lambda e: None)
    for h in (order_handler, noisy):
        h.tell("dom", "x", 0, 10)
        h.tell("dom", "x", 3, 15)
        h.tell("leq", "a", "b")
    assert observable_state(order_handler) == observable_state(noisy)


def test_listener_exception_is_engine_fault(order_handler):
    def bad(event):
        raise RuntimeError("boom")

    order_handler.subscribe(bad)
    with pytest.raises(EngineFault):
        order_handler.tell("leq", "a", "b")


def test_stored_facts_have_unremoved_stored_event(order_handler):
    log = []
    order_handler.subscribe(log.append)
    order_handler.tell("dom", "x", 0, 10)
    order_handler.tell("dom", "x", 3, 15)
    order_handler.tell("lt", "a", "b")
    live: dict = {}
    for e in log:
        if e.kind == "fact-stored":
            live[e.fact] = True
        elif e.kind == "fact-removed":
            assert live.pop(e.fact, False), "removed a fact never stored"
    assert set(live) == set(order_handler.store_facts())


# -- breakpoints --------------------------------------------------------------


def collect_events(handler, *tells):
    log = []
    handler.subscribe(log.append)
    for t in tells:
        handler.tell(*t)
    return log


def test_rule_breakpoint_matches_only_that_rule(order_handler):
    bp = Breakpoint(rule=5)
    log = collect_events(order_handler, ("leq", "a", "b"), ("leq", "b", "a"))
    hits = [e for e in log if bp.matches(e)]
    assert [e.kind for e in hits] == [RULE_FIRED]
    assert hits[0].rule == 5


def test_constraint_breakpoint_matches_payload(order_handler):
    bp = Breakpoint(constraint="neq")
    log = collect_events(order_handler, ("lt", "a", "b"))
    hits = [e for e in log if bp.matches(e)]
    # the rule firing mentions neq in its body, then neq is dequeued/stored
    assert [e.kind for e in hits] == [RULE_FIRED, DEQUEUED, "fact-stored"]


def test_step_breakpoint_matches_every_dequeued(order_handler):
    bp = Breakpoint(step=True)
    log = collect_events(order_handler, ("lt", "a", "b"))
    assert [e.kind for e in log if bp.matches(e)] == [DEQUEUED] * 3


def test_breakpoint_set_add_remove():
    bps = BreakpointSet()
    bid = bps.add(Breakpoint(rule=2))
    assert len(bps) == 1
    assert bps.entries()[bid] == Breakpoint(rule=2)
    bps.remove(bid)
    assert len(bps) == 0
    with pytest.raises(StateError):
        bps.remove(bid)
