from __future__ import annotations

import random

import pytest

from crengine import (
    BeginDuringRun,
    Handler,
    NoOpenTransaction,
    RunStatus,
    TellOnFailed,
    build_order_interval_handler,
)
from conftest import observable_state


def test_begin_depths(order_handler):
    assert order_handler.begin() == 1
    assert order_handler.begin() == 2
    assert order_handler.depth == 2


def test_commit_keeps_current_state(order_handler):
    order_handler.begin()
    order_handler.tell("leq", "a", "b")
    before = observable_state(order_handler)
    assert order_handler.commit() == 0
    after = observable_state(order_handler)
    assert {**before, "depth": 0} == after


def test_commit_at_depth_zero(order_handler):
    with pytest.raises(NoOpenTransaction):
        order_handler.commit()
    with pytest.raises(NoOpenTransaction):
        order_handler.partial_commit()
    with pytest.raises(NoOpenTransaction):
        order_handler.rollback()


def test_nested_commit_leaves_outer(order_handler):
    order_handler.begin()
    order_handler.tell("leq", "a", "b")
    order_handler.begin()
    order_handler.tell("leq", "b", "c")
    assert order_handler.commit() == 1
    order_handler.rollback()
    assert order_handler.depth == 0
    assert order_handler.store_facts() == ()


def test_rollback_restores_exactly(order_handler):
    order_handler.tell("leq", "a", "b")
    saved = observable_state(order_handler)
    order_handler.begin()
    order_handler.tell("dom", "x", 5, 3)  # drives the handler into Failed
    assert order_handler.status is RunStatus.FAILED
    order_handler.rollback()
    assert observable_state(order_handler) == saved
    # and the handler is usable again
    assert order_handler.tell("leq", "b", "a") is RunStatus.FIXPOINT


def test_partial_commit_moves_the_restore_point(order_handler):
    order_handler.begin()
    order_handler.tell("leq", "a", "b")
    after_f = observable_state(order_handler)
    assert order_handler.partial_commit() == 1
    order_handler.tell("leq", "x", "y")
    order_handler.rollback()
    assert observable_state(order_handler) == {**after_f, "depth": 0}


def test_partial_commit_without_changes_keeps_begin_state(order_handler):
    saved = observable_state(order_handler)
    order_handler.begin()
    order_handler.partial_commit()
    order_handler.rollback()
    assert observable_state(order_handler) == saved


def test_rollback_five_deep(order_handler):
    saved = observable_state(order_handler)
    for i in range(5):
        order_handler.begin()
        order_handler.tell("leq", f"v{i}", f"w{i}")
    for _ in range(5):
        order_handler.rollback()
    assert observable_state(order_handler) == saved


def test_snapshot_includes_goal():
    h = build_order_interval_handler(goal_limit=0)
    h.tell("lt", "a", "b")
    assert h.status is RunStatus.SUSPENDED
    saved = observable_state(h)
    h.begin()
    h.resume()
    h.rollback()
    assert observable_state(h) == saved
    # resuming after rollback still completes
    while h.status is RunStatus.SUSPENDED:
        h.resume()
    assert {f.render() for f in h.store_facts()} == {'leq("a", "b")', 'neq("a", "b")'}


def test_begin_during_run_rejected():
    h = Handler("t")
    c = h.symbol("c")
    h.constraint(c, int)
    h.compile()
    errors = []

    def listener(event):
        if event.kind == "dequeued":
            try:
                h.begin()
            except BeginDuringRun as e:
                errors.append(e.code)

    h.subscribe(listener)
    h.tell("c", 1)
    assert errors == ["begin-during-run"]


def test_select_is_orthogonal_to_transactions(order_handler):
    order_handler.tell("leq", "a", "b")
    order_handler.begin()
    before = observable_state(order_handler)
    order_handler.select("leq")
    order_handler.select("dom", ["x"])
    assert observable_state(order_handler) == before
    order_handler.rollback()


def test_transaction_events_emitted_after_change(order_handler):
    log = []
    order_handler.subscribe(log.append)
    order_handler.begin()
    order_handler.begin()
    order_handler.partial_commit()
    order_handler.commit()
    order_handler.rollback()
    assert [(e.kind, e.depth) for e in log] == [
        ("tx-begin", 1),
        ("tx-begin", 2),
        ("tx-partial-commit", 2),
        ("tx-commit", 1),
        ("tx-rollback", 0),
    ]


# -- randomized transaction algebra -----------------------------------------


TELL_POOL = [
    ("leq", "a", "b"), ("leq", "b", "a"), ("leq", "b", "c"),
    ("lt", "a", "c"), ("eq", "a", "c"), ("neq", "a", "b"), ("neq", "c", "c"),
    ("dom", "x", 0, 9), ("dom", "x", 3, 12), ("dom", "y", 5, 5), ("dom", "y", 6, 8),
]


def random_walk(seed: int, ops: int = 12) -> None:
    rng = random.Random(seed)
    h = build_order_interval_handler()
    shadow: list[dict] = []  # expected restore points
    for _ in range(ops):
        op = rng.choice(["begin", "commit", "partial", "rollback", "tell", "tell"])
        if op == "begin" and len(shadow) < 5:
            shadow.append(observable_state(h))
            h.begin()
        elif op == "commit":
            if shadow:
                expected = observable_state(h)
                h.commit()
                assert observable_state(h) == {**expected, "depth": h.depth}
                shadow.pop()
            else:
                with pytest.raises(NoOpenTransaction):
                    h.commit()
        elif op == "partial":
            if shadow:
                h.partial_commit()
                shadow[-1] = observable_state(h)
            else:
                with pytest.raises(NoOpenTransaction):
                    h.partial_commit()
        elif op == "rollback":
            if shadow:
                expected = shadow.pop()
                h.rollback()
                assert observable_state(h) == {**expected, "depth": h.depth}
            else:
                with pytest.raises(NoOpenTransaction):
                    h.rollback()
        else:
            fact = rng.choice(TELL_POOL)
            if h.status is RunStatus.FAILED:
                with pytest.raises(TellOnFailed):
                    h.tell(*fact)
            else:
                h.tell(*fact)


@pytest.mark.parametrize("seed", range(25))
def test_random_transaction_walks(seed):
    random_walk(seed)
