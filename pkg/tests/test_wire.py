from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crengine import Fact, from_python
from crengine.values import INT64_MAX, INT64_MIN
from crengine.wire import (
    WireError,
    decode_event,
    decode_fact,
    decode_value,
    dumps,
    encode_event,
    encode_fact,
    encode_signature,
    encode_value,
)

scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=INT64_MIN, max_value=INT64_MAX),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(max_size=30),
)


@given(scalars)
def test_value_round_trip(x):
    v = from_python(x)
    assert decode_value(encode_value(v)) == v


def test_int64_extremes_round_trip_as_strings():
    lo, hi = from_python(INT64_MIN), from_python(INT64_MAX)
    assert encode_value(lo) == {"t": "i", "v": str(INT64_MIN)}
    assert encode_value(hi) == {"t": "i", "v": str(INT64_MAX)}
    assert decode_value(encode_value(lo)) == lo
    assert decode_value(encode_value(hi)) == hi


def test_canonical_encodings():
    assert encode_value(from_python(None)) is None
    assert encode_value(from_python(True)) == {"t": "b", "v": True}
    assert encode_value(from_python(1.5)) == {"t": "f", "v": 1.5}
    assert encode_value(from_python("x")) == {"t": "s", "v": "x"}


def test_decode_rejects_malformed():
    for bad in ({"t": "i"}, {"v": 1}, {"t": "z", "v": 1}, {"t": "i", "v": "abc"},
                {"t": "b", "v": 1}, {"t": "f", "v": "1.5"}, {"t": "s", "v": 3}, 42):
        with pytest.raises(WireError):
            decode_value(bad)


def test_fact_round_trip():
    fact = Fact(
        "dom", (from_python("x"),), (from_python(3), from_python(10))
    )
    wire = encode_fact(fact)
    assert wire == {
        "constraint": "dom",
        "key": [{"t": "s", "v": "x"}],
        "data": [{"t": "i", "v": "3"}, {"t": "i", "v": "10"}],
    }
    assert decode_fact(wire) == fact


def test_event_round_trip_all_kinds(order_handler):
    log = []
    order_handler.subscribe(log.append)
    order_handler.tell("dom", "x", 0, 10)
    order_handler.tell("dom", "x", 3, 15)
    order_handler.begin()
    order_handler.tell("neq", "q", "q")
    order_handler.rollback()
    order_handler.goal_limit = 0
    order_handler.tell("lt", "a", "b")
    kinds = {e.kind for e in log}
    assert {"told", "dequeued", "rule-fired", "fact-stored", "fact-removed",
            "failure", "fixpoint", "suspended", "tx-begin", "tx-rollback"} <= kinds
    for event in log:
        assert decode_event(encode_event(event), seq=event.seq) == event


def test_signature_encoding(order_handler):
    sigs = {s["name"]: s for s in map(encode_signature, order_handler.signatures.values())}
    assert sigs["dom"] == {"name": "dom", "key": ["str"], "data": ["int", "int"]}
    assert sigs["fail"] == {"name": "fail", "key": [], "data": []}


def test_dumps_is_compact_and_ordered():
    assert dumps({"b": 1, "a": 2}) == '{"b":1,"a":2}'
    assert dumps({"s": "é"}) == '{"s":"é"}'
