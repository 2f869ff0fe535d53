from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crengine import (
    NULL,
    Tag,
    Value,
    compare_values,
    from_python,
    parse_value,
    render_value,
    type_check,
    values_equal,
)
from crengine.values import INT64_MAX, INT64_MIN, tuple_sort_key

scalars = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(min_value=INT64_MIN, max_value=INT64_MAX),
    st.floats(allow_nan=False, allow_infinity=False),
    st.text(max_size=20),
)
values = scalars.map(from_python)


def test_compare_examples():
    assert compare_values(NULL, from_python(0)) == -1
    assert compare_values(from_python(3), from_python(3)) == 0
    assert compare_values(from_python("a"), from_python("b")) == -1


def test_cross_tag_rank():
    ordered = [None, False, True, -1, 5, 0.5, "a"]
    wrapped = [from_python(x) for x in ordered]
    for i in range(len(wrapped) - 1):
        assert compare_values(wrapped[i], wrapped[i + 1]) == -1


def test_equality_examples():
    assert values_equal(NULL, NULL)
    assert not values_equal(from_python(5), from_python("5"))
    assert values_equal(from_python(1.5), from_python(1.5))


def test_int_and_float_never_equal():
    assert not values_equal(from_python(1), from_python(1.0))
    assert not values_equal(from_python(True), from_python(1))


def test_signed_zero_is_bitwise_distinct_but_ordered():
    neg, pos = from_python(-0.0), from_python(0.0)
    assert not values_equal(neg, pos)
    assert compare_values(neg, pos) == -1
    assert hash(neg) != hash(pos)


def test_nan_and_infinity_rejected():
    with pytest.raises(ValueError):
        from_python(float("nan"))
    with pytest.raises(ValueError):
        from_python(float("inf"))


def test_int64_bounds():
    assert from_python(INT64_MAX).payload == INT64_MAX
    assert from_python(INT64_MIN).payload == INT64_MIN
    with pytest.raises(ValueError):
        from_python(INT64_MAX + 1)
    with pytest.raises(ValueError):
        from_python(INT64_MIN - 1)


def test_type_check_examples():
    assert type_check(NULL, Tag.INT)
    assert type_check(from_python(7), Tag.INT)
    assert not type_check(from_python("x"), Tag.INT)


@given(values, values)
def test_antisymmetry(a, b):
    assert compare_values(a, b) == -compare_values(b, a)


@given(values, values, values)
def test_transitivity(a, b, c):
    x, y, z = sorted([a, b, c], key=Value.sort_key)
    assert compare_values(x, y) <= 0
    assert compare_values(y, z) <= 0
    assert compare_values(x, z) <= 0


@given(values, values)
def test_equality_agrees_with_compare(a, b):
    assert values_equal(a, b) == (compare_values(a, b) == 0)
    if values_equal(a, b):
        assert hash(a) == hash(b)


@given(st.lists(st.tuples(values, values), max_size=10))
def test_keytuple_sort_permutation_invariant(pairs):
    tuples = [tuple(p) for p in pairs]
    once = sorted(tuples, key=tuple_sort_key)
    again = sorted(list(reversed(tuples)), key=tuple_sort_key)
    assert once == again


@given(values)
def test_render_parse_round_trip(v):
    assert values_equal(parse_value(render_value(v)), v)


def test_render_forms():
    assert render_value(NULL) == "null"
    assert render_value(from_python(True)) == "true"
    assert render_value(from_python(-3)) == "-3"
    assert render_value(from_python(1.5)) == "1.5"
    assert "." in render_value(from_python(1.0))
    assert render_value(from_python('say "hi"')) == '"say \\"hi\\""'


def test_parse_rejects_bare_words():
    with pytest.raises(ValueError):
        parse_value("hello")
    with pytest.raises(ValueError):
        parse_value('"unclosed')
