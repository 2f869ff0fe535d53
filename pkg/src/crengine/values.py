"""The value universe: tagged scalars, symbols, and the total order over them.

Keys and data fields hold exactly these scalars: null, booleans, 64-bit
signed integers, 64-bit floats, and text strings. Equality is structural
(tag plus payload, floats by bit pattern) and the order is total with the
cross-tag rank Null < Bool < Int < Float < Str, so tuples of values can key
an ordered map.
"""

from __future__ import annotations

import json
import math
import re
import struct
from enum import IntEnum
from typing import Iterable

from .errors import EngineFault

INT64_MIN = -(1 << 63)
INT64_MAX = (1 << 63) - 1


class Tag(IntEnum):
    """Value tags; the integer value is the cross-tag ordering rank."""

    NULL = 0
    BOOL = 1
    INT = 2
    FLOAT = 3
    STR = 4


# Python types usable as type tags in declarations and guard specs.
PY_TAGS = {bool: Tag.BOOL, int: Tag.INT, float: Tag.FLOAT, str: Tag.STR}

_PAYLOAD_TYPE = {Tag.BOOL: bool, Tag.INT: int, Tag.FLOAT: float, Tag.STR: str}


def _float_bits(f: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", f))[0]


def _float_order_key(f: float) -> int:
    # IEEE total-order transform (NaN excluded at construction): makes the
    # unsigned bit patterns monotone, with -0.0 just below +0.0.
    u = _float_bits(f)
    if u & 0x8000000000000000:
        return u ^ 0xFFFFFFFFFFFFFFFF
    return u | 0x8000000000000000


class Value:
    """One immutable scalar of the universe."""

    __slots__ = ("tag", "payload", "_skey")

    def __init__(self, tag: Tag, payload: object = None):
        if tag is Tag.NULL:
            if payload is not None:
                raise ValueError("null carries no payload")
        else:
            want = _PAYLOAD_TYPE[tag]
            if type(payload) is not want:
                raise ValueError(f"{tag.name} payload must be {want.__name__}")
            if tag is Tag.INT and not (INT64_MIN <= payload <= INT64_MAX):
                raise ValueError("integer out of 64-bit signed range")
            if tag is Tag.FLOAT and not math.isfinite(payload):
                raise ValueError("non-finite floats are not representable")
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "payload", payload)
        object.__setattr__(self, "_skey", None)

    def __setattr__(self, name, value):
        raise AttributeError("Value is immutable")

    def __eq__(self, other):
        if not isinstance(other, Value):
            return NotImplemented
        if self.tag is not other.tag:
            return False
        if self.tag is Tag.FLOAT:
            return _float_bits(self.payload) == _float_bits(other.payload)
        return self.payload == other.payload

    def __hash__(self):
        if self.tag is Tag.FLOAT:
            return hash((int(self.tag), _float_bits(self.payload)))
        return hash((int(self.tag), self.payload))

    def sort_key(self):
        key = self._skey
        if key is None:
            tag = self.tag
            if tag is Tag.FLOAT:
                key = (3, _float_order_key(self.payload))
            elif tag is Tag.NULL:
                key = (0, 0)
            elif tag is Tag.BOOL:
                key = (1, int(self.payload))
            else:
                key = (int(tag), self.payload)
            object.__setattr__(self, "_skey", key)
        return key

    def __lt__(self, other):
        if not isinstance(other, Value):
            return NotImplemented
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        return f"Value({render_value(self)})"


NULL = Value(Tag.NULL)
TRUE = Value(Tag.BOOL, True)
FALSE = Value(Tag.BOOL, False)


def from_python(x: object) -> Value:
    """Wrap a native scalar (None/bool/int/float/str) as a Value."""
    if isinstance(x, Value):
        return x
    if x is None:
        return NULL
    if isinstance(x, bool):
        return TRUE if x else FALSE
    if isinstance(x, int):
        return Value(Tag.INT, x)
    if isinstance(x, float):
        return Value(Tag.FLOAT, x)
    if isinstance(x, str):
        return Value(Tag.STR, x)
    raise ValueError(f"not a representable scalar: {x!r}")


def to_python(v: Value) -> object:
    return v.payload


def compare_values(a: Value, b: Value) -> int:
    """Total order over all Values; returns -1, 0, or 1."""
    ka, kb = a.sort_key(), b.sort_key()
    if ka < kb:
        return -1
    if ka > kb:
        return 1
    return 0


def values_equal(a: Value, b: Value) -> bool:
    return a == b


def type_check(v: Value, tag: Tag | None) -> bool:
    """Null is admitted at every position; otherwise tags must match.

    A tag of None admits everything (used by fully generic guards).
    """
    if tag is None:
        return True
    return v.tag is Tag.NULL or v.tag is tag


def tuple_sort_key(values: Iterable[Value]):
    return tuple(v.sort_key() for v in values)


def as_tag(t: object) -> Tag:
    """Normalize a declared type (Python type or Tag) to a Tag."""
    if isinstance(t, Tag):
        if t is Tag.NULL:
            raise ValueError("null is not a declarable type")
        return t
    if t in PY_TAGS:
        return PY_TAGS[t]
    raise ValueError(f"not a declarable type: {t!r}")


# Canonical text rendering used by the CLI and transcripts: null, true/false,
# decimal integers, floats containing '.' or an exponent, strings in double
# quotes with backslash escapes.

def render_value(v: Value) -> str:
    if v.tag is Tag.NULL:
        return "null"
    if v.tag is Tag.BOOL:
        return "true" if v.payload else "false"
    if v.tag is Tag.INT:
        return str(v.payload)
    if v.tag is Tag.FLOAT:
        return repr(v.payload)
    return json.dumps(v.payload, ensure_ascii=False)


_INT_RE = re.compile(r"[+-]?\d+\Z")


def parse_value(token: str) -> Value:
    """Parse one canonical value token; raises ValueError on anything else."""
    if token == "null":
        return NULL
    if token == "true":
        return TRUE
    if token == "false":
        return FALSE
    if token.startswith('"'):
        try:
            s = json.loads(token)
        except json.JSONDecodeError as e:
            raise ValueError(f"bad string literal {token!r}") from e
        if not isinstance(s, str):
            raise ValueError(f"bad string literal {token!r}")
        return Value(Tag.STR, s)
    if _INT_RE.match(token):
        return Value(Tag.INT, int(token))
    if "." in token or "e" in token.lower():
        try:
            return Value(Tag.FLOAT, float(token))
        except (ValueError, OverflowError) as e:
            raise ValueError(f"bad value token {token!r}") from e
    raise ValueError(f"bad value token {token!r}")


_UNSET = object()


class SymbolRef:
    """A named symbol scoped to one handler.

    Symbols name constraints and stand for values in rule patterns. The cell
    holds the most recent value written while firing rules (guard out
    parameters write through ``set``); outside a run it is volatile.
    """

    __slots__ = ("name", "sid", "owner", "_cell")

    def __init__(self, name: str, sid: int, owner: object):
        self.name = name
        self.sid = sid
        self.owner = owner
        self._cell = _UNSET

    def set(self, value: object) -> None:
        self._cell = from_python(value)

    def get(self) -> Value:
        if self._cell is _UNSET:
            raise EngineFault(f"symbol {self.name!r} read while unset")
        return self._cell

    def clear(self) -> None:
        self._cell = _UNSET

    def is_set(self) -> bool:
        return self._cell is not _UNSET

    def __repr__(self):
        return f"<symbol {self.name}>"
