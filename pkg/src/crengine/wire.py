"""Wire encoding for the debug protocol: line-delimited JSON records.

Values are tagged so no type information is lost in transit; integers travel
as decimal strings to protect 64-bit precision from floating-point JSON
readers. Encoding is canonical (fixed field order, compact separators) so
transcripts are byte-comparable.
"""

from __future__ import annotations

import json

from .engine import Fact
from .events import Event, RULE_FIRED
from .rules import ConstraintSignature
from .values import NULL, Tag, Value

TAG_CODES = {Tag.BOOL: "b", Tag.INT: "i", Tag.FLOAT: "f", Tag.STR: "s"}
TAG_NAMES = {Tag.BOOL: "bool", Tag.INT: "int", Tag.FLOAT: "float", Tag.STR: "str"}
_NAMES_TAG = {v: k for k, v in TAG_NAMES.items()}

WILDCARD_TOKEN = "_"


class WireError(ValueError):
    pass


def encode_value(v: Value):
    if v.tag is Tag.NULL:
        return None
    if v.tag is Tag.INT:
        return {"t": "i", "v": str(v.payload)}
    return {"t": TAG_CODES[v.tag], "v": v.payload}


def decode_value(obj) -> Value:
    if obj is None:
        return NULL
    if not isinstance(obj, dict) or "t" not in obj or "v" not in obj:
        raise WireError(f"bad value encoding: {obj!r}")
    t, v = obj["t"], obj["v"]
    try:
        if t == "b":
            if not isinstance(v, bool):
                raise WireError("bool payload expected")
            return Value(Tag.BOOL, v)
        if t == "i":
            return Value(Tag.INT, int(v))
        if t == "f":
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise WireError("number payload expected")
            return Value(Tag.FLOAT, float(v))
        if t == "s":
            if not isinstance(v, str):
                raise WireError("string payload expected")
            return Value(Tag.STR, v)
    except (ValueError, TypeError) as e:
        raise WireError(f"bad value payload: {obj!r}") from e
    raise WireError(f"unknown value tag: {t!r}")


def encode_fact(fact: Fact) -> dict:
    return {
        "constraint": fact.constraint,
        "key": [encode_value(v) for v in fact.key],
        "data": [encode_value(v) for v in fact.data],
    }


def decode_fact(obj) -> Fact:
    if not isinstance(obj, dict) or "constraint" not in obj:
        raise WireError(f"bad fact encoding: {obj!r}")
    return Fact(
        obj["constraint"],
        tuple(decode_value(v) for v in obj.get("key", [])),
        tuple(decode_value(v) for v in obj.get("data", [])),
    )


def encode_event(event: Event) -> dict:
    out: dict = {"kind": event.kind}
    if event.kind == RULE_FIRED:
        out["rule"] = event.rule
        out["active"] = encode_fact(event.active)
        out["partners"] = [encode_fact(f) for f in event.partners]
        out["consumed"] = [encode_fact(f) for f in event.consumed]
        out["body"] = [encode_fact(f) for f in event.body]
    elif event.fact is not None:
        out["fact"] = encode_fact(event.fact)
    if event.reason is not None:
        out["reason"] = event.reason
    if event.depth is not None:
        out["depth"] = event.depth
    return out


def decode_event(obj, seq: int = 0) -> Event:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise WireError(f"bad event encoding: {obj!r}")
    kind = obj["kind"]
    fields: dict = {}
    if kind == RULE_FIRED:
        fields["rule"] = obj["rule"]
        fields["active"] = decode_fact(obj["active"])
        fields["partners"] = tuple(decode_fact(f) for f in obj["partners"])
        fields["consumed"] = tuple(decode_fact(f) for f in obj["consumed"])
        fields["body"] = tuple(decode_fact(f) for f in obj["body"])
    elif "fact" in obj:
        fields["fact"] = decode_fact(obj["fact"])
    if "reason" in obj:
        fields["reason"] = obj["reason"]
    if "depth" in obj:
        fields["depth"] = obj["depth"]
    return Event(seq=seq, kind=kind, **fields)


def encode_signature(sig: ConstraintSignature) -> dict:
    return {
        "name": sig.name,
        "key": [TAG_NAMES[t] for t in sig.key_tags],
        "data": [TAG_NAMES[t] for t in sig.data_tags],
    }


def decode_key_pattern(items) -> list:
    """Decode a select key pattern: values plus "_" wildcard tokens."""
    from .rules import WILDCARD

    out = []
    for item in items:
        if item == WILDCARD_TOKEN:
            out.append(WILDCARD)
        else:
            out.append(decode_value(item))
    return out


def dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)
