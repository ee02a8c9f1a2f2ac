"""Wire protocol: newline-delimited UTF-8 JSON request/reply objects.

Every request carries an integer ``id`` which is echoed verbatim in the
reply. Values cross the boundary with explicit type tags::

    {"t": "i64", "v": 7}
    {"t": "arr2d", "rows": 2, "cols": 2, "data": [0.0, 0.0, 0.0, 0.0]}
    {"t": "arr2d", "rows": 100, "cols": 100, "gen": "zeros"}

Replies are canonical JSON (sorted keys, no whitespace) so a replayed
request log reproduces byte-identical reply lines; replies carry no
timestamps by design. Non-finite floats encode as the strings "inf",
"-inf", and "nan".
"""

from __future__ import annotations

import json
import math

from .boxed import Array2D, BoxedValue
from .errors import EngineError, TagMismatch
from .reflex import ReflexFormat, ReflexKind, ReflexReply
from .types import ARR2D, BOOL, F32, F64, I32, I64, render_type

SCALAR_TAGS = {"bool": BOOL, "i32": I32, "i64": I64, "f32": F32, "f64": F64}


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def _encode_float(v: float):
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def _decode_float(v) -> float:
    if isinstance(v, str):
        return {"nan": math.nan, "inf": math.inf, "-inf": -math.inf}[v]
    return float(v)


def encode_value(b: BoxedValue) -> dict:
    t = b.tag
    if t is BOOL:
        return {"t": "bool", "v": bool(b.payload)}
    if t is I32 or t is I64:
        return {"t": t.name, "v": b.payload}
    if t is F32 or t is F64:
        return {"t": t.name, "v": _encode_float(b.payload)}
    if t == ARR2D:
        a = b.payload
        return {
            "t": "arr2d",
            "rows": a.rows,
            "cols": a.cols,
            "data": [_encode_float(x) for x in a.data],
        }
    raise TagMismatch("wire-encodable value", render_type(t))


def decode_value(d) -> BoxedValue:
    if not isinstance(d, dict) or "t" not in d:
        raise TagMismatch("tagged value object", repr(d))
    tag = d["t"]
    if tag in SCALAR_TAGS:
        t = SCALAR_TAGS[tag]
        v = d.get("v")
        if t is BOOL:
            if not isinstance(v, bool):
                raise TagMismatch("bool", repr(v))
            return BoxedValue(t, v)
        if t in (I32, I64):
            if not isinstance(v, int) or isinstance(v, bool):
                raise TagMismatch("integer", repr(v))
            return BoxedValue(t, v)
        return BoxedValue(t, _decode_float(v))
    if tag == "arr2d":
        rows, cols = int(d["rows"]), int(d["cols"])
        gen = d.get("gen")
        if gen is None:
            data = [_decode_float(x) for x in d["data"]]
            if len(data) != rows * cols:
                raise TagMismatch(f"{rows * cols} elements", str(len(data)))
            return BoxedValue(ARR2D, Array2D(rows, cols, data))
        if gen == "zeros":
            return BoxedValue(ARR2D, Array2D.zeros(rows, cols))
        if gen == "ones":
            return BoxedValue(ARR2D, Array2D.ones(rows, cols))
        if gen == "random":
            return BoxedValue(ARR2D, Array2D.random(rows, cols, int(d.get("seed", 0))))
        raise TagMismatch("zeros/ones/random", repr(gen))
    raise TagMismatch("known type tag", repr(tag))


def encode_reflex_reply(r: ReflexReply):
    """Flatten a reflection reply for the wire."""
    if r.payload == "truth":
        return r.value
    if r.payload == "text":
        return r.value
    if r.payload == "type":
        return render_type(r.value)
    if r.payload == "types":
        return [render_type(t) for t in r.value]
    return r.value  # entity / count / callable ids


def parse_kind(name: str) -> ReflexKind:
    try:
        return ReflexKind[name]
    except KeyError:
        raise EngineError(f"unknown reflection kind {name!r}")


def parse_format(name: str) -> ReflexFormat:
    try:
        return ReflexFormat[name]
    except KeyError:
        raise EngineError(f"unknown reflection format {name!r}")


def ok_reply(rid, value) -> str:
    return dumps({"id": rid, "ok": True, "value": value})


def error_reply(rid, message: str, code: str = "Error") -> str:
    return dumps({"code": code, "error": message, "id": rid, "ok": False})
