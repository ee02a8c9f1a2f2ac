"""Shared scalar semantics: both evaluation paths funnel through these.

Integers wrap at their declared width (two's complement); integer division
by zero is an EvalError; float division follows IEEE-754 (inf/nan). f32
values are stored as Python floats rounded to single precision after every
operation.
"""

from __future__ import annotations

import math
import struct

from .errors import EvalError
from .types import BOOL, F32, F64, I32, I64, TypeRef

_U32 = 1 << 32
_U64 = 1 << 64


def wrap32(v: int) -> int:
    v &= _U32 - 1
    return v - _U32 if v >= 1 << 31 else v


def wrap64(v: int) -> int:
    v &= _U64 - 1
    return v - _U64 if v >= 1 << 63 else v


def f32round(v: float) -> float:
    return struct.unpack("f", struct.pack("f", v))[0]


def _fdiv(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def _idiv(a: int, b: int) -> int:
    if b == 0:
        raise EvalError("integer division by zero")
    # C++ integer division truncates toward zero.
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def binop(op: str, t: TypeRef, a, b):
    """Apply op to two operands already of type t; result has type t."""
    if t is I32:
        if op == "+":
            return wrap32(a + b)
        if op == "-":
            return wrap32(a - b)
        if op == "*":
            return wrap32(a * b)
        return wrap32(_idiv(a, b))
    if t is I64:
        if op == "+":
            return wrap64(a + b)
        if op == "-":
            return wrap64(a - b)
        if op == "*":
            return wrap64(a * b)
        return wrap64(_idiv(a, b))
    if t is F64:
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        return _fdiv(a, b)
    if t is F32:
        if op == "+":
            return f32round(a + b)
        if op == "-":
            return f32round(a - b)
        if op == "*":
            return f32round(a * b)
        return f32round(_fdiv(a, b))
    raise EvalError(f"arithmetic is not defined on {t}")


def convert(value, src: TypeRef, dst: TypeRef):
    """Explicit value conversion (functional-cast semantics).

    float -> int truncates toward zero; int widths wrap; bool converts to
    0/1. Conversion of non-finite floats to integers is an EvalError.
    """
    if src == dst:
        return value
    if dst is F64:
        return float(value)
    if dst is F32:
        return f32round(float(value))
    if dst in (I32, I64):
        if src in (F32, F64):
            if math.isnan(value) or math.isinf(value):
                raise EvalError(f"cannot convert {value!r} to an integer")
            value = int(value)  # truncates toward zero
        elif src is BOOL:
            value = int(value)
        return wrap32(value) if dst is I32 else wrap64(value)
    if dst is BOOL:
        return bool(value)
    raise EvalError(f"no conversion from {src} to {dst}")


def binop_fn(op: str, t: TypeRef):
    """Pre-bound operator for the hot path; looked up once at lowering."""
    if t in (F64,) and op != "/":
        import operator

        return {"+": operator.add, "-": operator.sub, "*": operator.mul}[op]
    if t is F64:
        return _fdiv

    def apply(a, b, _op=op, _t=t):
        return binop(_op, _t, a, b)

    return apply


def convert_fn(src: TypeRef, dst: TypeRef):
    if dst is F64:
        return float

    def apply(v, _s=src, _d=dst):
        return convert(v, _s, _d)

    return apply


def zero_of(t: TypeRef):
    if t in (I32, I64):
        return 0
    if t in (F32, F64):
        return 0.0
    if t is BOOL:
        return False
    return None
