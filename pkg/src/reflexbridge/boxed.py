"""Boxed dynamic values: the currency of the slow path.

Every value crossing the dynamic call boundary is wrapped in a tagged
BoxedValue; the tag is the canonical TypeRef of the payload. Unboxing
checks the tag against the expected type and performs at most a widening
conversion — narrowing is always a TagMismatch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .errors import IndexOutOfBounds, TagMismatch
from .numerics import convert, zero_of
from .specializer import conversion_rank
from .types import (
    ARR2D,
    BOOL,
    F64,
    I64,
    Array2DType,
    ClassType,
    InstantiationType,
    TypeRef,
    render_type,
)


class Array2D:
    """Row-major 2-D f64 buffer with explicit dims, shared by both paths."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: list[float]):
        assert len(data) == rows * cols
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Array2D":
        return cls(rows, cols, [0.0] * (rows * cols))

    @classmethod
    def ones(cls, rows: int, cols: int) -> "Array2D":
        return cls(rows, cols, [1.0] * (rows * cols))

    @classmethod
    def random(cls, rows: int, cols: int, seed: int) -> "Array2D":
        import random as _random

        rng = _random.Random(seed)
        return cls(rows, cols, [rng.random() for _ in range(rows * cols)])

    def get(self, i: int, j: int) -> float:
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexOutOfBounds(i, j, (self.rows, self.cols))
        return self.data[i * self.cols + j]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Array2D)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __repr__(self) -> str:
        return f"Array2D({self.rows}x{self.cols})"


@dataclass
class DynInstance:
    """Slow-path object: per-instance slot map, never aliased between
    constructions."""

    class_id: int
    slots: dict[str, "BoxedValue"] = field(default_factory=dict)


Payload = Union[bool, int, float, Array2D, DynInstance]


@dataclass(frozen=True)
class BoxedValue:
    tag: TypeRef
    payload: Payload

    def __repr__(self) -> str:
        return f"Boxed{{{render_type(self.tag)}, {self.payload!r}}}"


def box(value, t: TypeRef | None = None) -> BoxedValue:
    """Wrap a native value; without an explicit type, Python floats box as
    f64, ints as i64, bools as bool."""
    if t is None:
        if isinstance(value, bool):
            t = BOOL
        elif isinstance(value, int):
            t = I64
        elif isinstance(value, float):
            t = F64
        elif isinstance(value, Array2D):
            t = ARR2D
        elif isinstance(value, DynInstance):
            raise TagMismatch("explicit class type", "instance")
        else:
            raise TagMismatch("scalar or array", type(value).__name__)
    return BoxedValue(t, value)


def unbox(b: BoxedValue, expected: TypeRef):
    """Extract the payload as `expected`; widening conversions only."""
    if b.tag == expected:
        return b.payload
    if isinstance(expected, (Array2DType, ClassType, InstantiationType)):
        raise TagMismatch(render_type(expected), render_type(b.tag))
    rank = conversion_rank(b.tag, expected)
    if rank is None:
        raise TagMismatch(render_type(expected), render_type(b.tag))
    return convert(b.payload, b.tag, expected)


def default_instance(engine, class_ent) -> DynInstance:
    """Default-construct: slots take member initializers or zero values."""
    inst = DynInstance(class_ent.id)
    for member in engine.class_members(class_ent):
        mt = member.decl_type
        if isinstance(mt, (ClassType, InstantiationType)):
            nested_ent = _class_entity(engine, mt)
        else:
            nested_ent = None
        if nested_ent is not None:
            inst.slots[member.name] = BoxedValue(mt, default_instance(engine, nested_ent))
        else:
            value = member.initializer if member.initializer is not None else zero_of(mt)
            inst.slots[member.name] = BoxedValue(mt, value)
    return inst


def _class_entity(engine, t: TypeRef):
    if isinstance(t, ClassType):
        return engine.entity(t.entity_id)
    if isinstance(t, InstantiationType):
        from .specializer import instantiate

        return instantiate(engine, engine.entity(t.template_id), list(t.args))
    return None
