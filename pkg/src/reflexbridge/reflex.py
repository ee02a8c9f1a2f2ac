"""Request/reply reflection over bound entities.

Dispatch table (kind x format -> payload):

    kind                 STRING              HANDLE / OPTIMAL
    ---------------------------------------------------------
    IS_*                 Text("true"/"false") Truth(flag)
    TYPE                 Text(rendered)       Type(TypeRef)
    RETURN_TYPE          Text(rendered)       Type(TypeRef)
    ARG_TYPES            Text("(a, b)")       TypeTuple(refs)
    NUM_OVERLOADS        Text(count)          Count(n)
    OVERLOAD_AT(i)       Text(signature)      EntityHandle(id)
    CALLABLE_ID          Text(id)             Callable(id)

OPTIMAL resolves to the handle-like column: booleans and counts are
format-independent, type-valued kinds avoid re-parsing. Replies are pure:
reflection never instantiates templates — asking RETURN_TYPE of an
un-instantiated function template is a KindMismatch.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, auto
from typing import Optional, Union

from .entities import Engine, Entity, EntityKind
from .errors import IndexOutOfRange, KindMismatch
from .types import ClassType, InstantiationType, TypeRef, render_type


class ReflexKind(Enum):
    IS_NAMESPACE = auto()
    IS_CLASS = auto()
    IS_TEMPLATE = auto()
    IS_FUNCTION = auto()
    IS_METHOD = auto()
    IS_DATA_MEMBER = auto()
    TYPE = auto()
    RETURN_TYPE = auto()
    ARG_TYPES = auto()
    NUM_OVERLOADS = auto()
    OVERLOAD_AT = auto()
    CALLABLE_ID = auto()


BOOLEAN_KINDS = (
    ReflexKind.IS_NAMESPACE,
    ReflexKind.IS_CLASS,
    ReflexKind.IS_TEMPLATE,
    ReflexKind.IS_FUNCTION,
    ReflexKind.IS_METHOD,
    ReflexKind.IS_DATA_MEMBER,
)


class ReflexFormat(Enum):
    STRING = auto()
    HANDLE = auto()
    OPTIMAL = auto()


@dataclass(frozen=True)
class ReflexReply:
    payload: str  # truth | text | type | types | entity | count | callable
    value: Union[bool, str, TypeRef, tuple, int]

    @staticmethod
    def truth(v: bool) -> "ReflexReply":
        return ReflexReply("truth", v)

    @staticmethod
    def text(v: str) -> "ReflexReply":
        return ReflexReply("text", v)

    @staticmethod
    def type_(v: TypeRef) -> "ReflexReply":
        return ReflexReply("type", v)

    @staticmethod
    def types(v: tuple) -> "ReflexReply":
        return ReflexReply("types", v)

    @staticmethod
    def entity(v: int) -> "ReflexReply":
        return ReflexReply("entity", v)

    @staticmethod
    def count(v: int) -> "ReflexReply":
        return ReflexReply("count", v)

    @staticmethod
    def callable_(v: int) -> "ReflexReply":
        return ReflexReply("callable", v)


def _is_concrete_callable(e: Entity) -> bool:
    return e.kind in (EntityKind.FUNCTION, EntityKind.METHOD) or (
        e.kind is EntityKind.INSTANTIATION and e.signature is not None
    )


def _boolean(engine: Engine, target: Entity, kind: ReflexKind) -> bool:
    k = target.kind
    if kind is ReflexKind.IS_NAMESPACE:
        return k is EntityKind.NAMESPACE
    if kind is ReflexKind.IS_CLASS:
        return k is EntityKind.CLASS or (
            k is EntityKind.INSTANTIATION and target.signature is None
        )
    if kind is ReflexKind.IS_TEMPLATE:
        return k in (EntityKind.CLASS_TEMPLATE, EntityKind.FUNCTION_TEMPLATE)
    if kind is ReflexKind.IS_FUNCTION:
        return k in (EntityKind.FUNCTION, EntityKind.OVERLOAD_SET, EntityKind.FUNCTION_TEMPLATE) or (
            k is EntityKind.INSTANTIATION and target.signature is not None
        )
    if kind is ReflexKind.IS_METHOD:
        return k is EntityKind.METHOD
    return k is EntityKind.DATA_MEMBER


def _type_of(engine: Engine, target: Entity) -> TypeRef:
    k = target.kind
    if k is EntityKind.CLASS:
        return ClassType(target.id, target.qualified_name)
    if k is EntityKind.DATA_MEMBER:
        return target.decl_type
    if k is EntityKind.INSTANTIATION and target.signature is None:
        origin = engine.entity(target.origin_template)
        return InstantiationType(origin.id, origin.qualified_name, target.type_args)
    raise KindMismatch(ReflexKind.TYPE, k)


def _render_sig(e: Entity) -> str:
    ps = ", ".join(render_type(p.type) for p in e.signature.params)
    return f"{e.name}({ps}) -> {render_type(e.signature.return_type)}"


def cpp_reflex(
    engine: Engine,
    target: Entity,
    kind: ReflexKind,
    format: ReflexFormat = ReflexFormat.OPTIMAL,
    index: Optional[int] = None,
) -> ReflexReply:
    """One reflection request; pure — no instantiation, no table mutation."""
    as_string = format is ReflexFormat.STRING

    if kind in BOOLEAN_KINDS:
        flag = _boolean(engine, target, kind)
        return ReflexReply.text("true" if flag else "false") if as_string else ReflexReply.truth(flag)

    if kind is ReflexKind.TYPE:
        t = _type_of(engine, target)
        return ReflexReply.text(render_type(t)) if as_string else ReflexReply.type_(t)

    if kind is ReflexKind.RETURN_TYPE:
        if not _is_concrete_callable(target):
            raise KindMismatch(kind, target.kind)
        t = target.signature.return_type
        return ReflexReply.text(render_type(t)) if as_string else ReflexReply.type_(t)

    if kind is ReflexKind.ARG_TYPES:
        if not _is_concrete_callable(target):
            raise KindMismatch(kind, target.kind)
        ts = target.signature.param_types()
        if as_string:
            return ReflexReply.text("(" + ", ".join(render_type(t) for t in ts) + ")")
        return ReflexReply.types(ts)

    if kind is ReflexKind.NUM_OVERLOADS:
        if target.kind is EntityKind.OVERLOAD_SET:
            n = len(target.children)
        elif target.is_callable():
            n = 1
        else:
            raise KindMismatch(kind, target.kind)
        return ReflexReply.text(str(n)) if as_string else ReflexReply.count(n)

    if kind is ReflexKind.OVERLOAD_AT:
        if target.kind is not EntityKind.OVERLOAD_SET:
            raise KindMismatch(kind, target.kind)
        if index is None or not (0 <= index < len(target.children)):
            raise IndexOutOfRange(f"overload index {index!r} of {len(target.children)}")
        child = engine.entity(target.children[index])
        return ReflexReply.text(_render_sig(child)) if as_string else ReflexReply.entity(child.id)

    if kind is ReflexKind.CALLABLE_ID:
        if not _is_concrete_callable(target):
            raise KindMismatch(kind, target.kind)
        return ReflexReply.text(str(target.id)) if as_string else ReflexReply.callable_(target.id)

    raise KindMismatch(kind, target.kind)


def list_members(engine: Engine, target: Entity) -> list[tuple[str, int]]:
    """Children of a namespace, class, or class instantiation, in
    declaration order."""
    if target.kind not in (EntityKind.NAMESPACE, EntityKind.CLASS, EntityKind.INSTANTIATION):
        raise KindMismatch("list_members", target.kind)
    if target.kind is EntityKind.INSTANTIATION and target.signature is not None:
        raise KindMismatch("list_members", "function instantiation")
    return [(engine.entity(c).name, c) for c in target.children]
