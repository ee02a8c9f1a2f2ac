"""Canonical type references.

TypeRefs are immutable value objects; two refs denote the same type exactly
when their canonical renderings are equal. Within one engine the mapping
between class/template names and entity ids is a bijection, so structural
equality and rendered-string equality agree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator


@dataclass(frozen=True)
class TypeRef:
    """Base class for all type references."""

    def walk(self) -> Iterator["TypeRef"]:
        yield self


@dataclass(frozen=True)
class BuiltinType(TypeRef):
    name: str  # one of: void, bool, i32, i64, f32, f64


VOID = BuiltinType("void")
BOOL = BuiltinType("bool")
I32 = BuiltinType("i32")
I64 = BuiltinType("i64")
F32 = BuiltinType("f32")
F64 = BuiltinType("f64")

#: All builtin scalars by canonical spelling.
BUILTINS = {t.name: t for t in (VOID, BOOL, I32, I64, F32, F64)}

#: C++ surface spellings accepted by the declaration parser.
CPP_SPELLINGS = {
    "void": VOID,
    "bool": BOOL,
    "int": I32,
    "long": I64,
    "float": F32,
    "double": F64,
}

#: Inverse map used when printing declarations back to C++ syntax.
CPP_NAMES = {t: s for s, t in CPP_SPELLINGS.items()}

INT_TYPES = (I32, I64)
FLOAT_TYPES = (F32, F64)
NUMERIC_TYPES = INT_TYPES + FLOAT_TYPES

#: Widening order used by the usual-arithmetic rule (wider operand wins).
ARITH_ORDER = {I32: 0, I64: 1, F32: 2, F64: 3}


@dataclass(frozen=True)
class ClassType(TypeRef):
    entity_id: int
    name: str  # qualified name of the class


@dataclass(frozen=True)
class InstantiationType(TypeRef):
    template_id: int
    template_name: str
    args: tuple[TypeRef, ...]

    def walk(self) -> Iterator[TypeRef]:
        yield self
        for a in self.args:
            yield from a.walk()


@dataclass(frozen=True)
class TemplateParamType(TypeRef):
    """A template parameter such as T; legal only inside template bodies."""

    name: str


@dataclass(frozen=True)
class PackExpansionType(TypeRef):
    """A parameter-pack expansion such as Rest...; legal only inside
    variadic specialization bodies."""

    name: str


@dataclass(frozen=True)
class Array2DType(TypeRef):
    """Row-major 2-D array; the element type is always f64 in this engine."""

    element: TypeRef = F64

    def walk(self) -> Iterator[TypeRef]:
        yield self
        yield from self.element.walk()


ARR2D = Array2DType(F64)


def render_type(t: TypeRef) -> str:
    """Render the canonical spelling of a type.

    Total: template parameters and packs render as their names, which is
    only meaningful for diagnostics. Nested instantiations render
    innermost-first textually, e.g. ``Vec<Vec<f64>>``.
    """
    if isinstance(t, BuiltinType):
        return t.name
    if isinstance(t, ClassType):
        return t.name
    if isinstance(t, InstantiationType):
        inner = ", ".join(render_type(a) for a in t.args)
        return f"{t.template_name}<{inner}>"
    if isinstance(t, TemplateParamType):
        return t.name
    if isinstance(t, PackExpansionType):
        return f"{t.name}..."
    if isinstance(t, Array2DType):
        return "arr2d"
    raise AssertionError(f"unrenderable type {t!r}")


def type_equal(a: TypeRef, b: TypeRef) -> bool:
    """Structural equality; agrees with render_type equality by construction."""
    return a == b


def is_concrete(t: TypeRef) -> bool:
    """True when no template parameter or pack occurs anywhere in the tree."""
    return not any(
        isinstance(n, (TemplateParamType, PackExpansionType)) for n in t.walk()
    )


def count_nodes(t: TypeRef) -> int:
    """Number of nodes in the type tree (memory proxy for instantiation)."""
    return sum(1 for _ in t.walk())
