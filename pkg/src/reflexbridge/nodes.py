"""Syntax-tree nodes shared by declaration bodies and kernels.

Every node carries a parse-scoped integer id (the key used by typing maps)
and the source span it was read from. Nodes are plain mutable dataclasses;
identity-sensitive maps key on ``node_id``, never on object identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .types import TypeRef


@dataclass(frozen=True)
class SourceSpan:
    line: int  # 1-based
    column: int  # 1-based
    length: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


DUMMY_SPAN = SourceSpan(1, 1, 0)


@dataclass
class Node:
    node_id: int
    span: SourceSpan


# --- expressions ---------------------------------------------------------


@dataclass
class Lit(Node):
    value: Union[bool, int, float]
    type: TypeRef


@dataclass
class NameRef(Node):
    name: str


@dataclass
class Index2D(Node):
    arr: "Expr"
    i: "Expr"
    j: "Expr"


@dataclass
class BinOp(Node):
    op: str  # one of + - * /
    lhs: "Expr"
    rhs: "Expr"


@dataclass
class Cast(Node):
    """Functional-style value conversion, e.g. ``i64(x)`` or ``T(t + 42)``."""

    target: TypeRef
    value: "Expr"


@dataclass
class Call(Node):
    """Bound call; the callee is an unresolved name until typing."""

    name: str
    args: list["Expr"]
    explicit_targs: Optional[tuple[TypeRef, ...]] = None


@dataclass
class DimRead(Node):
    """rows(a) / cols(a); the only legal loop-bound expressions besides
    integer literals."""

    arr: str
    axis: int  # 0 = rows, 1 = cols


@dataclass
class MemberRead(Node):
    obj: "Expr"
    member: str


@dataclass
class MethodCall(Node):
    obj: "Expr"
    method: str
    args: list["Expr"]


@dataclass
class Construct(Node):
    """Default-construct a class instance; member initializers apply."""

    class_name: str


Expr = Union[
    Lit, NameRef, Index2D, BinOp, Cast, Call, DimRead, MemberRead, MethodCall, Construct
]


# --- statements (kernel language) ----------------------------------------


@dataclass
class LetStmt(Node):
    name: str
    value: Expr


@dataclass
class ForRange(Node):
    """``for v in 0..bound { body }``; bound is an integer literal or a
    DimRead, fixed before the first iteration."""

    var: str
    bound: Expr
    body: list["Stmt"]


@dataclass
class CompoundAssign(Node):
    name: str
    op: str  # one of + - * /
    value: Expr


@dataclass
class ReturnStmt(Node):
    value: Expr


Stmt = Union[LetStmt, ForRange, CompoundAssign, ReturnStmt]


@dataclass
class KernelDef(Node):
    name: str
    params: list[tuple[str, TypeRef]]
    return_type: TypeRef
    body: list[Stmt]


@dataclass
class FuncBody:
    """Body of a bound function or method: side-effect-free locals
    followed by a single result expression."""

    lets: list[LetStmt] = field(default_factory=list)
    result: Expr = None  # type: ignore[assignment]


def walk_expr(e: Expr):
    """Yield e and all sub-expressions, depth-first."""
    yield e
    if isinstance(e, Index2D):
        yield from walk_expr(e.arr)
        yield from walk_expr(e.i)
        yield from walk_expr(e.j)
    elif isinstance(e, BinOp):
        yield from walk_expr(e.lhs)
        yield from walk_expr(e.rhs)
    elif isinstance(e, Cast):
        yield from walk_expr(e.value)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk_expr(a)
    elif isinstance(e, MemberRead):
        yield from walk_expr(e.obj)
    elif isinstance(e, MethodCall):
        yield from walk_expr(e.obj)
        for a in e.args:
            yield from walk_expr(a)


def walk_stmts(stmts: list[Stmt]):
    """Yield every statement and expression node under stmts."""
    for s in stmts:
        yield s
        if isinstance(s, LetStmt):
            yield from walk_expr(s.value)
        elif isinstance(s, ForRange):
            yield from walk_expr(s.bound)
            yield from walk_stmts(s.body)
        elif isinstance(s, CompoundAssign):
            yield from walk_expr(s.value)
        elif isinstance(s, ReturnStmt):
            yield from walk_expr(s.value)


def count_body_nodes(body: FuncBody) -> int:
    n = 0
    for let in body.lets:
        n += 1 + sum(1 for _ in walk_expr(let.value))
    n += sum(1 for _ in walk_expr(body.result))
    return n
