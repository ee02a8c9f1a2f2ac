"""Expression grammar shared by function bodies and kernels.

Precedence: additive < multiplicative < postfix (member/method/index) <
atoms. There are no comparison operators anywhere in the language, so
``name<`` can only open an explicit template-argument list.
"""

from __future__ import annotations

from typing import Callable, Optional

from .errors import ParseError, UndeclaredLocal
from .lexer import TokenStream
from .nodes import (
    BinOp,
    Call,
    Cast,
    Construct,
    DimRead,
    Expr,
    Index2D,
    Lit,
    MemberRead,
    MethodCall,
    NameRef,
    SourceSpan,
)
from .types import BUILTINS, F32, F64, I32, I64, TypeRef


class NodeIds:
    def __init__(self) -> None:
        self._next = 0

    def take(self) -> int:
        nid = self._next
        self._next += 1
        return nid


class ExprParser:
    """Configurable Pratt-less recursive-descent expression parser.

    cast_types maps spellings usable as functional casts (C++ spellings in
    declaration bodies, canonical ones in kernels; template parameters are
    merged in by the declaration parser). kernel_mode enables 2-D indexing
    and rows()/cols().
    """

    def __init__(
        self,
        ts: TokenStream,
        ids: NodeIds,
        cast_types: dict[str, TypeRef],
        kernel_mode: bool = False,
        parse_targ: Optional[Callable[[], TypeRef]] = None,
        known_locals: Optional[set[str]] = None,
    ):
        self.ts = ts
        self.ids = ids
        self.cast_types = cast_types
        self.kernel_mode = kernel_mode
        self.parse_targ = parse_targ
        self.known_locals = known_locals

    def parse(self) -> Expr:
        return self._additive()

    def _additive(self) -> Expr:
        lhs = self._multiplicative()
        while self.ts.at("+") or self.ts.at("-"):
            op = self.ts.next()
            rhs = self._multiplicative()
            lhs = BinOp(self.ids.take(), op.span, op.text, lhs, rhs)
        return lhs

    def _multiplicative(self) -> Expr:
        lhs = self._unary()
        while self.ts.at("*") or self.ts.at("/"):
            op = self.ts.next()
            rhs = self._unary()
            lhs = BinOp(self.ids.take(), op.span, op.text, lhs, rhs)
        return lhs

    def _unary(self) -> Expr:
        if self.ts.at("-"):
            minus = self.ts.next()
            tok = self.ts.peek()
            if tok.kind not in ("int", "float"):
                raise ParseError(minus.span, "unary minus is only supported on literals")
            return self._literal(negate=True)
        return self._postfix()

    def _postfix(self) -> Expr:
        e = self._atom()
        while True:
            if self.ts.at("."):
                self.ts.next()
                name = self.ts.expect_ident()
                if self.ts.at("("):
                    args = self._call_args()
                    e = MethodCall(self.ids.take(), name.span, e, name.text, args)
                else:
                    e = MemberRead(self.ids.take(), name.span, e, name.text)
            elif self.kernel_mode and self.ts.at("["):
                lb = self.ts.next()
                i = self.parse()
                self.ts.expect(",")
                j = self.parse()
                self.ts.expect("]")
                e = Index2D(self.ids.take(), lb.span, e, i, j)
            else:
                return e

    def _atom(self) -> Expr:
        tok = self.ts.peek()
        if tok.kind in ("int", "float"):
            return self._literal()
        if tok.kind == "punct" and tok.text == "(":
            self.ts.next()
            e = self.parse()
            self.ts.expect(")")
            return e
        if tok.kind == "ident":
            name = self.ts.next()
            if name.text in self.cast_types and self.ts.at("("):
                self.ts.next()
                value = self.parse()
                self.ts.expect(")")
                return Cast(self.ids.take(), name.span, self.cast_types[name.text], value)
            if self.kernel_mode and name.text in ("rows", "cols") and self.ts.at("("):
                self.ts.next()
                arr = self.ts.expect_ident()
                self.ts.expect(")")
                self._check_local(arr.text, arr.span)
                axis = 0 if name.text == "rows" else 1
                return DimRead(self.ids.take(), name.span, arr.text, axis)
            if self.ts.at("<"):
                if self.parse_targ is None:
                    raise ParseError(self.ts.peek().span, "template arguments not allowed here")
                self.ts.next()
                targs = [self.parse_targ()]
                while self.ts.eat(","):
                    targs.append(self.parse_targ())
                self.ts.expect(">")
                args = self._call_args()
                return Call(self.ids.take(), name.span, name.text, args, tuple(targs))
            if self.ts.at("("):
                args = self._call_args()
                return Call(self.ids.take(), name.span, name.text, args)
            self._check_local(name.text, name.span)
            return NameRef(self.ids.take(), name.span, name.text)
        raise ParseError(tok.span, f"expected expression, found {tok.text or tok.kind!r}")

    def _call_args(self) -> list[Expr]:
        self.ts.expect("(")
        args: list[Expr] = []
        if not self.ts.at(")"):
            args.append(self.parse())
            while self.ts.eat(","):
                args.append(self.parse())
        self.ts.expect(")")
        return args

    def _literal(self, negate: bool = False) -> Lit:
        tok = self.ts.next()
        value = -tok.value if negate else tok.value
        if tok.suffix:
            t = BUILTINS[tok.suffix]
            if t in (I32, I64) and tok.kind == "float":
                raise ParseError(tok.span, f"float literal with integer suffix {tok.suffix}")
            if t in (F32, F64):
                value = float(value)
        else:
            t = F64 if tok.kind == "float" else I32
        return Lit(self.ids.take(), tok.span, value, t)

    def _check_local(self, name: str, span: SourceSpan) -> None:
        if self.known_locals is not None and name not in self.known_locals:
            raise UndeclaredLocal(name, span)


def make_construct(ids: NodeIds, span: SourceSpan, class_name: str) -> Construct:
    return Construct(ids.take(), span, class_name)
