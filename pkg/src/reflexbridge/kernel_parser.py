"""Parser for the kernel mini-language (.krn files).

A kernel is a typed closure body: scalar/array parameters, local lets,
range loops over 0..bound, compound assignments, and a single trailing
return. Bound calls stay unresolved names until typing.

    kernel trace(a: arr2d) -> f64 {
        let trace = 0.0;
        for i in 0..rows(a) {
            trace += add42(a[i, i]) + add42(i64(a[i, i]));
        }
        return trace;
    }
"""

from __future__ import annotations

from .errors import ParseError, UndeclaredLocal
from .expr_parser import ExprParser, NodeIds
from .lexer import TokenStream
from .nodes import (
    CompoundAssign,
    Construct,
    DimRead,
    ForRange,
    KernelDef,
    LetStmt,
    Lit,
    ReturnStmt,
    SourceSpan,
    Stmt,
)
from .types import ARR2D, BOOL, F32, F64, I32, I64, TypeRef

KERNEL_TYPES: dict[str, TypeRef] = {
    "bool": BOOL,
    "i32": I32,
    "i64": I64,
    "f32": F32,
    "f64": F64,
    "arr2d": ARR2D,
}
_CAST_TYPES = {"i32": I32, "i64": I64, "f32": F32, "f64": F64}
_KEYWORDS = {"kernel", "let", "for", "in", "return", "rows", "cols"} | set(KERNEL_TYPES)


class _KernelParser:
    def __init__(self, source: str):
        self.ts = TokenStream(source)
        self.ids = NodeIds()
        self.locals: set[str] = set()

    def parse_file(self) -> list[KernelDef]:
        kernels = []
        while not self.ts.at_eof():
            kernels.append(self.parse_kernel())
        return kernels

    def parse_kernel(self) -> KernelDef:
        kw = self.ts.expect_word("kernel")
        name = self.ts.expect_ident()
        self.ts.expect("(")
        params: list[tuple[str, TypeRef]] = []
        self.locals = set()
        if not self.ts.at(")"):
            while True:
                pname = self.ts.expect_ident()
                self.ts.expect(":")
                params.append((pname.text, self.parse_type()))
                self.declare(pname.text, pname.span)
                if not self.ts.eat(","):
                    break
        self.ts.expect(")")
        self.ts.expect("->")
        ret = self.parse_type()
        body = self.parse_block(top_level=True)
        return KernelDef(self.ids.take(), kw.span, name.text, params, ret, body)

    def parse_type(self) -> TypeRef:
        tok = self.ts.expect_ident()
        if tok.text not in KERNEL_TYPES:
            raise ParseError(tok.span, f"unknown kernel type {tok.text!r}")
        return KERNEL_TYPES[tok.text]

    def parse_block(self, top_level: bool = False) -> list[Stmt]:
        self.ts.expect("{")
        stmts: list[Stmt] = []
        saw_return = False
        while not self.ts.at("}"):
            if saw_return:
                raise ParseError(self.ts.peek().span, "return must be the final statement")
            stmt = self.parse_stmt(allow_return=top_level)
            saw_return = isinstance(stmt, ReturnStmt)
            stmts.append(stmt)
        brace = self.ts.expect("}")
        if top_level and not saw_return:
            raise ParseError(brace.span, "kernel body must end with a return")
        return stmts

    def parse_stmt(self, allow_return: bool) -> Stmt:
        tok = self.ts.peek()
        if tok.kind != "ident":
            raise ParseError(tok.span, f"expected a statement, found {tok.text!r}")
        if tok.text == "let":
            self.ts.next()
            name = self.ts.expect_ident()
            eq = self.ts.expect("=")
            value = self.expr()
            self.ts.expect(";")
            self.declare(name.text, name.span)
            return LetStmt(self.ids.take(), eq.span, name.text, value)
        if tok.text == "for":
            return self.parse_for()
        if tok.text == "return":
            ret = self.ts.next()
            if not allow_return:
                raise ParseError(ret.span, "return is only allowed at the end of the kernel")
            value = self.expr()
            self.ts.expect(";")
            return ReturnStmt(self.ids.take(), ret.span, value)
        # `Class var;` construct-declaration
        nxt = self.ts.peek(1)
        if nxt.kind == "ident" and tok.text not in _KEYWORDS:
            cls = self.ts.next()
            var = self.ts.expect_ident()
            self.ts.expect(";")
            self.declare(var.text, var.span)
            value = Construct(self.ids.take(), cls.span, cls.text)
            return LetStmt(self.ids.take(), var.span, var.text, value)
        name = self.ts.expect_ident()
        if name.text not in self.locals:
            raise UndeclaredLocal(name.text, name.span)
        op = self.ts.peek()
        if op.kind == "punct" and op.text in ("+=", "-=", "*=", "/="):
            self.ts.next()
            value = self.expr()
            self.ts.expect(";")
            return CompoundAssign(self.ids.take(), op.span, name.text, op.text[0], value)
        raise ParseError(op.span, f"expected a compound assignment, found {op.text!r}")

    def parse_for(self) -> ForRange:
        kw = self.ts.expect_word("for")
        var = self.ts.expect_ident()
        self.ts.expect_word("in")
        lo = self.ts.peek()
        if lo.kind != "int" or lo.value != 0:
            raise ParseError(lo.span, "range loops must start at 0")
        self.ts.next()
        self.ts.expect("..")
        bound = self.parse_bound()
        self.declare(var.text, var.span)
        body = self.parse_block()
        self.locals.discard(var.text)
        return ForRange(self.ids.take(), kw.span, var.text, bound, body)

    def parse_bound(self):
        tok = self.ts.peek()
        if tok.kind == "int":
            self.ts.next()
            return Lit(self.ids.take(), tok.span, tok.value, I64 if tok.suffix == "i64" else I32)
        if tok.kind == "ident" and tok.text in ("rows", "cols"):
            self.ts.next()
            self.ts.expect("(")
            arr = self.ts.expect_ident()
            self.ts.expect(")")
            if arr.text not in self.locals:
                raise UndeclaredLocal(arr.text, arr.span)
            return DimRead(self.ids.take(), tok.span, arr.text, 0 if tok.text == "rows" else 1)
        raise ParseError(
            tok.span, "loop bounds must be integer literals or rows()/cols() of an array"
        )

    def expr(self):
        return ExprParser(
            self.ts,
            self.ids,
            _CAST_TYPES,
            kernel_mode=True,
            parse_targ=self.parse_type,
            known_locals=self.locals,
        ).parse()

    def declare(self, name: str, span) -> None:
        if name in self.locals:
            raise ParseError(span, f"redeclaration of {name!r}")
        if name in _KEYWORDS:
            raise ParseError(span, f"{name!r} is a reserved word")
        self.locals.add(name)


def parse_kernel(source: str) -> KernelDef:
    """Parse a source containing exactly one kernel."""
    kernels = _KernelParser(source).parse_file()
    if len(kernels) != 1:
        raise ParseError(SourceSpan(1, 1, 0), f"expected exactly one kernel, found {len(kernels)}")
    return kernels[0]


def parse_kernel_file(source: str) -> list[KernelDef]:
    """Parse a source containing one or more kernels."""
    return _KernelParser(source).parse_file()
