"""Recursive-descent parser for the C++-like declaration subset.

Accepted: free functions with expression bodies, overloads, single-type-
parameter function and class templates, structs/classes with initialized
data members and methods, one level of namespaces, and variadic class
templates restricted to the {primary declaration; recursive partial
specialization; empty-pack specialization} pattern.
"""

from __future__ import annotations

from typing import Optional

from .entities import Engine, Entity, EntityKind, Param, Signature, TemplateInfo
from .errors import ParseError, Redefinition, UnsupportedConstruct
from .expr_parser import ExprParser, NodeIds
from .lexer import TokenStream
from .nodes import FuncBody, LetStmt, Lit
from .types import (
    CPP_NAMES,
    CPP_SPELLINGS,
    BuiltinType,
    ClassType,
    InstantiationType,
    PackExpansionType,
    TemplateParamType,
    TypeRef,
    render_type,
)

class _DeclParser:
    def __init__(self, engine: Engine, source: str):
        self.engine = engine
        self.ts = TokenStream(source)
        self.ids = NodeIds()
        self.ns_prefix = ""
        self.tparams: dict[str, TypeRef] = {}
        # function id -> overload-set id, once a later declaration absorbs it
        self._absorbed: dict[int, int] = {}

    # -- entry ---------------------------------------------------------

    def parse_unit(self) -> list[Entity]:
        top: list[int] = []
        while not self.ts.at_eof():
            top.append(self.parse_decl().id)
        return [self.engine.entity(i) for i in self._dedupe(top)]

    def _dedupe(self, ids: list[int]) -> list[int]:
        out: list[int] = []
        seen: set[int] = set()
        for i in ids:
            while i in self._absorbed:
                i = self._absorbed[i]
            if i not in seen:
                seen.add(i)
                out.append(i)
        return out

    def parse_decl(self) -> Entity:
        tok = self.ts.peek()
        if tok.kind != "ident":
            raise ParseError(tok.span, f"expected a declaration, found {tok.text!r}")
        if tok.text == "namespace":
            return self.parse_namespace()
        if tok.text == "template":
            return self.parse_template()
        if tok.text in ("struct", "class"):
            return self.parse_class()
        return self.parse_function()

    # -- namespaces ------------------------------------------------------

    def parse_namespace(self) -> Entity:
        kw = self.ts.expect_word("namespace")
        if self.ns_prefix:
            raise UnsupportedConstruct(kw.span, "nested namespaces are not supported")
        name = self.ts.expect_ident()
        ns = self.engine.new_entity(
            name=name.text,
            qualified_name=self.qualify(name.text),
            kind=EntityKind.NAMESPACE,
        )
        self.ts.expect("{")
        self.ns_prefix = name.text + "::"
        try:
            while not self.ts.at("}"):
                ns.children.append(self.parse_decl().id)
        finally:
            self.ns_prefix = ""
        self.ts.expect("}")
        ns.children = self._dedupe(ns.children)
        return ns

    # -- templates ---------------------------------------------------------

    def parse_template(self) -> Entity:
        self.ts.expect_word("template")
        self.ts.expect("<")
        params: list[str] = []
        packs: set[str] = set()
        if not self.ts.at(">"):
            while True:
                self.ts.expect_word("class")
                if self.ts.eat("..."):
                    name = self.ts.expect_ident()
                    packs.add(name.text)
                else:
                    name = self.ts.expect_ident()
                params.append(name.text)
                if not self.ts.eat(","):
                    break
        self.ts.expect(">")

        self.tparams = {p: TemplateParamType(p) for p in params if p not in packs}
        self.tparams.update({p: PackExpansionType(p) for p in packs})
        try:
            head = self.ts.peek()
            if head.kind == "ident" and head.text in ("struct", "class"):
                return self.parse_class_template(params, packs)
            return self.parse_function_template(params, packs)
        finally:
            self.tparams = {}

    def parse_class_template(self, params: list[str], packs: set[str]) -> Entity:
        kw = self.ts.next()  # struct/class
        name = self.ts.expect_ident()
        qname = self.qualify(name.text)

        if self.ts.at("<"):  # a specialization of an existing variadic template
            return self.parse_specialization(kw.span, name.text, qname, params, packs)

        if packs:
            # variadic primary must be a pure declaration
            if not self.ts.eat(";"):
                raise UnsupportedConstruct(
                    self.ts.peek().span,
                    "a variadic primary template must be a bare declaration",
                )
            if len(params) != 1:
                raise UnsupportedConstruct(kw.span, "variadic template takes a single pack")
            return self.engine.new_entity(
                name=name.text,
                qualified_name=qname,
                kind=EntityKind.CLASS_TEMPLATE,
                template_info=TemplateInfo(params=params, is_variadic=True),
            )

        if len(params) != 1:
            raise UnsupportedConstruct(kw.span, "class templates take exactly one type parameter")
        ent = self.engine.new_entity(
            name=name.text,
            qualified_name=qname,
            kind=EntityKind.CLASS_TEMPLATE,
            template_info=TemplateInfo(params=params),
        )
        self.parse_class_body(ent, allow_methods=False)
        self.ts.expect(";")
        return ent

    def parse_specialization(
        self, span, name: str, qname: str, params: list[str], packs: set[str]
    ) -> Entity:
        try:
            primary = self.engine.lookup(qname)
        except Exception:
            raise UnsupportedConstruct(span, f"specialization of undeclared template {name!r}")
        if primary.kind is not EntityKind.CLASS_TEMPLATE or not primary.template_info.is_variadic:
            raise UnsupportedConstruct(span, "only variadic class templates may be specialized")

        self.ts.expect("<")
        spec_args: list[TypeRef] = []
        if not self.ts.at(">"):
            while True:
                t = self.ts.expect_ident()
                if t.text not in self.tparams:
                    raise UnsupportedConstruct(t.span, "specialization arguments must be template parameters")
                arg = self.tparams[t.text]
                if isinstance(arg, PackExpansionType):
                    self.ts.expect("...")
                spec_args.append(arg)
                if not self.ts.eat(","):
                    break
        self.ts.expect(">")

        # only the two shapes of the recursive-pack pattern are accepted
        shape = tuple(type(a) for a in spec_args)
        if spec_args and shape != (TemplateParamType, PackExpansionType):
            raise UnsupportedConstruct(span, "unsupported specialization pattern")
        if not spec_args and (params or packs):
            raise UnsupportedConstruct(span, "empty-pack specialization takes no parameters")

        rendered = ", ".join(render_type(a) for a in spec_args)
        # patterns stay out of the name table; the concrete instantiation
        # will claim the rendered spelling
        ent = self.engine.new_entity(
            register_name=False,
            name=name,
            qualified_name=f"{qname}<{rendered}>",
            kind=EntityKind.CLASS_TEMPLATE,
            template_info=TemplateInfo(
                params=params, is_variadic=bool(packs), spec_args=tuple(spec_args)
            ),
        )
        if not self.ts.eat(";"):
            self.parse_class_body(ent, allow_methods=False, register_names=False)
            self.ts.expect(";")
        primary.template_info.specializations.append(ent.id)
        return ent

    def parse_function_template(self, params: list[str], packs: set[str]) -> Entity:
        if packs or len(params) != 1:
            raise UnsupportedConstruct(
                self.ts.peek().span, "function templates take exactly one type parameter"
            )
        ret = self.parse_type()
        name = self.ts.expect_ident()
        sig = self.parse_params()
        body = self.parse_func_body()
        ent = Entity(
            id=0,
            name=name.text,
            qualified_name=self.qualify(name.text),
            kind=EntityKind.FUNCTION_TEMPLATE,
            signature=Signature(sig, ret),
            body=body,
            template_info=TemplateInfo(params=params),
        )
        return self.register_callable(ent)

    # -- classes -----------------------------------------------------------

    def parse_class(self) -> Entity:
        self.ts.next()  # struct/class
        name = self.ts.expect_ident()
        ent = self.engine.new_entity(
            name=name.text,
            qualified_name=self.qualify(name.text),
            kind=EntityKind.CLASS,
        )
        self.parse_class_body(ent, allow_methods=True)
        self.ts.expect(";")
        return ent

    def parse_class_body(self, owner: Entity, allow_methods: bool, register_names: bool = True) -> None:
        self.ts.expect("{")
        while not self.ts.at("}"):
            mtype = self.parse_type()
            mname = self.ts.expect_ident()
            if self.ts.at("("):
                if not allow_methods:
                    raise UnsupportedConstruct(mname.span, "class templates may not declare methods")
                params = self.parse_params()
                body = self.parse_func_body()
                method = Entity(
                    id=0,
                    name=mname.text,
                    qualified_name=f"{owner.qualified_name}::{mname.text}",
                    kind=EntityKind.METHOD,
                    signature=Signature(params, mtype),
                    body=body,
                    owner=owner.id,
                )
                registered = self.register_callable(method, owner=owner)
                if registered.id not in owner.children:
                    owner.children.append(registered.id)
            else:
                init = None
                if self.ts.eat("="):
                    init = self.parse_initializer(mtype)
                self.ts.expect(";")
                member = self.engine.new_entity(
                    register_name=register_names,
                    name=mname.text,
                    qualified_name=f"{owner.qualified_name}::{mname.text}",
                    kind=EntityKind.DATA_MEMBER,
                    decl_type=mtype,
                    initializer=init,
                    owner=owner.id,
                )
                owner.children.append(member.id)
        self.ts.expect("}")

    def parse_initializer(self, mtype: TypeRef):
        expr = self.expr_parser().parse()
        if not isinstance(expr, Lit):
            raise UnsupportedConstruct(self.ts.peek().span, "member initializers must be literals")
        from .numerics import convert

        return convert(expr.value, expr.type, mtype) if isinstance(mtype, BuiltinType) else expr.value

    # -- functions -----------------------------------------------------------

    def parse_function(self) -> Entity:
        ret = self.parse_type()
        name = self.ts.expect_ident()
        params = self.parse_params()
        body = self.parse_func_body()
        ent = Entity(
            id=0,
            name=name.text,
            qualified_name=self.qualify(name.text),
            kind=EntityKind.FUNCTION,
            signature=Signature(params, ret),
            body=body,
        )
        return self.register_callable(ent)

    def parse_params(self) -> list[Param]:
        self.ts.expect("(")
        params: list[Param] = []
        if not self.ts.at(")"):
            while True:
                ptype = self.parse_type()
                pname = self.ts.expect_ident()
                params.append(Param(pname.text, ptype))
                if not self.ts.eat(","):
                    break
        self.ts.expect(")")
        return params

    def parse_func_body(self) -> FuncBody:
        self.ts.expect("{")
        body = FuncBody()
        while self.ts.at_word("auto"):
            self.ts.next()
            lname = self.ts.expect_ident()
            eq = self.ts.expect("=")
            value = self.expr_parser().parse()
            self.ts.expect(";")
            body.lets.append(LetStmt(self.ids.take(), eq.span, lname.text, value))
        self.ts.expect_word("return")
        body.result = self.expr_parser().parse()
        self.ts.expect(";")
        self.ts.expect("}")
        return body

    def expr_parser(self) -> ExprParser:
        casts: dict[str, TypeRef] = {
            s: t for s, t in CPP_SPELLINGS.items() if s not in ("void",)
        }
        casts.update({n: t for n, t in self.tparams.items() if isinstance(t, TemplateParamType)})
        return ExprParser(self.ts, self.ids, casts, kernel_mode=False, parse_targ=self.parse_type)

    # -- types ---------------------------------------------------------------

    def parse_type(self) -> TypeRef:
        tok = self.ts.expect_ident()
        if tok.text in CPP_SPELLINGS:
            return CPP_SPELLINGS[tok.text]
        if tok.text in self.tparams:
            t = self.tparams[tok.text]
            if isinstance(t, PackExpansionType):
                self.ts.expect("...")
            return t
        qname = self.qualify_type_name(tok.text)
        if self.ts.at("<"):
            self.ts.next()
            args: list[TypeRef] = []
            if not self.ts.at(">"):
                while True:
                    args.append(self.parse_type())
                    if not self.ts.eat(","):
                        break
            self.ts.expect(">")
            tmpl = self.lookup_type_entity(qname, tok.span)
            if tmpl.kind is not EntityKind.CLASS_TEMPLATE:
                raise ParseError(tok.span, f"{tok.text!r} is not a template")
            return InstantiationType(tmpl.id, tmpl.qualified_name, tuple(args))
        ent = self.lookup_type_entity(qname, tok.span)
        if ent.kind is EntityKind.CLASS:
            return ClassType(ent.id, ent.qualified_name)
        raise ParseError(tok.span, f"{tok.text!r} does not name a type")

    def lookup_type_entity(self, qname: str, span) -> Entity:
        if self.engine.has_name(qname):
            return self.engine.lookup(qname)
        if self.engine.has_name(qname.split("::")[-1]):
            return self.engine.lookup(qname.split("::")[-1])
        raise ParseError(span, f"unknown type {qname!r}")

    def qualify(self, name: str) -> str:
        return self.ns_prefix + name

    def qualify_type_name(self, name: str) -> str:
        return name if not self.ns_prefix else self.ns_prefix + name

    # -- overload registration --------------------------------------------

    def register_callable(self, ent: Entity, owner: Optional[Entity] = None) -> Entity:
        """Register a function-like entity, growing an overload set when the
        name is already bound to another callable. Returns the entity that
        now answers to the qualified name (the set, once one exists)."""
        qname = ent.qualified_name
        if not self.engine.has_name(qname):
            created = self.engine.new_entity(
                register_name=True,
                **{k: v for k, v in vars(ent).items() if k != "id"},
            )
            return created

        existing = self.engine.lookup(qname)
        if existing.kind in (EntityKind.FUNCTION, EntityKind.FUNCTION_TEMPLATE, EntityKind.METHOD):
            oset = self.engine.new_entity(
                register_name=False,
                name=ent.name,
                qualified_name=qname,
                kind=EntityKind.OVERLOAD_SET,
                owner=existing.owner,
            )
            self.engine.rename(existing, f"{qname}#1")
            self.engine.bind_name(qname, oset.id)
            oset.children.append(existing.id)
            self._absorbed[existing.id] = oset.id
            if owner is not None and existing.id in owner.children:
                owner.children[owner.children.index(existing.id)] = oset.id
            existing = oset
        elif existing.kind is not EntityKind.OVERLOAD_SET:
            raise Redefinition(qname)

        self.check_duplicate_signature(existing, ent)
        ordinal = len(existing.children) + 1
        added = self.engine.new_entity(
            register_name=True,
            **{
                k: (f"{qname}#{ordinal}" if k == "qualified_name" else v)
                for k, v in vars(ent).items()
                if k != "id"
            },
        )
        existing.children.append(added.id)
        return existing

    def check_duplicate_signature(self, oset: Entity, ent: Entity) -> None:
        for cid in oset.children:
            child = self.engine.entity(cid)
            if child.kind != ent.kind:
                continue
            if child.signature.param_types() == ent.signature.param_types():
                raise Redefinition(ent.qualified_name)


def parse_translation_unit(engine: Engine, source: str) -> list[Entity]:
    """Parse declarations and register them into the engine's entity table."""
    return _DeclParser(engine, source).parse_unit()


# --- printing back to source ------------------------------------------------


def print_decl(engine: Engine, ent: Entity) -> str:
    """Render a parsed declaration; re-parsing yields an equal structure."""
    return _Printer(engine).decl(ent)


class _Printer:
    def __init__(self, engine: Engine):
        self.engine = engine

    def decl(self, ent: Entity) -> str:
        k = ent.kind
        if k is EntityKind.NAMESPACE:
            inner = "\n".join(self.decl(self.engine.entity(c)) for c in ent.children)
            return f"namespace {ent.name} {{\n{inner}\n}}"
        if k is EntityKind.OVERLOAD_SET:
            return "\n".join(self.decl(self.engine.entity(c)) for c in ent.children)
        if k is EntityKind.FUNCTION:
            return f"{self.type(ent.signature.return_type)} {ent.name}{self.sig(ent)} {self.body(ent.body)}"
        if k is EntityKind.FUNCTION_TEMPLATE:
            tp = ent.template_info.params[0]
            return (
                f"template<class {tp}> {self.type(ent.signature.return_type)} "
                f"{ent.name}{self.sig(ent)} {self.body(ent.body)}"
            )
        if k is EntityKind.CLASS:
            return f"struct {ent.name} {{ {self.members(ent)} }};"
        if k is EntityKind.CLASS_TEMPLATE:
            return self.class_template(ent)
        if k is EntityKind.METHOD:
            return f"{self.type(ent.signature.return_type)} {ent.name}{self.sig(ent)} {self.body(ent.body)}"
        if k is EntityKind.DATA_MEMBER:
            init = "" if ent.initializer is None else f" = {self.literal(ent.initializer)}"
            return f"{self.type(ent.decl_type)} {ent.name}{init};"
        raise ValueError(f"cannot print {ent.kind}")

    def class_template(self, ent: Entity) -> str:
        info = ent.template_info
        if info.spec_args is not None:
            header = ", ".join(
                f"class {p}" if p in {a.name for a in info.spec_args if isinstance(a, TemplateParamType)}
                else f"class... {p}"
                for p in info.params
            )
            args = ", ".join(render_type(a) for a in info.spec_args)
            body = f"{{ {self.members(ent)} }}" if ent.children else "{ }"
            return f"template<{header}> struct {ent.name}<{args}> {body};"
        if info.is_variadic:
            # specializations are separate top-level declarations and print
            # themselves when visited
            return f"template<class... {info.params[0]}> struct {ent.name};"
        return f"template<class {info.params[0]}> struct {ent.name} {{ {self.members(ent)} }};"

    def members(self, ent: Entity) -> str:
        return " ".join(self.decl(self.engine.entity(c)) for c in ent.children)

    def sig(self, ent: Entity) -> str:
        ps = ", ".join(f"{self.type(p.type)} {p.name}" for p in ent.signature.params)
        return f"({ps})"

    def body(self, body: FuncBody) -> str:
        lets = "".join(f"auto {l.name} = {self.expr(l.value)}; " for l in body.lets)
        return f"{{ {lets}return {self.expr(body.result)}; }}"

    def type(self, t: TypeRef) -> str:
        if isinstance(t, BuiltinType):
            return CPP_NAMES[t]
        if isinstance(t, InstantiationType):
            return f"{t.template_name}<{', '.join(self.type(a) for a in t.args)}>"
        return render_type(t)

    def literal(self, value) -> str:
        return repr(value)

    def expr(self, e) -> str:
        from . import nodes as N

        if isinstance(e, N.Lit):
            return self.literal(e.value) + (self.lit_suffix(e))
        if isinstance(e, N.NameRef):
            return e.name
        if isinstance(e, N.BinOp):
            return f"({self.expr(e.lhs)} {e.op} {self.expr(e.rhs)})"
        if isinstance(e, N.Cast):
            return f"{self.type(e.target)}({self.expr(e.value)})"
        if isinstance(e, N.Call):
            targs = (
                f"<{', '.join(self.type(t) for t in e.explicit_targs)}>"
                if e.explicit_targs is not None
                else ""
            )
            return f"{e.name}{targs}({', '.join(self.expr(a) for a in e.args)})"
        if isinstance(e, N.MemberRead):
            return f"{self.expr(e.obj)}.{e.member}"
        if isinstance(e, N.MethodCall):
            return f"{self.expr(e.obj)}.{e.method}({', '.join(self.expr(a) for a in e.args)})"
        raise ValueError(f"cannot print expression {e!r}")

    def lit_suffix(self, e) -> str:
        from .types import F64 as _f64, I32 as _i32

        # declaration-grammar literals default to int/double; anything else
        # would not round-trip without its suffix
        if e.type is _i32 or e.type is _f64:
            return ""
        return e.type.name
