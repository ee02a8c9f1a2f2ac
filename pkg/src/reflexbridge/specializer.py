"""The typing step: overload resolution, template-argument deduction,
memoized instantiation, and whole-kernel type inference.

Conversion ranking (worst argument wins, unique minimum takes the call):

    R0  exact match
    R1  integer widening   i32 -> i64
    R2  float widening     f32 -> f64
    R3  integer to float   i32/i64 -> f32/f64
    R4  bool to integer    bool -> i32/i64

Anything else (narrowing, float->int, bool->float, class mismatches) is
not viable. Ties are ambiguous, never broken silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import nodes as N
from .entities import Engine, Entity, EntityKind, Param, Signature
from .errors import (
    AmbiguousOverload,
    ArityMismatch,
    DeductionFailure,
    EngineError,
    KernelTypeError,
    NoViableOverload,
    SubstitutionFailure,
)
from .types import (
    ARITH_ORDER,
    BOOL,
    F32,
    F64,
    I32,
    I64,
    Array2DType,
    ClassType,
    InstantiationType,
    PackExpansionType,
    TemplateParamType,
    TypeRef,
    count_nodes,
    is_concrete,
    render_type,
)


def conversion_rank(src: TypeRef, dst: TypeRef):
    """Rank of converting src to dst implicitly, or None when not viable."""
    if src == dst:
        return 0
    if src is I32 and dst is I64:
        return 1
    if src is F32 and dst is F64:
        return 2
    if (src is I32 or src is I64) and (dst is F32 or dst is F64):
        return 3
    if src is BOOL and (dst is I32 or dst is I64):
        return 4
    return None


@dataclass(frozen=True)
class CallSignature:
    callable_id: int
    param_types: tuple[TypeRef, ...]
    return_type: TypeRef
    origin: int  # entity id of the overload set / template the call came from


# --- substitution ---------------------------------------------------------


def subst_type(t: TypeRef, binding: dict) -> TypeRef:
    if isinstance(t, TemplateParamType):
        try:
            return binding[t.name]
        except KeyError:
            raise SubstitutionFailure(f"unbound template parameter {t.name!r}")
    if isinstance(t, InstantiationType):
        args: list[TypeRef] = []
        for a in t.args:
            if isinstance(a, PackExpansionType):
                try:
                    args.extend(binding[a.name])
                except KeyError:
                    raise SubstitutionFailure(f"unbound parameter pack {a.name!r}")
            else:
                args.append(subst_type(a, binding))
        return InstantiationType(t.template_id, t.template_name, tuple(args))
    if isinstance(t, Array2DType):
        return Array2DType(subst_type(t.element, binding))
    if isinstance(t, PackExpansionType):
        raise SubstitutionFailure(f"pack {t.name!r} expanded outside template arguments")
    return t


def subst_expr(e: N.Expr, binding: dict) -> N.Expr:
    if isinstance(e, N.Lit):
        return N.Lit(e.node_id, e.span, e.value, e.type)
    if isinstance(e, N.NameRef):
        return N.NameRef(e.node_id, e.span, e.name)
    if isinstance(e, N.BinOp):
        return N.BinOp(e.node_id, e.span, e.op, subst_expr(e.lhs, binding), subst_expr(e.rhs, binding))
    if isinstance(e, N.Cast):
        return N.Cast(e.node_id, e.span, subst_type(e.target, binding), subst_expr(e.value, binding))
    if isinstance(e, N.Call):
        targs = (
            tuple(subst_type(t, binding) for t in e.explicit_targs)
            if e.explicit_targs is not None
            else None
        )
        return N.Call(e.node_id, e.span, e.name, [subst_expr(a, binding) for a in e.args], targs)
    if isinstance(e, N.MemberRead):
        return N.MemberRead(e.node_id, e.span, subst_expr(e.obj, binding), e.member)
    if isinstance(e, N.MethodCall):
        return N.MethodCall(
            e.node_id, e.span, subst_expr(e.obj, binding), e.method,
            [subst_expr(a, binding) for a in e.args],
        )
    if isinstance(e, N.Construct):
        return N.Construct(e.node_id, e.span, e.class_name)
    raise SubstitutionFailure(f"unsupported construct in template body: {type(e).__name__}")


def subst_body(body: N.FuncBody, binding: dict) -> N.FuncBody:
    return N.FuncBody(
        lets=[
            N.LetStmt(l.node_id, l.span, l.name, subst_expr(l.value, binding)) for l in body.lets
        ],
        result=subst_expr(body.result, binding),
    )


# --- deduction -------------------------------------------------------------


def deduce(tmpl: Entity, arg_types: list[TypeRef]) -> list[TypeRef]:
    """Deduce [T := ...] for a single-parameter template, exact match only."""
    info = tmpl.template_info
    params = tmpl.signature.params
    if len(arg_types) != len(params):
        raise DeductionFailure(f"{tmpl.name}: expected {len(params)} arguments, got {len(arg_types)}")
    tname = info.params[0]
    bound: TypeRef | None = None
    for p, a in zip(params, arg_types):
        if isinstance(p.type, TemplateParamType):
            if bound is None:
                bound = a
            elif bound != a:
                raise DeductionFailure(
                    f"{tmpl.name}: conflicting deductions {render_type(bound)} vs {render_type(a)}"
                )
        elif p.type != a:
            raise DeductionFailure(
                f"{tmpl.name}: parameter {p.name} requires {render_type(p.type)}"
            )
    if bound is None:
        raise DeductionFailure(f"{tmpl.name}: {tname} does not appear in any parameter")
    if not is_concrete(bound):
        raise DeductionFailure(f"{tmpl.name}: deduced {tname} is not concrete")
    return [bound]


# --- instantiation ----------------------------------------------------------


def instantiate(engine: Engine, tmpl: Entity, targs: list[TypeRef]) -> Entity:
    """Materialize tmpl<targs...>, memoized on the canonical argument tuple.

    Nested instantiations referenced by the arguments are materialized
    first (innermost to outermost); instantiations referenced by member
    types are materialized after this one is registered, which is what
    makes the recursive pack pattern unroll in decreasing arity.
    """
    key = (tmpl.id, tuple(targs))
    cached = engine.instantiation_cache.get(key)
    if cached is not None:
        engine.stats_data.cache_hits += 1
        return engine.entity(cached)

    for t in targs:
        if not is_concrete(t):
            raise SubstitutionFailure(f"template argument {render_type(t)} is not concrete")
    # arguments that are themselves instantiations come first
    for t in targs:
        _ensure_type_instantiated(engine, t)
    # the argument walk may have materialized this very instantiation
    cached = engine.instantiation_cache.get(key)
    if cached is not None:
        engine.stats_data.cache_hits += 1
        return engine.entity(cached)

    if tmpl.kind is EntityKind.FUNCTION_TEMPLATE:
        return _instantiate_function(engine, tmpl, tuple(targs))
    if tmpl.kind is EntityKind.CLASS_TEMPLATE:
        return _instantiate_class(engine, tmpl, tuple(targs))
    raise ArityMismatch(f"{tmpl.qualified_name} is not a template")


def _ensure_type_instantiated(engine: Engine, t: TypeRef) -> None:
    if isinstance(t, InstantiationType):
        instantiate(engine, engine.entity(t.template_id), list(t.args))
    elif isinstance(t, Array2DType):
        _ensure_type_instantiated(engine, t.element)


def _record(engine: Engine, tmpl: Entity, ent: Entity, node_cost: int) -> None:
    st = engine.stats_data
    st.total_instantiations += 1
    st.per_template[tmpl.id] = st.per_template.get(tmpl.id, 0) + 1
    st.node_count += node_cost
    st.order_log.append(ent.qualified_name)


def _instantiate_function(engine: Engine, tmpl: Entity, targs: tuple[TypeRef, ...]) -> Entity:
    if len(targs) != len(tmpl.template_info.params):
        raise ArityMismatch(f"{tmpl.qualified_name} takes {len(tmpl.template_info.params)} arguments")
    binding = dict(zip(tmpl.template_info.params, targs))
    sig = Signature(
        [Param(p.name, subst_type(p.type, binding)) for p in tmpl.signature.params],
        subst_type(tmpl.signature.return_type, binding),
    )
    body = subst_body(tmpl.body, binding)
    # overload-set members carry an internal #n suffix; instantiations keep
    # the user-facing spelling
    base = tmpl.qualified_name.split("#")[0]
    qname = f"{base}<{', '.join(render_type(t) for t in targs)}>"
    ent = engine.new_entity(
        name=qname,
        qualified_name=qname,
        kind=EntityKind.INSTANTIATION,
        signature=sig,
        body=body,
        origin_template=tmpl.id,
        type_args=targs,
    )
    engine.instantiation_cache[(tmpl.id, targs)] = ent.id
    cost = 1 + sum(count_nodes(p.type) for p in sig.params) + count_nodes(sig.return_type)
    cost += N.count_body_nodes(body)
    _record(engine, tmpl, ent, cost)
    # validate the substituted body now; errors surface as SubstitutionFailure
    try:
        infer_body_types(engine, ent)
    except EngineError as exc:
        if isinstance(exc, SubstitutionFailure):
            raise
        raise SubstitutionFailure(f"{qname}: {exc}") from exc
    return ent


def _select_class_body(tmpl: Entity, targs: tuple[TypeRef, ...], engine: Engine):
    """Return (members, binding) for the matching primary or specialization."""
    info = tmpl.template_info
    if not info.is_variadic:
        if len(targs) != len(info.params):
            raise ArityMismatch(f"{tmpl.qualified_name} takes {len(info.params)} arguments")
        return tmpl.children, {info.params[0]: targs[0]}
    empty = recursive = None
    for sid in info.specializations:
        spec = engine.entity(sid)
        if spec.template_info.spec_args == ():
            empty = spec
        else:
            recursive = spec
    if not targs:
        if empty is None:
            raise SubstitutionFailure(f"{tmpl.qualified_name}: no empty-pack specialization")
        return empty.children, {}
    if recursive is None:
        raise SubstitutionFailure(f"{tmpl.qualified_name}: no recursive specialization")
    head, pack = recursive.template_info.spec_args
    return recursive.children, {head.name: targs[0], pack.name: tuple(targs[1:])}


def _instantiate_class(engine: Engine, tmpl: Entity, targs: tuple[TypeRef, ...]) -> Entity:
    member_ids, binding = _select_class_body(tmpl, targs, engine)
    qname = f"{tmpl.qualified_name}<{', '.join(render_type(t) for t in targs)}>"
    ent = engine.new_entity(
        name=qname,
        qualified_name=qname,
        kind=EntityKind.INSTANTIATION,
        origin_template=tmpl.id,
        type_args=targs,
    )
    engine.instantiation_cache[(tmpl.id, targs)] = ent.id
    cost = 1
    member_types: list[TypeRef] = []
    for mid in member_ids:
        pattern = engine.entity(mid)
        mtype = subst_type(pattern.decl_type, binding)
        member = engine.new_entity(
            name=pattern.name,
            qualified_name=f"{qname}::{pattern.name}",
            kind=EntityKind.DATA_MEMBER,
            decl_type=mtype,
            initializer=pattern.initializer,
            owner=ent.id,
        )
        ent.children.append(member.id)
        member_types.append(mtype)
        cost += 1 + count_nodes(mtype)
    _record(engine, tmpl, ent, cost)
    # member types may reference further instantiations (the pack recursion)
    for mt in member_types:
        _ensure_type_instantiated(engine, mt)
    return ent


# --- overload resolution ------------------------------------------------------


def _candidates(engine: Engine, target: Entity) -> list[Entity]:
    if target.kind is EntityKind.OVERLOAD_SET:
        return [engine.entity(c) for c in target.children]
    return [target]


def _rank_args(arg_types, param_types):
    if len(arg_types) != len(param_types):
        return None
    worst = 0
    for a, p in zip(arg_types, param_types):
        r = conversion_rank(a, p)
        if r is None:
            return None
        worst = max(worst, r)
    return worst


def resolve_overload(
    engine: Engine,
    target: Entity,
    arg_types: list[TypeRef],
    explicit_targs: tuple[TypeRef, ...] | None = None,
) -> CallSignature:
    """Select the unique best candidate for the argument types.

    Function templates participate after deduction (or with the explicit
    arguments, which bypass deduction); the winning template is
    instantiated through the memoized cache. Only the winner is ever
    materialized.
    """
    arg_types = list(arg_types)
    viable = []  # (rank, candidate, targs or None, param_types, return_type)
    for cand in _candidates(engine, target):
        if cand.kind is EntityKind.FUNCTION_TEMPLATE:
            if explicit_targs is not None:
                if len(explicit_targs) != len(cand.template_info.params):
                    continue
                binding = dict(zip(cand.template_info.params, explicit_targs))
                targs = list(explicit_targs)
            else:
                try:
                    targs = deduce(cand, arg_types)
                except DeductionFailure:
                    continue
                binding = dict(zip(cand.template_info.params, targs))
            try:
                ptypes = tuple(subst_type(p.type, binding) for p in cand.signature.params)
                rtype = subst_type(cand.signature.return_type, binding)
            except SubstitutionFailure:
                continue
            rank = _rank_args(arg_types, ptypes)
            if rank is not None:
                viable.append((rank, cand, targs, ptypes, rtype))
        elif cand.signature is not None:
            if explicit_targs is not None:
                continue  # explicit template arguments only match templates
            ptypes = cand.signature.param_types()
            rank = _rank_args(arg_types, ptypes)
            if rank is not None:
                viable.append((rank, cand, None, ptypes, cand.signature.return_type))

    if not viable:
        raise NoViableOverload(target.name, arg_types)
    best = min(v[0] for v in viable)
    winners = [v for v in viable if v[0] == best]
    if len(winners) > 1:
        raise AmbiguousOverload(target.name, [w[1].qualified_name for w in winners])
    _, cand, targs, ptypes, rtype = winners[0]
    if targs is not None:
        inst = instantiate(engine, cand, targs)
        return CallSignature(inst.id, inst.signature.param_types(), inst.signature.return_type, target.id)
    return CallSignature(cand.id, ptypes, rtype, target.id)


# --- type inference ------------------------------------------------------------


@dataclass
class BodyTypes:
    node_types: dict[int, TypeRef] = field(default_factory=dict)
    call_bindings: dict[int, CallSignature] = field(default_factory=dict)
    let_types: dict[str, TypeRef] = field(default_factory=dict)
    result_type: TypeRef = None  # type: ignore[assignment]


@dataclass
class TypedKernel:
    kernel: N.KernelDef
    param_types: tuple[TypeRef, ...]
    node_types: dict[int, TypeRef]
    call_bindings: dict[int, CallSignature]
    var_types: dict[str, TypeRef]


class _Inference:
    """Forward type inference over expressions, shared by kernels and
    bound-function bodies."""

    def __init__(self, engine: Engine, env: dict[str, TypeRef], owner: Entity | None = None):
        self.engine = engine
        self.env = env
        self.owner = owner  # class entity when typing a method body
        self.node_types: dict[int, TypeRef] = {}
        self.call_bindings: dict[int, CallSignature] = {}

    def infer(self, e: N.Expr) -> TypeRef:
        t = self._infer(e)
        self.node_types[e.node_id] = t
        return t

    def _infer(self, e: N.Expr) -> TypeRef:
        if isinstance(e, N.Lit):
            return e.type
        if isinstance(e, N.NameRef):
            t = self.env.get(e.name)
            if t is not None:
                return t
            if self.owner is not None:
                member = self.engine.find_member(self.owner, e.name)
                if member is not None and member.kind is EntityKind.DATA_MEMBER:
                    return member.decl_type
            raise KernelTypeError(f"unknown name {e.name!r}", e.span)
        if isinstance(e, N.DimRead):
            if not isinstance(self.env.get(e.arr), Array2DType):
                raise KernelTypeError(f"{e.arr!r} is not an array", e.span)
            return I64
        if isinstance(e, N.Index2D):
            at = self.infer(e.arr)
            if not isinstance(at, Array2DType):
                raise KernelTypeError("only 2-D arrays can be indexed", e.span)
            for idx in (e.i, e.j):
                it = self.infer(idx)
                if it not in (I32, I64):
                    raise KernelTypeError("array indices must be integers", idx.span)
            return at.element
        if isinstance(e, N.BinOp):
            lt = self.infer(e.lhs)
            rt = self.infer(e.rhs)
            if lt not in ARITH_ORDER or rt not in ARITH_ORDER:
                raise KernelTypeError(
                    f"arithmetic requires numeric operands, got {render_type(lt)} and {render_type(rt)}",
                    e.span,
                )
            return lt if ARITH_ORDER[lt] >= ARITH_ORDER[rt] else rt
        if isinstance(e, N.Cast):
            vt = self.infer(e.value)
            if vt not in ARITH_ORDER and vt is not BOOL:
                raise KernelTypeError(f"cannot cast {render_type(vt)}", e.span)
            if e.target not in ARITH_ORDER:
                raise KernelTypeError(f"cannot cast to {render_type(e.target)}", e.span)
            return e.target
        if isinstance(e, N.Call):
            return self._infer_call(e)
        if isinstance(e, N.Construct):
            return self._construct_type(e, e.class_name, None, [])
        if isinstance(e, N.MemberRead):
            ot = self.infer(e.obj)
            member = self._find_member(ot, e.member, e.span, data=True)
            return member.decl_type
        if isinstance(e, N.MethodCall):
            ot = self.infer(e.obj)
            method = self._find_member(ot, e.method, e.span, data=False)
            arg_types = [self.infer(a) for a in e.args]
            sig = resolve_overload(self.engine, method, arg_types)
            self.call_bindings[e.node_id] = sig
            return sig.return_type
        raise KernelTypeError(f"untypable expression {type(e).__name__}", e.span)

    def _infer_call(self, e: N.Call) -> TypeRef:
        try:
            ent = self.engine.lookup(e.name)
        except EngineError as exc:
            raise KernelTypeError(str(exc), e.span, causes=[exc])
        if ent.kind in (EntityKind.CLASS, EntityKind.CLASS_TEMPLATE, EntityKind.INSTANTIATION) and not ent.is_callable():
            return self._construct_type(e, e.name, e.explicit_targs, e.args)
        if not ent.is_callable():
            raise KernelTypeError(f"{e.name!r} is not callable", e.span)
        arg_types = [self.infer(a) for a in e.args]
        try:
            sig = resolve_overload(self.engine, ent, arg_types, e.explicit_targs)
        except EngineError as exc:
            raise KernelTypeError(str(exc), e.span, causes=[exc])
        self.call_bindings[e.node_id] = sig
        return sig.return_type

    def _construct_type(self, e, name: str, targs, args) -> TypeRef:
        if args:
            raise KernelTypeError("constructors take no arguments", e.span)
        try:
            ent = self.engine.lookup(name)
        except EngineError as exc:
            raise KernelTypeError(str(exc), e.span, causes=[exc])
        if ent.kind is EntityKind.CLASS_TEMPLATE:
            if targs is None:
                raise KernelTypeError(f"{name!r} needs template arguments", e.span)
            try:
                instantiate(self.engine, ent, list(targs))
            except EngineError as exc:
                raise KernelTypeError(str(exc), e.span, causes=[exc])
            return InstantiationType(ent.id, ent.qualified_name, tuple(targs))
        if ent.kind is EntityKind.CLASS:
            return ClassType(ent.id, ent.qualified_name)
        if ent.kind is EntityKind.INSTANTIATION and ent.signature is None:
            return InstantiationType(
                ent.origin_template,
                self.engine.entity(ent.origin_template).qualified_name,
                ent.type_args,
            )
        raise KernelTypeError(f"{name!r} is not a class", e.span)

    def _find_member(self, t: TypeRef, name: str, span, data: bool) -> Entity:
        if isinstance(t, ClassType):
            cls = self.engine.entity(t.entity_id)
        elif isinstance(t, InstantiationType):
            inst = instantiate(self.engine, self.engine.entity(t.template_id), list(t.args))
            cls = inst
        else:
            raise KernelTypeError(f"{render_type(t)} has no members", span)
        member = self.engine.find_member(cls, name)
        if member is None:
            raise KernelTypeError(f"{cls.qualified_name} has no member {name!r}", span)
        if data and member.kind is not EntityKind.DATA_MEMBER:
            raise KernelTypeError(f"{name!r} is not a data member", span)
        if not data and not member.is_callable():
            raise KernelTypeError(f"{name!r} is not a method", span)
        return member


def infer_body_types(engine: Engine, callee: Entity) -> BodyTypes:
    """Type a bound function/method body; the environment is its parameters
    plus, for methods, the owner's data members."""
    env = {p.name: p.type for p in callee.signature.params}
    owner = engine.entity(callee.owner) if callee.owner is not None else None
    inf = _Inference(engine, env, owner=owner)
    out = BodyTypes()
    for let in callee.body.lets:
        t = inf.infer(let.value)
        env[let.name] = t
        out.let_types[let.name] = t
    out.result_type = inf.infer(callee.body.result)
    ret = callee.signature.return_type
    if conversion_rank(out.result_type, ret) is None:
        raise KernelTypeError(
            f"{callee.qualified_name}: body yields {render_type(out.result_type)}, "
            f"declared {render_type(ret)}"
        )
    out.node_types = inf.node_types
    out.call_bindings = inf.call_bindings
    return out


def type_kernel(engine: Engine, kernel: N.KernelDef, param_types: list[TypeRef]) -> TypedKernel:
    """Infer a type for every expression and bind every call site exactly
    once. Executes no user code."""
    declared = [t for _, t in kernel.params]
    if list(param_types) != declared:
        raise KernelTypeError(
            f"kernel {kernel.name!r} declares ({', '.join(render_type(t) for t in declared)}), "
            f"got ({', '.join(render_type(t) for t in param_types)})"
        )
    env = {name: t for name, t in kernel.params}
    inf = _Inference(engine, env)
    var_types = dict(env)
    errors: list[EngineError] = []

    def check_stmts(stmts):
        for s in stmts:
            try:
                check_stmt(s)
            except KernelTypeError as exc:
                errors.append(exc)

    def check_stmt(s):
        if isinstance(s, N.LetStmt):
            t = inf.infer(s.value)
            env[s.name] = t
            var_types[s.name] = t
        elif isinstance(s, N.ForRange):
            bt = inf.infer(s.bound)
            if bt not in (I32, I64):
                raise KernelTypeError("loop bound must be an integer", s.span)
            env[s.var] = I64
            var_types[s.var] = I64
            check_stmts(s.body)
            del env[s.var]
        elif isinstance(s, N.CompoundAssign):
            vt = env.get(s.name)
            if vt is None:
                raise KernelTypeError(f"unknown variable {s.name!r}", s.span)
            et = inf.infer(s.value)
            if vt not in ARITH_ORDER or et not in ARITH_ORDER:
                raise KernelTypeError("compound assignment requires numeric operands", s.span)
            wider = vt if ARITH_ORDER[vt] >= ARITH_ORDER[et] else et
            if conversion_rank(wider, vt) is None:
                from .errors import TagMismatch

                cause = TagMismatch(render_type(vt), render_type(wider))
                raise KernelTypeError(
                    f"{s.name} is {render_type(vt)}; {s.op}= would narrow {render_type(wider)}",
                    s.span,
                    causes=[cause],
                )
        elif isinstance(s, N.ReturnStmt):
            rt = inf.infer(s.value)
            if conversion_rank(rt, kernel.return_type) is None:
                from .errors import TagMismatch

                cause = TagMismatch(render_type(kernel.return_type), render_type(rt))
                raise KernelTypeError(
                    f"cannot return {render_type(rt)} from a {render_type(kernel.return_type)} kernel",
                    s.span,
                    causes=[cause],
                )

    check_stmts(kernel.body)
    if errors:
        msg = "; ".join(str(e) for e in errors)
        causes = [c for e in errors for c in (e.causes or [e])]
        raise KernelTypeError(msg, errors[0].span, causes=causes)
    return TypedKernel(kernel, tuple(param_types), inf.node_types, inf.call_bindings, var_types)


def stats(engine: Engine, reset: bool = False):
    """Snapshot of the instantiation statistics; optionally reset them."""
    snap = engine.stats_data.copy()
    if reset:
        from .entities import InstantiationStats

        engine.stats_data = InstantiationStats()
    return snap
