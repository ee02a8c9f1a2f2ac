"""The slow path: per-call dynamic dispatch and a boxed tree-walking
kernel interpreter.

Every kernel-level intermediate is a fresh BoxedValue; every bound call
re-resolves its overload (or re-deduces its template) — the shared
instantiation cache means only the lookup cost repeats. Bound-function
bodies themselves evaluate natively, as compiled code would: the modeled
overhead is dispatch and boxing, not the callee's arithmetic.
"""

from __future__ import annotations

from typing import Optional

from . import nodes as N
from .boxed import Array2D, BoxedValue, DynInstance, default_instance, unbox
from .entities import Engine, Entity, EntityKind
from .errors import EvalError, TagMismatch
from .numerics import binop, convert
from .specializer import resolve_overload
from .types import (
    ARITH_ORDER,
    F64,
    I64,
    Array2DType,
    ClassType,
    InstantiationType,
    TypeRef,
    render_type,
)


def dyn_call(
    engine: Engine,
    target: Entity,
    args: list[BoxedValue],
    explicit_targs: Optional[tuple[TypeRef, ...]] = None,
    receiver: Optional[DynInstance] = None,
) -> BoxedValue:
    """Resolve and invoke a bound callable with boxed arguments.

    Resolution happens on every invocation — there is deliberately no
    call-site caching on this path.
    """
    c = engine.counters
    arg_types = [b.tag for b in args]
    sig = resolve_overload(engine, target, arg_types, explicit_targs)
    c.resolutions += 1
    callee = engine.entity(sig.callable_id)
    native = [unbox(b, pt) for b, pt in zip(args, sig.param_types)]
    c.boxings += len(args)
    value, vtype = _eval_body(engine, callee, native, receiver)
    ret = sig.return_type
    if vtype != ret:
        value = convert(value, vtype, ret)
    c.invocations += 1
    c.boxings += 1
    return BoxedValue(ret, value)


def _eval_body(engine: Engine, callee: Entity, native_args: list, receiver):
    """Tree-walk a bound function body over (value, type) pairs."""
    env = {
        p.name: (v, p.type) for p, v in zip(callee.signature.params, native_args)
    }
    for let in callee.body.lets:
        env[let.name] = _eval_native(engine, let.value, env, receiver)
    return _eval_native(engine, callee.body.result, env, receiver)


def _eval_native(engine: Engine, e: N.Expr, env: dict, receiver):
    c = engine.counters
    if isinstance(e, N.Lit):
        return (e.value, e.type)
    if isinstance(e, N.NameRef):
        hit = env.get(e.name)
        if hit is not None:
            return hit
        if receiver is not None:
            slot = receiver.slots.get(e.name)
            if slot is not None:
                c.boxings += 1
                return (slot.payload, slot.tag)
        raise EvalError(f"unknown name {e.name!r} in bound body")
    if isinstance(e, N.BinOp):
        lv, lt = _eval_native(engine, e.lhs, env, receiver)
        rv, rt = _eval_native(engine, e.rhs, env, receiver)
        if lt not in ARITH_ORDER or rt not in ARITH_ORDER:
            raise EvalError("arithmetic on non-numeric operands")
        wider = lt if ARITH_ORDER[lt] >= ARITH_ORDER[rt] else rt
        if lt is not wider:
            lv = convert(lv, lt, wider)
        if rt is not wider:
            rv = convert(rv, rt, wider)
        return (binop(e.op, wider, lv, rv), wider)
    if isinstance(e, N.Cast):
        v, t = _eval_native(engine, e.value, env, receiver)
        return (convert(v, t, e.target), e.target)
    if isinstance(e, N.Call):
        ent = engine.lookup(e.name)
        if not ent.is_callable():
            return _construct_pair(engine, ent, e)
        boxed = []
        for a in e.args:
            v, t = _eval_native(engine, a, env, receiver)
            boxed.append(BoxedValue(t, v))
        c.boxings += len(boxed)
        reply = dyn_call(engine, ent, boxed, e.explicit_targs)
        c.boxings += 1
        return (reply.payload, reply.tag)
    if isinstance(e, N.MemberRead):
        ov, ot = _eval_native(engine, e.obj, env, receiver)
        slot = _slot_of(ov, ot, e.member)
        c.boxings += 1
        return (slot.payload, slot.tag)
    if isinstance(e, N.MethodCall):
        ov, ot = _eval_native(engine, e.obj, env, receiver)
        method = _method_of(engine, ov, ot, e.method)
        boxed = []
        for a in e.args:
            v, t = _eval_native(engine, a, env, receiver)
            boxed.append(BoxedValue(t, v))
        c.boxings += len(boxed)
        reply = dyn_call(engine, method, boxed, receiver=ov)
        c.boxings += 1
        return (reply.payload, reply.tag)
    raise EvalError(f"unsupported construct in bound body: {type(e).__name__}")


def _construct_pair(engine, ent, e):
    if e.args:
        raise EvalError("constructors take no arguments")
    return _construct(engine, ent, e.explicit_targs)


def _construct(engine, ent, targs):
    from .specializer import instantiate

    if ent.kind is EntityKind.CLASS_TEMPLATE:
        if targs is None:
            raise EvalError(f"{ent.qualified_name!r} needs template arguments")
        inst_ent = instantiate(engine, ent, list(targs))
        t = InstantiationType(ent.id, ent.qualified_name, tuple(targs))
        return (default_instance(engine, inst_ent), t)
    if ent.kind is EntityKind.CLASS:
        return (default_instance(engine, ent), ClassType(ent.id, ent.qualified_name))
    if ent.kind is EntityKind.INSTANTIATION and ent.signature is None:
        t = InstantiationType(
            ent.origin_template, engine.entity(ent.origin_template).qualified_name, ent.type_args
        )
        return (default_instance(engine, ent), t)
    raise EvalError(f"{ent.qualified_name!r} is not constructible")


def _slot_of(value, t, name: str):
    if not isinstance(value, DynInstance):
        raise EvalError(f"{render_type(t)} has no members")
    slot = value.slots.get(name)
    if slot is None:
        raise EvalError(f"no data member {name!r}")
    return slot


def _method_of(engine, value, t, name: str) -> Entity:
    if not isinstance(value, DynInstance):
        raise EvalError(f"{render_type(t)} has no methods")
    cls = engine.entity(value.class_id)
    method = engine.find_member(cls, name)
    if method is None or not method.is_callable():
        raise EvalError(f"{cls.qualified_name} has no method {name!r}")
    return method


# --- the boxed kernel interpreter -------------------------------------------


def run_kernel_dynamic(engine: Engine, kernel: N.KernelDef, args: list[BoxedValue]) -> BoxedValue:
    """Interpret a kernel with every intermediate boxed and every bound
    call dispatched through dyn_call."""
    if len(args) != len(kernel.params):
        raise TagMismatch(f"{len(kernel.params)} arguments", f"{len(args)}")
    c = engine.counters
    env: dict[str, BoxedValue] = {}
    for (name, ptype), b in zip(kernel.params, args):
        if isinstance(ptype, (Array2DType, ClassType, InstantiationType)):
            if b.tag != ptype:
                raise TagMismatch(render_type(ptype), render_type(b.tag))
            env[name] = b
        else:
            env[name] = BoxedValue(ptype, unbox(b, ptype))
            c.boxings += 2

    result = _exec_stmts(engine, kernel.body, env)
    if result is None:
        raise EvalError("kernel finished without returning")
    c.boxings += 1
    return BoxedValue(kernel.return_type, unbox(result, kernel.return_type))


def _exec_stmts(engine, stmts, env) -> Optional[BoxedValue]:
    c = engine.counters
    for s in stmts:
        if isinstance(s, N.CompoundAssign):
            cur = env[s.name]
            val = _eval_boxed(engine, s.value, env)
            res = _boxed_binop(engine, s.op, cur, val)
            if res.tag != cur.tag:
                res = BoxedValue(cur.tag, unbox(res, cur.tag))
                c.boxings += 1
            env[s.name] = res
        elif isinstance(s, N.ForRange):
            bound = _eval_boxed(engine, s.bound, env)
            n = unbox(bound, I64)
            c.boxings += 1
            var = s.var
            for k in range(n):
                env[var] = BoxedValue(I64, k)
                c.boxings += 1
                _exec_stmts(engine, s.body, env)
        elif isinstance(s, N.LetStmt):
            env[s.name] = _eval_boxed(engine, s.value, env)
        elif isinstance(s, N.ReturnStmt):
            return _eval_boxed(engine, s.value, env)
    return None


def _eval_boxed(engine, e: N.Expr, env) -> BoxedValue:
    c = engine.counters
    if isinstance(e, N.Lit):
        c.boxings += 1
        return BoxedValue(e.type, e.value)
    if isinstance(e, N.NameRef):
        return env[e.name]
    if isinstance(e, N.BinOp):
        lhs = _eval_boxed(engine, e.lhs, env)
        rhs = _eval_boxed(engine, e.rhs, env)
        return _boxed_binop(engine, e.op, lhs, rhs)
    if isinstance(e, N.Index2D):
        arr = _eval_boxed(engine, e.arr, env)
        if not isinstance(arr.payload, Array2D):
            raise EvalError("only arrays can be indexed")
        i = unbox(_eval_boxed(engine, e.i, env), I64)
        j = unbox(_eval_boxed(engine, e.j, env), I64)
        c.boxings += 3
        return BoxedValue(F64, arr.payload.get(i, j))
    if isinstance(e, N.DimRead):
        arr = env[e.arr]
        if not isinstance(arr.payload, Array2D):
            raise EvalError(f"{e.arr!r} is not an array")
        c.boxings += 1
        return BoxedValue(I64, arr.payload.rows if e.axis == 0 else arr.payload.cols)
    if isinstance(e, N.Cast):
        v = _eval_boxed(engine, e.value, env)
        c.boxings += 1
        return BoxedValue(e.target, convert(v.payload, v.tag, e.target))
    if isinstance(e, N.Call):
        ent = engine.lookup(e.name)
        if not ent.is_callable():
            if e.args:
                raise EvalError("constructors take no arguments")
            value, t = _construct(engine, ent, e.explicit_targs)
            c.boxings += 1
            return BoxedValue(t, value)
        args = [_eval_boxed(engine, a, env) for a in e.args]
        return dyn_call(engine, ent, args, e.explicit_targs)
    if isinstance(e, N.Construct):
        ent = engine.lookup(e.class_name)
        value, t = _construct(engine, ent, None)
        c.boxings += 1
        return BoxedValue(t, value)
    if isinstance(e, N.MemberRead):
        obj = _eval_boxed(engine, e.obj, env)
        return _slot_of(obj.payload, obj.tag, e.member)
    if isinstance(e, N.MethodCall):
        obj = _eval_boxed(engine, e.obj, env)
        method = _method_of(engine, obj.payload, obj.tag, e.method)
        args = [_eval_boxed(engine, a, env) for a in e.args]
        return dyn_call(engine, method, args, receiver=obj.payload)
    raise EvalError(f"unsupported expression {type(e).__name__}")


def _boxed_binop(engine, op: str, a: BoxedValue, b: BoxedValue) -> BoxedValue:
    if a.tag not in ARITH_ORDER or b.tag not in ARITH_ORDER:
        raise TagMismatch("numeric operands", f"{render_type(a.tag)}, {render_type(b.tag)}")
    wider = a.tag if ARITH_ORDER[a.tag] >= ARITH_ORDER[b.tag] else b.tag
    av = a.payload if a.tag is wider else convert(a.payload, a.tag, wider)
    bv = b.payload if b.tag is wider else convert(b.payload, b.tag, wider)
    engine.counters.boxings += 1
    return BoxedValue(wider, binop(op, wider, av, bv))
