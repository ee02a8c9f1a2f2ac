"""The lowering step: translate a TypedKernel into register-based typed IR
and execute it unboxed.

Call sites become CallDirect instructions carrying the resolved callable
id; callee bodies are compiled once into straight-line closures keyed by
that id. The executor is a register-machine loop over pre-decoded
instruction tuples — boxing does not exist in this instruction set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from . import nodes as N
from .entities import Engine, Entity, EntityKind
from .errors import EvalError, IndexOutOfBounds, LoweringError, VerifyError
from .numerics import binop_fn, convert_fn, zero_of
from .specializer import (
    BodyTypes,
    TypedKernel,
    conversion_rank,
    infer_body_types,
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
    TypeRef,
    render_type,
)


# --- instruction set --------------------------------------------------------


@dataclass
class Instr:
    pass


@dataclass
class LoadConst(Instr):
    dst: int
    type: TypeRef
    value: object


@dataclass
class LoadParam(Instr):
    dst: int
    index: int


@dataclass
class ArrayDim(Instr):
    dst: int
    arr: int
    axis: int


@dataclass
class LoadIndex(Instr):
    dst: int
    arr: int
    i: int
    j: int


@dataclass
class BinInstr(Instr):
    op: str
    dst: int
    lhs: int
    rhs: int


@dataclass
class CmpLt(Instr):
    dst: int
    lhs: int
    rhs: int


@dataclass
class ConvertInstr(Instr):
    dst: int
    src: int
    to_type: TypeRef


@dataclass
class CallDirect(Instr):
    callable_id: int
    dst: int
    args: tuple[int, ...]


@dataclass
class MemberReadInstr(Instr):
    dst: int
    inst: int
    slot: str


@dataclass
class MethodCallInstr(Instr):
    callable_id: int
    dst: int
    inst: int
    args: tuple[int, ...]


@dataclass
class ConstructInstr(Instr):
    dst: int
    class_id: int


@dataclass
class Jump(Instr):
    label: str


@dataclass
class BranchFalse(Instr):
    cond: int
    label: str


@dataclass
class Return(Instr):
    src: int


@dataclass
class TypedIR:
    name: str
    params: tuple[TypeRef, ...]
    return_type: TypeRef
    registers: list[TypeRef]
    instructions: list[Instr]
    labels: dict[str, int]
    verified: bool = False
    _decoded: Optional[list] = field(default=None, repr=False)


# --- lowering ----------------------------------------------------------------


def lower(engine: Engine, tk: TypedKernel) -> TypedIR:
    """Produce verifier-clean IR from a well-typed kernel.

    Callee bodies are compiled to closures here (never executed); by the
    time the IR exists, every callable id it references is ready in the
    engine's closure cache.
    """
    lo = _Lowerer(engine, tk)
    ir = lo.run()
    verify(engine, ir)
    for ins in ir.instructions:
        if isinstance(ins, (CallDirect, MethodCallInstr)):
            compiled_callable(engine, ins.callable_id)
    return ir


class _Lowerer:
    def __init__(self, engine: Engine, tk: TypedKernel):
        self.engine = engine
        self.tk = tk
        self.regs: list[TypeRef] = []
        self.ins: list[Instr] = []
        self.labels: dict[str, int] = {}
        self.var_reg: dict[str, int] = {}
        self._label_n = 0

    def run(self) -> TypedIR:
        k = self.tk.kernel
        for idx, (name, t) in enumerate(k.params):
            r = self.fresh(t)
            self.ins.append(LoadParam(r, idx))
            self.var_reg[name] = r
        for s in k.body:
            self.stmt(s)
        if not isinstance(self.ins[-1], Return):
            raise LoweringError("kernel did not end in a return")
        return TypedIR(
            name=k.name,
            params=tuple(t for _, t in k.params),
            return_type=k.return_type,
            registers=self.regs,
            instructions=self.ins,
            labels=self.labels,
        )

    def fresh(self, t: TypeRef) -> int:
        self.regs.append(t)
        return len(self.regs) - 1

    def new_label(self) -> str:
        name = f"L{self._label_n}"
        self._label_n += 1
        return name

    def place(self, label: str) -> None:
        self.labels[label] = len(self.ins)

    def node_type(self, e: N.Expr) -> TypeRef:
        try:
            return self.tk.node_types[e.node_id]
        except KeyError:
            raise LoweringError(f"untyped node {type(e).__name__} at {e.span}")

    def to_type(self, reg: int, want: TypeRef) -> int:
        have = self.regs[reg]
        if have == want:
            return reg
        if conversion_rank(have, want) is None:
            raise LoweringError(f"illegal implicit conversion {render_type(have)} -> {render_type(want)}")
        r = self.fresh(want)
        self.ins.append(ConvertInstr(r, reg, want))
        return r

    # -- statements --

    def stmt(self, s: N.Stmt) -> None:
        if isinstance(s, N.LetStmt):
            r = self.expr(s.value)
            if isinstance(s.value, N.NameRef):
                # aliasing a mutable register would leak later writes
                copy = self.fresh(self.regs[r])
                self.ins.append(ConvertInstr(copy, r, self.regs[r]))
                r = copy
            self.var_reg[s.name] = r
        elif isinstance(s, N.ForRange):
            bound = self.to_type(self.expr(s.bound), I64)
            one = self.fresh(I64)
            self.ins.append(LoadConst(one, I64, 1))
            ivar = self.fresh(I64)
            self.ins.append(LoadConst(ivar, I64, 0))
            self.var_reg[s.var] = ivar
            head, done = self.new_label(), self.new_label()
            self.place(head)
            cond = self.fresh(BOOL)
            self.ins.append(CmpLt(cond, ivar, bound))
            self.ins.append(BranchFalse(cond, done))
            for inner in s.body:
                self.stmt(inner)
            self.ins.append(BinInstr("+", ivar, ivar, one))
            self.ins.append(Jump(head))
            self.place(done)
            del self.var_reg[s.var]
        elif isinstance(s, N.CompoundAssign):
            vreg = self.var_reg[s.name]
            vt = self.regs[vreg]
            r = self.to_type(self.expr(s.value), vt)
            self.ins.append(BinInstr(s.op, vreg, vreg, r))
        elif isinstance(s, N.ReturnStmt):
            r = self.to_type(self.expr(s.value), self.tk.kernel.return_type)
            self.ins.append(Return(r))
        else:
            raise LoweringError(f"unsupported statement {type(s).__name__}")

    # -- expressions --

    def expr(self, e: N.Expr) -> int:
        if isinstance(e, N.Lit):
            r = self.fresh(e.type)
            self.ins.append(LoadConst(r, e.type, e.value))
            return r
        if isinstance(e, N.NameRef):
            return self.var_reg[e.name]
        if isinstance(e, N.DimRead):
            r = self.fresh(I64)
            self.ins.append(ArrayDim(r, self.var_reg[e.arr], e.axis))
            return r
        if isinstance(e, N.Index2D):
            arr = self.expr(e.arr)
            i = self.to_type(self.expr(e.i), I64)
            j = self.to_type(self.expr(e.j), I64)
            r = self.fresh(self.node_type(e))
            self.ins.append(LoadIndex(r, arr, i, j))
            return r
        if isinstance(e, N.BinOp):
            wider = self.node_type(e)
            lhs = self.to_type(self.expr(e.lhs), wider)
            rhs = self.to_type(self.expr(e.rhs), wider)
            r = self.fresh(wider)
            self.ins.append(BinInstr(e.op, r, lhs, rhs))
            return r
        if isinstance(e, N.Cast):
            src = self.expr(e.value)
            r = self.fresh(e.target)
            self.ins.append(ConvertInstr(r, src, e.target))
            return r
        if isinstance(e, N.Call):
            sig = self.tk.call_bindings.get(e.node_id)
            if sig is None:
                return self.construct(e)
            args = tuple(
                self.to_type(self.expr(a), pt) for a, pt in zip(e.args, sig.param_types)
            )
            r = self.fresh(sig.return_type)
            self.ins.append(CallDirect(sig.callable_id, r, args))
            return r
        if isinstance(e, N.Construct):
            return self.construct(e)
        if isinstance(e, N.MemberRead):
            obj = self.expr(e.obj)
            r = self.fresh(self.node_type(e))
            self.ins.append(MemberReadInstr(r, obj, e.member))
            return r
        if isinstance(e, N.MethodCall):
            sig = self.tk.call_bindings[e.node_id]
            obj = self.expr(e.obj)
            args = tuple(
                self.to_type(self.expr(a), pt) for a, pt in zip(e.args, sig.param_types)
            )
            r = self.fresh(sig.return_type)
            self.ins.append(MethodCallInstr(sig.callable_id, r, obj, args))
            return r
        raise LoweringError(f"unsupported expression {type(e).__name__}")

    def construct(self, e: N.Expr) -> int:
        t = self.node_type(e)
        ent = _class_entity_of(self.engine, t)
        r = self.fresh(t)
        self.ins.append(ConstructInstr(r, ent.id))
        return r


def _class_entity_of(engine: Engine, t: TypeRef) -> Entity:
    if isinstance(t, ClassType):
        return engine.entity(t.entity_id)
    if isinstance(t, InstantiationType):
        eid = engine.instantiation_cache.get((t.template_id, t.args))
        if eid is None:
            raise LoweringError(f"{render_type(t)} was never instantiated")
        return engine.entity(eid)
    raise LoweringError(f"{render_type(t)} is not a class type")


def class_slots(engine: Engine, class_ent: Entity) -> list[Entity]:
    return engine.class_members(class_ent)


# --- verifier -----------------------------------------------------------------


def verify(engine: Engine, ir: TypedIR) -> None:
    """Reject any operand/instruction type mismatch before execution."""
    regs = ir.registers
    n = len(ir.instructions)

    def reg(i: int) -> TypeRef:
        if not (0 <= i < len(regs)):
            raise VerifyError(f"register r{i} out of range")
        return regs[i]

    def want(i: int, t: TypeRef, what: str) -> None:
        if reg(i) != t:
            raise VerifyError(f"{what}: r{i} is {render_type(reg(i))}, expected {render_type(t)}")

    returns = 0
    for idx, ins in enumerate(ir.instructions):
        if isinstance(ins, LoadConst):
            want(ins.dst, ins.type, "const")
        elif isinstance(ins, LoadParam):
            if not (0 <= ins.index < len(ir.params)):
                raise VerifyError("param index out of range")
            want(ins.dst, ir.params[ins.index], "param")
        elif isinstance(ins, ArrayDim):
            if not isinstance(reg(ins.arr), Array2DType):
                raise VerifyError("dim of a non-array register")
            want(ins.dst, I64, "dim")
        elif isinstance(ins, LoadIndex):
            at = reg(ins.arr)
            if not isinstance(at, Array2DType):
                raise VerifyError("index of a non-array register")
            want(ins.i, I64, "index")
            want(ins.j, I64, "index")
            want(ins.dst, at.element, "index")
        elif isinstance(ins, BinInstr):
            t = reg(ins.dst)
            if t not in ARITH_ORDER:
                raise VerifyError(f"arithmetic on {render_type(t)}")
            want(ins.lhs, t, "binop")
            want(ins.rhs, t, "binop")
        elif isinstance(ins, CmpLt):
            t = reg(ins.lhs)
            if t not in (I64,):
                raise VerifyError("cmp_lt requires i64 operands")
            want(ins.rhs, t, "cmp_lt")
            want(ins.dst, BOOL, "cmp_lt")
        elif isinstance(ins, ConvertInstr):
            want(ins.dst, ins.to_type, "convert")
            src = reg(ins.src)
            if src != ins.to_type and src not in ARITH_ORDER and src is not BOOL:
                raise VerifyError(f"convert from {render_type(src)}")
        elif isinstance(ins, CallDirect):
            sig = _concrete_signature(engine, ins.callable_id)
            if len(ins.args) != len(sig.params):
                raise VerifyError("call arity mismatch")
            for a, p in zip(ins.args, sig.params):
                want(a, p.type, "call argument")
            want(ins.dst, sig.return_type, "call result")
        elif isinstance(ins, MemberReadInstr):
            cls = _verify_class_reg(engine, reg(ins.inst))
            member = engine.find_member(cls, ins.slot)
            if member is None or member.kind is not EntityKind.DATA_MEMBER:
                raise VerifyError(f"no data member {ins.slot!r}")
            want(ins.dst, member.decl_type, "member read")
        elif isinstance(ins, MethodCallInstr):
            _verify_class_reg(engine, reg(ins.inst))
            sig = _concrete_signature(engine, ins.callable_id)
            if len(ins.args) != len(sig.params):
                raise VerifyError("method arity mismatch")
            for a, p in zip(ins.args, sig.params):
                want(a, p.type, "method argument")
            want(ins.dst, sig.return_type, "method result")
        elif isinstance(ins, ConstructInstr):
            ent = engine.entity(ins.class_id)
            if ent.kind not in (EntityKind.CLASS, EntityKind.INSTANTIATION):
                raise VerifyError("construct of a non-class")
            if not isinstance(reg(ins.dst), (ClassType, InstantiationType)):
                raise VerifyError("construct into a non-class register")
        elif isinstance(ins, Jump):
            _verify_label(ir, ins.label, n)
        elif isinstance(ins, BranchFalse):
            want(ins.cond, BOOL, "branch")
            _verify_label(ir, ins.label, n)
        elif isinstance(ins, Return):
            want(ins.src, ir.return_type, "return")
            returns += 1
            if idx != n - 1:
                raise VerifyError("return must be the final instruction")
        else:
            raise VerifyError(f"unknown instruction {type(ins).__name__}")
    if returns != 1:
        raise VerifyError("exactly one return required")
    ir.verified = True


def _verify_label(ir: TypedIR, label: str, n: int) -> None:
    if label not in ir.labels or not (0 <= ir.labels[label] <= n):
        raise VerifyError(f"bad label {label!r}")


def _verify_class_reg(engine: Engine, t: TypeRef) -> Entity:
    if not isinstance(t, (ClassType, InstantiationType)):
        raise VerifyError("instance operation on a non-class register")
    return _class_entity_of(engine, t)


def _concrete_signature(engine: Engine, cid: int):
    ent = engine.entity(cid)
    if ent.kind in (EntityKind.OVERLOAD_SET, EntityKind.FUNCTION_TEMPLATE, EntityKind.CLASS_TEMPLATE):
        raise VerifyError(f"call target {ent.qualified_name!r} is not a concrete body")
    if ent.signature is None or ent.body is None:
        raise VerifyError(f"call target {ent.qualified_name!r} has no body")
    return ent.signature


# --- callee closures ------------------------------------------------------------


def compiled_callable(engine: Engine, cid: int) -> Callable:
    """Fetch (or build once) the straight-line evaluator for a concrete
    callable id."""
    fn = engine.closure_cache.get(cid)
    if fn is None:
        fn = _compile_callable(engine, cid, frozenset())
    return fn


def _compile_callable(engine: Engine, cid: int, compiling: frozenset) -> Callable:
    if cid in compiling:
        ent = engine.entity(cid)
        raise LoweringError(f"recursive call chain through {ent.qualified_name!r}")
    ent = engine.entity(cid)
    body_types = infer_body_types(engine, ent)
    owner = engine.entity(ent.owner) if ent.owner is not None else None
    layout = {}
    if owner is not None:
        layout = {m.name: i for i, m in enumerate(class_slots(engine, owner))}
    param_index = {p.name: i for i, p in enumerate(ent.signature.params)}
    let_index = {}
    comp = _BodyCompiler(
        engine, body_types, param_index, let_index, layout, compiling | {cid}
    )
    let_fns = []
    for let in ent.body.lets:
        let_fns.append(comp.expr(let.value))
        let_index[let.name] = len(param_index) + len(let_fns) - 1
    result_fn = comp.expr(ent.body.result)
    ret = ent.signature.return_type
    if body_types.result_type != ret:
        conv = convert_fn(body_types.result_type, ret)
        inner = result_fn
        result_fn = lambda f, r, _c=conv, _i=inner: _c(_i(f, r))

    if owner is None:
        if not let_fns:
            def call(*args, _res=result_fn):
                return _res(args, None)
        else:
            def call(*args, _lets=tuple(let_fns), _res=result_fn):
                f = list(args)
                for lf in _lets:
                    f.append(lf(f, None))
                return _res(f, None)
    else:
        if not let_fns:
            def call(recv, *args, _res=result_fn):
                return _res(args, recv)
        else:
            def call(recv, *args, _lets=tuple(let_fns), _res=result_fn):
                f = list(args)
                for lf in _lets:
                    f.append(lf(f, recv))
                return _res(f, recv)

    engine.closure_cache[cid] = call
    return call


class _BodyCompiler:
    """Compile body expressions to closures over (frame, receiver)."""

    def __init__(self, engine, body_types: BodyTypes, params, lets, layout, compiling):
        self.engine = engine
        self.types = body_types.node_types
        self.bindings = body_types.call_bindings
        self.params = params
        self.lets = lets
        self.layout = layout
        self.compiling = compiling

    def expr(self, e: N.Expr) -> Callable:
        if isinstance(e, N.Lit):
            v = e.value
            return lambda f, r, _v=v: _v
        if isinstance(e, N.NameRef):
            if e.name in self.params:
                i = self.params[e.name]
                return lambda f, r, _i=i: f[_i]
            if e.name in self.lets:
                i = self.lets[e.name]
                return lambda f, r, _i=i: f[_i]
            if e.name in self.layout:
                i = self.layout[e.name]
                return lambda f, r, _i=i: r[_i]
            raise LoweringError(f"unknown name {e.name!r} in bound body")
        if isinstance(e, N.BinOp):
            wider = self.types[e.node_id]
            lf = self.coerced(e.lhs, wider)
            rf = self.coerced(e.rhs, wider)
            op = binop_fn(e.op, wider)
            return lambda f, r, _o=op, _l=lf, _r=rf: _o(_l(f, r), _r(f, r))
        if isinstance(e, N.Cast):
            vf = self.expr(e.value)
            src = self.types[e.value.node_id]
            if src == e.target:
                return vf  # identity casts cost nothing once typed
            conv = convert_fn(src, e.target)
            return lambda f, r, _c=conv, _v=vf: _c(_v(f, r))
        if isinstance(e, N.Call):
            sig = self.bindings.get(e.node_id)
            if sig is None:
                raise LoweringError("unbound call in body")
            callee = self.engine.closure_cache.get(sig.callable_id)
            if callee is None:
                callee = _compile_callable(self.engine, sig.callable_id, self.compiling)
            afns = [self.coerced(a, pt) for a, pt in zip(e.args, sig.param_types)]
            return _apply_fn(callee, afns)
        if isinstance(e, N.MemberRead):
            of = self.expr(e.obj)
            idx = self.member_index(e)
            return lambda f, r, _o=of, _i=idx: _o(f, r)[_i]
        if isinstance(e, N.MethodCall):
            sig = self.bindings[e.node_id]
            callee = self.engine.closure_cache.get(sig.callable_id)
            if callee is None:
                callee = _compile_callable(self.engine, sig.callable_id, self.compiling)
            of = self.expr(e.obj)
            afns = [self.coerced(a, pt) for a, pt in zip(e.args, sig.param_types)]
            return _apply_method_fn(callee, of, afns)
        raise LoweringError(f"unsupported construct in bound body: {type(e).__name__}")

    def coerced(self, e: N.Expr, want: TypeRef) -> Callable:
        have = self.types[e.node_id]
        if isinstance(e, N.Lit) and have != want:
            from .numerics import convert

            v = convert(e.value, have, want)
            return lambda f, r, _v=v: _v
        fn = self.expr(e)
        if have == want:
            return fn
        conv = convert_fn(have, want)
        return lambda f, r, _c=conv, _f=fn: _c(_f(f, r))

    def member_index(self, e: N.MemberRead) -> int:
        t = self.types[e.obj.node_id]
        cls = _class_entity_of(self.engine, t)
        for i, m in enumerate(class_slots(self.engine, cls)):
            if m.name == e.member:
                return i
        raise LoweringError(f"no member {e.member!r} on {render_type(t)}")


def _apply_fn(callee: Callable, afns: list) -> Callable:
    if len(afns) == 0:
        return lambda f, r, _c=callee: _c()
    if len(afns) == 1:
        a0 = afns[0]
        return lambda f, r, _c=callee, _a=a0: _c(_a(f, r))
    if len(afns) == 2:
        a0, a1 = afns
        return lambda f, r, _c=callee, _a=a0, _b=a1: _c(_a(f, r), _b(f, r))
    return lambda f, r, _c=callee, _as=tuple(afns): _c(*[a(f, r) for a in _as])


def _apply_method_fn(callee: Callable, of: Callable, afns: list) -> Callable:
    if len(afns) == 0:
        return lambda f, r, _c=callee, _o=of: _c(_o(f, r))
    if len(afns) == 1:
        a0 = afns[0]
        return lambda f, r, _c=callee, _o=of, _a=a0: _c(_o(f, r), _a(f, r))
    return lambda f, r, _c=callee, _o=of, _as=tuple(afns): _c(_o(f, r), *[a(f, r) for a in _as])


def instance_factory(engine: Engine, class_ent: Entity) -> Callable:
    """Build the default-constructor for the typed path: instances are
    plain slot lists in declaration order."""
    makers = []
    for m in class_slots(engine, class_ent):
        mt = m.decl_type
        if isinstance(mt, (ClassType, InstantiationType)):
            nested = instance_factory(engine, _class_entity_of(engine, mt))
            makers.append(nested)
        else:
            v = m.initializer if m.initializer is not None else zero_of(mt)
            makers.append(lambda _v=v: _v)
    return lambda _ms=tuple(makers): [mk() for mk in _ms]


# --- decode + execute ------------------------------------------------------------

K_CONST = 0
K_PARAM = 1
K_DIM = 2
K_IDX = 3
K_BIN = 4
K_CMPLT = 5
K_CONV = 6
K_CALL = 7
K_MEMBER = 8
K_METHOD = 9
K_CONSTRUCT = 10
K_JUMP = 11
K_BRF = 12
K_RET = 13


def _decode(engine: Engine, ir: TypedIR) -> list:
    """Resolve labels, pre-bind operator/conversion functions, and look up
    callee closures once."""
    out = []
    for ins in ir.instructions:
        if isinstance(ins, LoadConst):
            out.append((K_CONST, ins.dst, ins.value))
        elif isinstance(ins, LoadParam):
            out.append((K_PARAM, ins.dst, ins.index))
        elif isinstance(ins, ArrayDim):
            out.append((K_DIM, ins.dst, ins.arr, ins.axis))
        elif isinstance(ins, LoadIndex):
            out.append((K_IDX, ins.dst, ins.arr, ins.i, ins.j))
        elif isinstance(ins, BinInstr):
            fn = binop_fn(ins.op, ir.registers[ins.dst])
            out.append((K_BIN, ins.dst, fn, ins.lhs, ins.rhs))
        elif isinstance(ins, CmpLt):
            out.append((K_CMPLT, ins.dst, ins.lhs, ins.rhs))
        elif isinstance(ins, ConvertInstr):
            fn = convert_fn(ir.registers[ins.src], ins.to_type)
            out.append((K_CONV, ins.dst, fn, ins.src))
        elif isinstance(ins, CallDirect):
            fn = compiled_callable(engine, ins.callable_id)
            out.append((K_CALL, ins.dst, fn, ins.args))
        elif isinstance(ins, MemberReadInstr):
            cls = _class_entity_of(engine, ir.registers[ins.inst])
            idx = [m.name for m in class_slots(engine, cls)].index(ins.slot)
            out.append((K_MEMBER, ins.dst, ins.inst, idx))
        elif isinstance(ins, MethodCallInstr):
            fn = compiled_callable(engine, ins.callable_id)
            out.append((K_METHOD, ins.dst, fn, ins.inst, ins.args))
        elif isinstance(ins, ConstructInstr):
            factory = instance_factory(engine, engine.entity(ins.class_id))
            out.append((K_CONSTRUCT, ins.dst, factory))
        elif isinstance(ins, Jump):
            out.append((K_JUMP, ir.labels[ins.label]))
        elif isinstance(ins, BranchFalse):
            out.append((K_BRF, ins.cond, ir.labels[ins.label]))
        elif isinstance(ins, Return):
            out.append((K_RET, ins.src))
        else:
            raise LoweringError(f"cannot decode {type(ins).__name__}")
    return out


def _check_args(ir: TypedIR, args) -> None:
    from .boxed import Array2D

    if len(args) != len(ir.params):
        raise EvalError(f"kernel takes {len(ir.params)} arguments, got {len(args)}")
    for a, t in zip(args, ir.params):
        if isinstance(t, Array2DType):
            ok = isinstance(a, Array2D)
        elif t is BOOL:
            ok = isinstance(a, bool)
        elif t is I32 or t is I64:
            ok = isinstance(a, int) and not isinstance(a, bool)
        elif t is F32 or t is F64:
            ok = isinstance(a, float)
        else:
            ok = False
        if not ok:
            raise EvalError(f"argument {a!r} does not match {render_type(t)}")


def execute(engine: Engine, ir: TypedIR, args: list):
    """Run the IR over an unboxed register file and return a native value."""
    if not ir.verified:
        verify(engine, ir)
    if ir._decoded is None:
        ir._decoded = _decode(engine, ir)
    _check_args(ir, args)
    code = ir._decoded
    regs: list = [None] * len(ir.registers)
    pc = 0
    n = len(code)
    while pc < n:
        ins = code[pc]
        op = ins[0]
        if op == K_BIN:
            regs[ins[1]] = ins[2](regs[ins[3]], regs[ins[4]])
        elif op == K_CMPLT:
            regs[ins[1]] = regs[ins[2]] < regs[ins[3]]
        elif op == K_BRF:
            if not regs[ins[1]]:
                pc = ins[2]
                continue
        elif op == K_IDX:
            a = regs[ins[2]]
            i = regs[ins[3]]
            j = regs[ins[4]]
            if i < 0 or i >= a.rows or j < 0 or j >= a.cols:
                raise IndexOutOfBounds(i, j, (a.rows, a.cols))
            regs[ins[1]] = a.data[i * a.cols + j]
        elif op == K_CALL:
            a = ins[3]
            la = len(a)
            if la == 1:
                regs[ins[1]] = ins[2](regs[a[0]])
            elif la == 0:
                regs[ins[1]] = ins[2]()
            elif la == 2:
                regs[ins[1]] = ins[2](regs[a[0]], regs[a[1]])
            else:
                regs[ins[1]] = ins[2](*[regs[x] for x in a])
        elif op == K_MEMBER:
            regs[ins[1]] = regs[ins[2]][ins[3]]
        elif op == K_CONV:
            regs[ins[1]] = ins[2](regs[ins[3]])
        elif op == K_CONST:
            regs[ins[1]] = ins[2]
        elif op == K_JUMP:
            pc = ins[1]
            continue
        elif op == K_METHOD:
            a = ins[4]
            if len(a) == 0:
                regs[ins[1]] = ins[2](regs[ins[3]])
            else:
                regs[ins[1]] = ins[2](regs[ins[3]], *[regs[x] for x in a])
        elif op == K_CONSTRUCT:
            regs[ins[1]] = ins[2]()
        elif op == K_PARAM:
            regs[ins[1]] = args[ins[2]]
        elif op == K_DIM:
            a = regs[ins[2]]
            regs[ins[1]] = a.rows if ins[3] == 0 else a.cols
        elif op == K_RET:
            return regs[ins[1]]
        pc += 1
    raise EvalError("fell off the end of the instruction stream")


# --- dump -------------------------------------------------------------------


_OPNAMES = {"+": "add", "-": "sub", "*": "mul", "/": "div"}


def dump_ir(ir: TypedIR) -> str:
    """Deterministic listing, one instruction per line."""
    by_index: dict[int, list[str]] = {}
    for name, idx in ir.labels.items():
        by_index.setdefault(idx, []).append(name)
    lines = []
    for idx, ins in enumerate(ir.instructions):
        prefix = "".join(f"{l}: " for l in sorted(by_index.get(idx, [])))
        lines.append(prefix + _render_instr(ir, ins))
    return "\n".join(lines) + "\n"


def _render_instr(ir: TypedIR, ins: Instr) -> str:
    if isinstance(ins, LoadConst):
        return f"r{ins.dst} = const {render_type(ins.type)} {ins.value!r}"
    if isinstance(ins, LoadParam):
        return f"r{ins.dst} = param {ins.index}"
    if isinstance(ins, ArrayDim):
        return f"r{ins.dst} = dim r{ins.arr} axis {ins.axis}"
    if isinstance(ins, LoadIndex):
        return f"r{ins.dst} = index r{ins.arr}[r{ins.i}, r{ins.j}]"
    if isinstance(ins, BinInstr):
        return f"r{ins.dst} = {_OPNAMES[ins.op]} r{ins.lhs}, r{ins.rhs}"
    if isinstance(ins, CmpLt):
        return f"r{ins.dst} = lt r{ins.lhs}, r{ins.rhs}"
    if isinstance(ins, ConvertInstr):
        return f"r{ins.dst} = convert r{ins.src} to {render_type(ins.to_type)}"
    if isinstance(ins, CallDirect):
        args = ", ".join(f"r{a}" for a in ins.args)
        return f"r{ins.dst} = call #{ins.callable_id} ({args})"
    if isinstance(ins, MemberReadInstr):
        return f"r{ins.dst} = member r{ins.inst}.{ins.slot}"
    if isinstance(ins, MethodCallInstr):
        args = ", ".join(f"r{a}" for a in ins.args)
        return f"r{ins.dst} = method #{ins.callable_id} r{ins.inst} ({args})"
    if isinstance(ins, ConstructInstr):
        return f"r{ins.dst} = construct #{ins.class_id}"
    if isinstance(ins, Jump):
        return f"jump {ins.label}"
    if isinstance(ins, BranchFalse):
        return f"br_false r{ins.cond}, {ins.label}"
    if isinstance(ins, Return):
        return f"return r{ins.src}"
    raise LoweringError(f"cannot render {type(ins).__name__}")
