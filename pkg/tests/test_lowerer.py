from __future__ import annotations

import pytest

from conftest import golden_path
from oracle import expected
from reflexbridge.boxed import Array2D, box, unbox
from reflexbridge.dyn_runtime import run_kernel_dynamic
from reflexbridge.errors import EvalError, LoweringError, VerifyError
from reflexbridge.fixtures import CASE_NAMES, case_kernel, fresh_engine
from reflexbridge.kernel_parser import parse_kernel
from reflexbridge.lowerer import (
    BinInstr,
    CallDirect,
    LoadConst,
    MemberReadInstr,
    Return,
    ConstructInstr,
    dump_ir,
    execute,
    lower,
    verify,
)
from reflexbridge.specializer import type_kernel
from reflexbridge.types import ARR2D, F64, I64


def lowered(engine, source_or_case: str):
    if source_or_case in CASE_NAMES:
        k = case_kernel(source_or_case)
    else:
        k = parse_kernel(source_or_case)
    tk = type_kernel(engine, k, [t for _, t in k.params])
    return k, lower(engine, tk)


def test_trace_ir_has_two_distinct_call_targets(engine):
    _, ir = lowered(engine, "templated-fns")
    calls = [i for i in ir.instructions if isinstance(i, CallDirect)]
    assert len(calls) == 2
    assert len({c.callable_id for c in calls}) == 2
    names = sorted(engine.entity(c.callable_id).qualified_name for c in calls)
    assert names == ["add42<f64>", "add42<i64>"]


def test_return_const_kernel_is_two_instructions(engine):
    _, ir = lowered(engine, "kernel k() -> f64 { return 1.0; }")
    assert len(ir.instructions) == 2
    assert isinstance(ir.instructions[0], LoadConst)
    assert isinstance(ir.instructions[1], Return)
    assert dump_ir(ir).count("\n") == 2


def test_member_kernel_ir_shape(bare_engine):
    bare_engine.declare("struct S { double x = 1.5; };")
    _, ir = lowered(
        bare_engine,
        "kernel mem() -> f64 { S s; let t = 0.0; for i in 0..100 { t += s.x; } return t; }",
    )
    assert any(isinstance(i, ConstructInstr) for i in ir.instructions)
    assert any(isinstance(i, MemberReadInstr) for i in ir.instructions)
    assert not any(isinstance(i, CallDirect) for i in ir.instructions)


def test_no_boxing_opcodes_exist():
    from reflexbridge import lowerer

    names = {c.__name__ for c in lowerer.Instr.__subclasses__()}
    assert not any("box" in n.lower() for n in names)


def test_execute_trace_over_zeros_and_ones(engine):
    _, ir = lowered(engine, "templated-fns")
    assert execute(engine, ir, [Array2D.zeros(100, 100)]) == 8400.0
    assert execute(engine, ir, [Array2D.ones(100, 100)]) == 8600.0  # 100 * (43 + 43)


def test_execute_trivial(engine):
    _, ir = lowered(engine, "kernel k() -> f64 { return 1.0; }")
    assert execute(engine, ir, []) == 1.0


def test_dump_deterministic(engine):
    _, ir1 = lowered(engine, "templated-fns")
    e2 = fresh_engine()
    _, ir2 = lowered(e2, "templated-fns")
    assert dump_ir(ir1) == dump_ir(ir2)
    assert dump_ir(ir1).count(" call ") == 2


def test_dump_matches_golden(engine):
    _, ir = lowered(engine, "methods")
    want = golden_path("ir_methods.txt").read_text()
    assert dump_ir(ir) == want


def test_verifier_rejects_type_mismatch(engine):
    _, ir = lowered(engine, "templated-fns")
    bad = ir.instructions[:]
    for idx, ins in enumerate(bad):
        if isinstance(ins, BinInstr):
            # point an f64 arithmetic operand at the i64 loop counter
            other = next(
                i for i, t in enumerate(ir.registers) if t is I64
            )
            bad[idx] = BinInstr(ins.op, ins.dst, ins.lhs, other)
            break
    from reflexbridge.lowerer import TypedIR

    mutated = TypedIR(
        ir.name, ir.params, ir.return_type, ir.registers, bad, ir.labels
    )
    with pytest.raises(VerifyError):
        verify(engine, mutated)
    with pytest.raises(VerifyError):
        execute(engine, mutated, [Array2D.zeros(2, 2)])


def test_verifier_rejects_call_to_open_template(engine):
    _, ir = lowered(engine, "templated-fns")
    tmpl_id = engine.lookup("add42").id
    bad = [
        CallDirect(tmpl_id, i.dst, i.args) if isinstance(i, CallDirect) else i
        for i in ir.instructions
    ]
    from reflexbridge.lowerer import TypedIR

    mutated = TypedIR(ir.name, ir.params, ir.return_type, ir.registers, bad, ir.labels)
    with pytest.raises(VerifyError):
        verify(engine, mutated)


def test_execute_arg_check(engine):
    _, ir = lowered(engine, "templated-fns")
    with pytest.raises(EvalError):
        execute(engine, ir, [1.0])
    with pytest.raises(EvalError):
        execute(engine, ir, [])


def test_recursive_bodies_rejected(bare_engine):
    bare_engine.declare("double loop(double x) { return loop(x); }")
    k = parse_kernel("kernel k() -> f64 { return loop(1.0); }")
    tk = type_kernel(bare_engine, k, [])
    with pytest.raises(LoweringError):
        lower(bare_engine, tk)


def test_nested_function_calls_compile(bare_engine):
    bare_engine.declare(
        "double fortytwo() { return 42.0; }\n"
        "double addboth(double x) { return fortytwo() + x; }"
    )
    k = parse_kernel("kernel k() -> f64 { return addboth(1.0); }")
    tk = type_kernel(bare_engine, k, [])
    ir = lower(bare_engine, tk)
    assert execute(bare_engine, ir, []) == 43.0


# --- differential correctness over the whole corpus ------------------------------


@pytest.mark.parametrize("case", CASE_NAMES)
@pytest.mark.parametrize("size,kind,seed", [
    (1, "zeros", 0),
    (7, "ones", 0),
    (13, "random", 3),
    (100, "random", 11),
])
def test_paths_agree(case, size, kind, seed):
    engine = fresh_engine()
    k = case_kernel(case)
    if kind == "zeros":
        arr = Array2D.zeros(size, size)
    elif kind == "ones":
        arr = Array2D.ones(size, size)
    else:
        arr = Array2D.random(size, size, seed)
    tk = type_kernel(engine, k, [ARR2D])
    ir = lower(engine, tk)
    hot = execute(engine, ir, [arr])
    dyn = unbox(run_kernel_dynamic(engine, k, [box(arr)]), F64)
    if hot != dyn:
        assert abs(hot - dyn) <= 1e-12 * max(abs(hot), abs(dyn))
    want = expected(case, kind, size, seed)
    assert hot == pytest.approx(want, rel=1e-12)


def test_no_template_param_leaks(engine):
    """Nothing reachable from a CallSignature or the IR's registers carries
    an open template parameter."""
    from reflexbridge.types import is_concrete

    k = case_kernel("templated-fns")
    tk = type_kernel(engine, k, [ARR2D])
    for sig in tk.call_bindings.values():
        assert all(is_concrete(t) for t in sig.param_types)
        assert is_concrete(sig.return_type)
    ir = lower(engine, tk)
    assert all(is_concrete(t) for t in ir.registers)
    assert all(is_concrete(t) for t in ir.params)
    assert is_concrete(ir.return_type)


def test_integer_kernel_bit_exact(bare_engine):
    bare_engine.declare("long triple(long x) { return x * 3; }")
    src = "kernel k() -> i64 { let n = 1i64; for i in 0..30 { n += triple(n); } return n; }"
    k = parse_kernel(src)
    tk = type_kernel(bare_engine, k, [])
    ir = lower(bare_engine, tk)
    hot = execute(bare_engine, ir, [])
    dyn = run_kernel_dynamic(bare_engine, k, []).payload
    assert hot == dyn  # bit-exact, wrapping included
    assert isinstance(hot, int)
