from __future__ import annotations

import math

import pytest

from oracle import expected
from reflexbridge.boxed import Array2D, BoxedValue, box
from reflexbridge.dyn_runtime import dyn_call, run_kernel_dynamic
from reflexbridge.errors import EvalError, IndexOutOfBounds, NoViableOverload, TagMismatch
from reflexbridge.fixtures import case_kernel, fresh_engine
from reflexbridge.kernel_parser import parse_kernel
from reflexbridge.types import F64, I32, I64


def test_add42_float(engine):
    reply = dyn_call(engine, engine.lookup("add42"), [BoxedValue(F64, 0.0)])
    assert reply.tag is F64 and reply.payload == 42.0


def test_add42_int(engine):
    reply = dyn_call(engine, engine.lookup("add42"), [BoxedValue(I64, 0)])
    assert reply.tag is I64 and reply.payload == 42


def test_overload_picks_exact(bare_engine):
    bare_engine.declare("int f2(int x) { return x; }\ndouble f2(double x) { return x; }")
    reply = dyn_call(bare_engine, bare_engine.lookup("f2"), [BoxedValue(I32, 1)])
    assert reply.tag is I32 and reply.payload == 1


def test_trace_kernel_over_zeros(engine):
    k = case_kernel("templated-fns")
    reply = run_kernel_dynamic(engine, k, [box(Array2D.zeros(100, 100))])
    assert reply.tag is F64
    assert reply.payload == 8400.0  # flat-loop oracle: 100 * (42 + 42)


def test_trivial_kernel(engine):
    k = parse_kernel("kernel k() -> f64 { return 1.0; }")
    reply = run_kernel_dynamic(engine, k, [])
    assert reply == BoxedValue(F64, 1.0)


def test_member_sum_kernel(bare_engine):
    bare_engine.declare("struct S { double x = 1.5; double get() { return x; } };")
    k = parse_kernel(
        "kernel mem() -> f64 { S s; let t = 0.0; for i in 0..100 { t += s.x; } return t; }"
    )
    reply = run_kernel_dynamic(bare_engine, k, [])
    assert reply.payload == 150.0  # closed form 100 * 1.5


@pytest.mark.parametrize("kind", ["zeros", "ones", "random"])
@pytest.mark.parametrize("case", ["fn-no-args", "overloaded-fns", "templated-fns", "data-members", "methods"])
def test_dynamic_matches_independent_oracle(case, kind):
    size = 13
    engine = fresh_engine()
    k = case_kernel(case)
    if kind == "random":
        arr = Array2D.random(size, size, seed=7)
        want = expected(case, kind, size, seed=7)
    else:
        arr = Array2D.zeros(size, size) if kind == "zeros" else Array2D.ones(size, size)
        want = expected(case, kind, size)
    got = run_kernel_dynamic(engine, k, [box(arr)]).payload
    assert got == pytest.approx(want, rel=1e-12)


def test_resolutions_counter_counts_every_call(engine):
    # one call site, N iterations -> exactly N resolutions (no caching)
    n = 57
    k = case_kernel("fn-no-args")
    run_kernel_dynamic(engine, k, [box(Array2D.zeros(n, n))])
    assert engine.counters.resolutions == n
    assert engine.counters.invocations == n
    assert engine.counters.boxings > 0


def test_instance_isolation(bare_engine):
    bare_engine.declare("struct S { double x = 1.5; };")
    k = parse_kernel(
        "kernel k() -> f64 { S a; S b; let t = 0.0; t += a.x + b.x; return t; }"
    )
    assert run_kernel_dynamic(bare_engine, k, []).payload == 3.0


def test_int_division_by_zero_is_error(bare_engine):
    bare_engine.declare("long idiv(long a, long b) { return a / b; }")
    k = parse_kernel("kernel k() -> i64 { return idiv(1i64, 0i64); }")
    with pytest.raises(EvalError):
        run_kernel_dynamic(bare_engine, k, [])


def test_float_division_by_zero_is_ieee(bare_engine):
    bare_engine.declare("double fdiv(double a, double b) { return a / b; }")
    k = parse_kernel("kernel k() -> f64 { return fdiv(1.0, 0.0); }")
    assert math.isinf(run_kernel_dynamic(bare_engine, k, []).payload)
    k2 = parse_kernel("kernel k2() -> f64 { return fdiv(0.0, 0.0); }")
    assert math.isnan(run_kernel_dynamic(bare_engine, k2, []).payload)


def test_integer_wrapping_at_declared_width(bare_engine):
    bare_engine.declare("int bump(int x) { return x + 1; }")
    k = parse_kernel("kernel k() -> i64 { return bump(2147483647i32); }")
    assert run_kernel_dynamic(bare_engine, k, []).payload == -(2**31)


def test_cast_truncates_toward_zero(engine):
    k = parse_kernel("kernel k() -> i64 { return i64(0.0 - 1.7); }")
    assert run_kernel_dynamic(engine, k, []).payload == -1


def test_index_out_of_bounds(engine):
    k = parse_kernel("kernel k(a: arr2d) -> f64 { return a[5, 0]; }")
    with pytest.raises(IndexOutOfBounds):
        run_kernel_dynamic(engine, k, [box(Array2D.zeros(2, 2))])


def test_no_viable_overload_at_runtime(bare_engine):
    bare_engine.declare("int only32(int x) { return x; }")
    k = parse_kernel("kernel k() -> f64 { return only32(1.5); }")
    with pytest.raises(NoViableOverload):
        run_kernel_dynamic(bare_engine, k, [])


def test_kernel_param_tag_check(engine):
    k = case_kernel("templated-fns")
    with pytest.raises(TagMismatch):
        run_kernel_dynamic(engine, k, [BoxedValue(F64, 1.0)])
