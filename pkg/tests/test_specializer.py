from __future__ import annotations

import pytest

from reflexbridge.entities import Engine, EntityKind
from reflexbridge.errors import (
    AmbiguousOverload,
    DeductionFailure,
    KernelTypeError,
    NoViableOverload,
)
from reflexbridge.fixtures import case_kernel
from reflexbridge.kernel_parser import parse_kernel
from reflexbridge.specializer import (
    conversion_rank,
    deduce,
    instantiate,
    resolve_overload,
    stats,
    type_kernel,
)
from reflexbridge.types import ARR2D, BOOL, F32, F64, I32, I64, InstantiationType

OVERLOAD_DECLS = """\
int f2(int x) { return x; }
double f2(double x) { return x; }
float f3(float x) { return x; }
double f3(double x) { return x; }
"""


@pytest.fixture
def odeng() -> Engine:
    e = Engine()
    e.declare(OVERLOAD_DECLS)
    return e


def test_rank_table():
    assert conversion_rank(F64, F64) == 0
    assert conversion_rank(I32, I64) == 1
    assert conversion_rank(F32, F64) == 2
    assert conversion_rank(I32, F64) == 3
    assert conversion_rank(I64, F32) == 3
    assert conversion_rank(BOOL, I32) == 4
    assert conversion_rank(I64, I32) is None
    assert conversion_rank(F64, F32) is None
    assert conversion_rank(F64, I64) is None
    assert conversion_rank(BOOL, F64) is None


def test_exact_beats_conversion(odeng):
    sig = resolve_overload(odeng, odeng.lookup("f2"), [I32])
    assert odeng.entity(sig.callable_id).signature.params[0].type is I32


def test_widening_to_float_when_narrowing_impossible(odeng):
    sig = resolve_overload(odeng, odeng.lookup("f2"), [I64])
    assert odeng.entity(sig.callable_id).signature.params[0].type is F64


def test_ambiguous_tie(odeng):
    with pytest.raises(AmbiguousOverload):
        resolve_overload(odeng, odeng.lookup("f3"), [I32])


def test_no_viable(odeng):
    with pytest.raises(NoViableOverload):
        resolve_overload(odeng, odeng.lookup("f2"), [I32, I32])


def test_resolution_determinism(odeng):
    s1 = resolve_overload(odeng, odeng.lookup("f2"), [I32])
    s2 = resolve_overload(odeng, odeng.lookup("f2"), [I32])
    assert s1 == s2
    assert s1.callable_id == s2.callable_id


# --- deduction ----------------------------------------------------------------


def test_deduce_fixture_cases(engine):
    add42 = engine.lookup("add42")
    assert deduce(add42, [F64]) == [F64]
    assert deduce(add42, [I64]) == [I64]
    with pytest.raises(DeductionFailure):
        deduce(add42, [F64, F64])


# --- instantiation ----------------------------------------------------------------


def test_nested_vec_instantiates_innermost_first(engine):
    vec = engine.lookup("Vec")
    inner = InstantiationType(vec.id, "Vec", (F64,))
    instantiate(engine, vec, [inner])
    snap = stats(engine)
    assert snap.order_log == ["Vec<f64>", "Vec<Vec<f64>>"]
    assert snap.total_instantiations == 2


def test_tuple_arity_three(engine):
    tup = engine.lookup("Tuple")
    instantiate(engine, tup, [F64, F64, F64])
    snap = stats(engine)
    assert snap.total_instantiations == 4
    assert snap.order_log == [
        "Tuple<f64, f64, f64>",
        "Tuple<f64, f64>",
        "Tuple<f64>",
        "Tuple<>",
    ]


def test_instantiation_memoized(engine):
    tup = engine.lookup("Tuple")
    first = instantiate(engine, tup, [F64, F64, F64])
    before = stats(engine)
    second = instantiate(engine, tup, [F64, F64, F64])
    after = stats(engine)
    assert first.id == second.id
    assert after.total_instantiations == before.total_instantiations
    assert after.cache_hits == before.cache_hits + 1


def test_fresh_engine_stats_zero(engine):
    snap = stats(engine)
    assert snap.total_instantiations == 0
    assert snap.cache_hits == 0
    assert snap.node_count == 0
    assert snap.order_log == []


def test_stats_reset(engine):
    instantiate(engine, engine.lookup("Tuple"), [F64])
    stats(engine, reset=True)
    assert stats(engine).total_instantiations == 0


def test_per_template_counts(engine):
    tup = engine.lookup("Tuple")
    vec = engine.lookup("Vec")
    instantiate(engine, tup, [F64])  # Tuple<f64>, Tuple<>
    instantiate(engine, vec, [F64])  # Vec<f64>
    snap = stats(engine)
    assert snap.per_template[tup.id] == 2
    assert snap.per_template[vec.id] == 1
    assert snap.total_instantiations == sum(snap.per_template.values())
    assert len(snap.order_log) == snap.total_instantiations


def test_function_instantiation_registers_entity(engine):
    add42 = engine.lookup("add42")
    inst = instantiate(engine, add42, [F64])
    assert inst.kind is EntityKind.INSTANTIATION
    assert inst.qualified_name == "add42<f64>"
    assert engine.lookup("add42<f64>").id == inst.id
    assert inst.signature.params[0].type is F64


# --- kernel typing ------------------------------------------------------------


def test_trace_kernel_bindings(engine):
    k = case_kernel("templated-fns")
    tk = type_kernel(engine, k, [ARR2D])
    sigs = list(tk.call_bindings.values())
    assert len(sigs) == 2
    names = sorted(engine.entity(s.callable_id).qualified_name for s in sigs)
    assert names == ["add42<f64>", "add42<i64>"]
    ret = tk.node_types[k.body[-1].value.node_id]
    assert ret is F64


def test_widening_literal_binop(engine):
    k = parse_kernel("kernel k() -> f64 { return 1 + 1.5; }")
    tk = type_kernel(engine, k, [])
    assert tk.node_types[k.body[0].value.node_id] is F64


def test_type_error_on_narrowing_call(bare_engine):
    bare_engine.declare("int only32(int x) { return x; }")
    k = parse_kernel("kernel k() -> f64 { return only32(1.5); }")
    with pytest.raises(KernelTypeError) as exc:
        type_kernel(bare_engine, k, [])
    assert exc.value.code == "NoViableOverload"


def test_typing_is_pure(engine):
    k = case_kernel("templated-fns")
    type_kernel(engine, k, [ARR2D])
    assert engine.counters.invocations == 0
    assert engine.counters.resolutions == 0
    assert engine.counters.boxings == 0


def test_each_call_site_resolved_once(engine):
    k = case_kernel("templated-fns")
    type_kernel(engine, k, [ARR2D])
    snap = stats(engine)
    assert snap.total_instantiations == 2  # add42<f64>, add42<i64>
    assert snap.cache_hits == 0


def test_param_type_mismatch_rejected(engine):
    k = case_kernel("templated-fns")
    with pytest.raises(KernelTypeError):
        type_kernel(engine, k, [F64])


def test_compound_assign_narrowing_rejected(engine):
    k = parse_kernel(
        "kernel k() -> f64 { let n = 1i64; for i in 0..3 { n += 1.5; } return 0.0; }"
    )
    with pytest.raises(KernelTypeError) as exc:
        type_kernel(engine, k, [])
    assert exc.value.code == "TagMismatch"


def test_explicit_targs_bypass_deduction(engine):
    k = parse_kernel("kernel k() -> f64 { return add42<f64>(1.0) + add42<i64>(2i64); }")
    tk = type_kernel(engine, k, [])
    names = sorted(
        engine.entity(s.callable_id).qualified_name for s in tk.call_bindings.values()
    )
    assert names == ["add42<f64>", "add42<i64>"]
