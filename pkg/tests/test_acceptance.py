"""Acceptance criteria. Each test exercises one criterion at its stated
tolerance and prints a PASS line; run with `pytest tests/test_acceptance.py -v -s`.
"""

from __future__ import annotations

import json
import time

import pytest

from conftest import golden_path
from oracle import expected
from reflexbridge.bench import bench_table
from reflexbridge.boxed import Array2D, box, unbox
from reflexbridge.dyn_runtime import run_kernel_dynamic
from reflexbridge.errors import EngineError
from reflexbridge.fixtures import CASE_NAMES, case_kernel, fresh_engine
from reflexbridge.lowerer import execute, lower
from reflexbridge.protocol import encode_reflex_reply
from reflexbridge.reflex import ReflexFormat, ReflexKind, cpp_reflex
from reflexbridge.specializer import instantiate, stats, type_kernel
from reflexbridge.types import ARR2D, F64, InstantiationType, render_type

SIZES = (1, 7, 100)
INPUT_KINDS = ("zeros", "ones", "random")
SEED = 20240229


def _array(kind: str, size: int) -> Array2D:
    if kind == "zeros":
        return Array2D.zeros(size, size)
    if kind == "ones":
        return Array2D.ones(size, size)
    return Array2D.random(size, size, SEED)


def test_differential_correctness():
    """Typed-path result equals boxed-path result for every fixture kernel,
    size, and input family; floats within 1e-12 relative, integers exact."""
    t0 = time.perf_counter()
    checked = 0
    for case in CASE_NAMES:
        for size in SIZES:
            for kind in INPUT_KINDS:
                engine = fresh_engine()
                kernel = case_kernel(case)
                arr = _array(kind, size)
                ir = lower(engine, type_kernel(engine, kernel, [ARR2D]))
                hot = execute(engine, ir, [arr])
                dyn = unbox(run_kernel_dynamic(engine, kernel, [box(arr)]), F64)
                if isinstance(hot, int):
                    assert hot == dyn, (case, size, kind)
                else:
                    assert hot == dyn or abs(hot - dyn) <= 1e-12 * max(abs(hot), abs(dyn)), (
                        case, size, kind, hot, dyn,
                    )
                want = expected(case, kind, size, SEED)
                assert hot == pytest.approx(want, rel=1e-12), (case, size, kind)
                checked += 1
    elapsed = time.perf_counter() - t0
    assert checked == len(CASE_NAMES) * len(SIZES) * len(INPUT_KINDS)
    assert elapsed < 30.0, f"differential sweep took {elapsed:.1f}s"
    print(f"\nPASS: differential correctness ({checked} configurations, {elapsed:.1f}s)")


def test_speedup_shape():
    """At size 100 / reps 3000 every case speeds up by at least 2.0x and the
    templated case ranks first or second. Absolute times are machine-bound
    and not asserted."""
    t0 = time.perf_counter()
    rows = bench_table(size=100, reps=3000)
    elapsed = time.perf_counter() - t0
    by_case = {r.case: r for r in rows}
    for row in rows:
        assert row.speedup >= 2.0, f"{row.case}: speedup {row.speedup:.2f}x < 2.0x"
    ranked = sorted(rows, key=lambda r: r.speedup, reverse=True)
    top_two = {ranked[0].case, ranked[1].case}
    assert "templated-fns" in top_two, [
        (r.case, round(r.speedup, 2)) for r in ranked
    ]
    assert elapsed < 120.0, f"speedup bench took {elapsed:.1f}s"
    summary = ", ".join(f"{r.case}={r.speedup:.1f}x" for r in rows)
    print(f"\nPASS: speedup shape ({summary}; {elapsed:.1f}s)")


def test_instantiation_counting():
    """Closed-form instantiation counts, innermost-first ordering, and warm
    rerun behavior for both scaling workloads."""
    t0 = time.perf_counter()
    for n in range(1, 65):
        engine = fresh_engine()
        tup = engine.lookup("Tuple")
        instantiate(engine, tup, [F64] * n)
        snap = stats(engine)
        assert snap.total_instantiations == n + 1, f"tuple arity {n}"
        # warm rerun: no new materialization, one cache hit per rerun
        deltas = []
        for _ in range(2):
            before = stats(engine)
            instantiate(engine, tup, [F64] * n)
            after = stats(engine)
            assert after.total_instantiations == before.total_instantiations
            deltas.append(after.cache_hits - before.cache_hits)
        assert deltas[0] == deltas[1] > 0

    for d in range(1, 129):
        engine = fresh_engine()
        vec = engine.lookup("Vec")
        t = F64
        for _ in range(d - 1):
            t = InstantiationType(vec.id, vec.qualified_name, (t,))
        instantiate(engine, vec, [t])
        snap = stats(engine)
        assert snap.total_instantiations == d, f"vector depth {d}"
        # innermost -> outermost, strictly
        want = []
        name = "f64"
        for _ in range(d):
            name = f"Vec<{name}>"
            want.append(name)
        assert snap.order_log == want, f"vector depth {d}"
        before = stats(engine)
        instantiate(engine, vec, [t])
        after = stats(engine)
        assert after.total_instantiations == before.total_instantiations
        assert after.cache_hits == before.cache_hits + 1
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0, f"instantiation sweep took {elapsed:.1f}s"
    print(f"\nPASS: instantiation counting (tuple 1..64, vector 1..128, {elapsed:.1f}s)")


def test_typing_purity():
    """Typing the whole corpus invokes no user code."""
    engine = fresh_engine()
    for case in CASE_NAMES:
        type_kernel(engine, case_kernel(case), [ARR2D])
    assert engine.counters.invocations == 0
    print("\nPASS: typing purity (invocation counter 0 after full-corpus typing)")


def _sweep_engine():
    engine = fresh_engine()
    instantiate(engine, engine.lookup("Tuple"), [F64])
    instantiate(engine, engine.lookup("add42"), [F64])
    return engine


def test_reflection_contract():
    """Exhaustive kind x format sweep matches the checked-in golden file and
    STRING/HANDLE coherence holds on every type-valued reply."""
    engine = _sweep_engine()
    want = json.loads(golden_path("reflex_sweep.json").read_text())
    got = {}
    coherent = 0
    for ent in engine.all_entities():
        for kind in ReflexKind:
            for fmt in ReflexFormat:
                index = 0 if kind is ReflexKind.OVERLOAD_AT else None
                key = f"{ent.id}|{ent.qualified_name}|{kind.name}|{fmt.name}"
                try:
                    reply = cpp_reflex(engine, ent, kind, fmt, index=index)
                    got[key] = {"payload": reply.payload, "value": encode_reflex_reply(reply)}
                except EngineError as exc:
                    got[key] = {"error": exc.code}
        for kind in (ReflexKind.TYPE, ReflexKind.RETURN_TYPE):
            try:
                h = cpp_reflex(engine, ent, kind, ReflexFormat.HANDLE)
                s = cpp_reflex(engine, ent, kind, ReflexFormat.STRING)
            except EngineError:
                continue
            assert render_type(h.value) == s.value, (ent.qualified_name, kind)
            coherent += 1
    assert got == want
    assert coherent > 0
    print(f"\nPASS: reflection contract ({len(got)} sweep entries, {coherent} coherence pairs)")


def test_overload_resolution_oracle():
    """resolve_overload agrees with the independent brute-force ranker on
    every overload set, exhaustively up to arity 2 over the builtins."""
    from test_overload_oracle import run_comparison

    compared = run_comparison()
    assert compared > 300
    print(f"\nPASS: overload-resolution oracle ({compared} exhaustive comparisons)")
