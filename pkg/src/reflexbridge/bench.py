"""Benchmark harness: per-case two-path timing rows and the template
instantiation scaling workloads.

Timing method: monotonic clock, repetitions batched into groups of 30,
the reported per-iteration time is the median of group means. Correctness
gates performance — a row is only produced after both paths agree on the
checksum.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, fields
from statistics import median
from typing import Callable

from .boxed import Array2D, box
from .entities import Engine
from .errors import ChecksumMismatch, UnknownCase
from .fixtures import CASE_NAMES, case_kernel, fresh_engine
from .lowerer import execute, lower
from .dyn_runtime import run_kernel_dynamic
from .specializer import instantiate, stats, type_kernel
from .types import ARR2D, F64, InstantiationType

GROUP = 30


@dataclass
class BenchRow:
    case: str
    specialize_time: float  # one-shot typing incl. template instantiation
    lower_time: float  # one-shot lowering + callee compilation
    hot_run_time: float  # seconds per iteration, typed path
    dynamic_run_time: float  # seconds per iteration, boxed path
    speedup: float
    reps: int
    checksum: float


@dataclass
class ScalingRow:
    mode: str  # tuple-arity | vector-depth
    n: int
    instantiations: int
    node_count: int
    wall_time: float


def _timed_loop(fn: Callable[[], object], reps: int) -> float:
    group = min(GROUP, reps)
    means = []
    done = 0
    while done < reps:
        k = min(group, reps - done)
        t0 = time.perf_counter()
        for _ in range(k):
            fn()
        means.append((time.perf_counter() - t0) / k)
        done += k
    return median(means)


def bench_case(case: str, size: int = 100, reps: int = 3000) -> BenchRow:
    """Run one Table-style case on a fresh engine and time both paths."""
    if case not in CASE_NAMES:
        raise UnknownCase(f"unknown case {case!r}; expected one of {', '.join(CASE_NAMES)}")
    if size < 1 or reps < 1:
        raise UnknownCase("size and reps must be >= 1")
    engine = fresh_engine()
    kernel = case_kernel(case)
    arr = Array2D.zeros(size, size)
    boxed_args = [box(arr)]

    t0 = time.perf_counter()
    tk = type_kernel(engine, kernel, [ARR2D])
    specialize_time = time.perf_counter() - t0

    t0 = time.perf_counter()
    ir = lower(engine, tk)
    hot_value = execute(engine, ir, [arr])  # first run binds callee closures
    lower_time = time.perf_counter() - t0

    dyn_value = run_kernel_dynamic(engine, kernel, boxed_args).payload
    if hot_value != dyn_value:
        raise ChecksumMismatch(case, hot_value, dyn_value)

    hot = _timed_loop(lambda: execute(engine, ir, [arr]), reps)
    dynamic = _timed_loop(lambda: run_kernel_dynamic(engine, kernel, boxed_args), reps)
    return BenchRow(
        case=case,
        specialize_time=specialize_time,
        lower_time=lower_time,
        hot_run_time=hot,
        dynamic_run_time=dynamic,
        speedup=dynamic / hot,
        reps=reps,
        checksum=hot_value,
    )


def bench_table(size: int = 100, reps: int = 3000, cases=CASE_NAMES) -> list[BenchRow]:
    return [bench_case(c, size, reps) for c in cases]


# --- template scaling ----------------------------------------------------------


def _tuple_workload(engine: Engine, n: int) -> None:
    tmpl = engine.lookup("Tuple")
    instantiate(engine, tmpl, [F64] * n)


def _vector_workload(engine: Engine, n: int) -> None:
    tmpl = engine.lookup("Vec")
    t = F64
    for _ in range(n - 1):
        t = InstantiationType(tmpl.id, tmpl.qualified_name, (t,))
    instantiate(engine, tmpl, [t])


def bench_templates(mode: str, n_max: int, step: int = 1) -> list[ScalingRow]:
    """Instantiation scaling rows; every measurement on a fresh engine."""
    if mode not in ("tuple", "vector", "tuple-arity", "vector-depth"):
        raise UnknownCase(f"unknown templates mode {mode!r}")
    work = _tuple_workload if mode.startswith("tuple") else _vector_workload
    label = "tuple-arity" if mode.startswith("tuple") else "vector-depth"
    rows = []
    for n in range(1, n_max + 1, step):
        engine = fresh_engine()
        before = stats(engine)
        t0 = time.perf_counter()
        work(engine, n)
        wall = time.perf_counter() - t0
        after = stats(engine)
        rows.append(
            ScalingRow(
                mode=label,
                n=n,
                instantiations=after.total_instantiations - before.total_instantiations,
                node_count=after.node_count - before.node_count,
                wall_time=wall,
            )
        )
    return rows


# --- reporting -------------------------------------------------------------------


def _columns(rows) -> list[str]:
    return [f.name for f in fields(rows[0])]


def _cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def report(rows: list, format: str = "table") -> str:
    """Render rows; column order is fixed by the row dataclass."""
    if not rows:
        raise UnknownCase("no rows to report")
    cols = _columns(rows)
    if format == "table":
        grid = [cols] + [[_cell(getattr(r, c)) for c in cols] for r in rows]
        widths = [max(len(row[i]) for row in grid) for i in range(len(cols))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in grid]
        lines.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"
    if format == "csv":
        lines = [",".join(cols)]
        for r in rows:
            lines.append(",".join(_csv_cell(getattr(r, c)) for c in cols))
        return "\n".join(lines) + "\n"
    if format == "json-lines":
        import json

        lines = []
        for r in rows:
            lines.append(json.dumps({c: getattr(r, c) for c in cols}, sort_keys=True))
        return "\n".join(lines) + "\n"
    raise UnknownCase(f"unknown report format {format!r}")


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)
