"""Benchmark fixture corpus: declarations and kernels for the five cases,
plus the templates used by the instantiation-scaling workloads.

Every case runs the same shape of kernel — accumulate over the rows of a
2-D array — with only the accumulated expression varying.
"""

from __future__ import annotations

from .entities import Engine
from .kernel_parser import parse_kernel
from .nodes import KernelDef

CORPUS_DECLS = """\
double fortytwo() { return 42.0; }

double scale(double x) { return x * 2.0; }
long scale(long x) { return x * 3; }

template<class T>
T add42(T t) {
    return T(t + 42);
}

struct MyClass {
    double x = 1.5;
    double get() { return x; }
};

namespace util {
    double half(double v) { return v / 2.0; }
}

template<class T> struct Vec { T data; };

template<class... Ts> struct Tuple;
template<class T, class... Rest> struct Tuple<T, Rest...> { T head; Tuple<Rest...> tail; };
template<> struct Tuple<> { };
"""

_KERNELS = {
    "fn-no-args": """\
kernel fn_no_args(a: arr2d) -> f64 {
    let trace = 0.0;
    for i in 0..rows(a) {
        trace += fortytwo() + a[i, i];
    }
    return trace;
}
""",
    "overloaded-fns": """\
kernel overloaded_fns(a: arr2d) -> f64 {
    let trace = 0.0;
    for i in 0..rows(a) {
        trace += scale(a[i, i]) + scale(i64(a[i, i]));
    }
    return trace;
}
""",
    "templated-fns": """\
kernel templated_fns(a: arr2d) -> f64 {
    let trace = 0.0;
    for i in 0..rows(a) {
        trace += add42(a[i, i]) + add42(i64(a[i, i]));
    }
    return trace;
}
""",
    "data-members": """\
kernel data_members(a: arr2d) -> f64 {
    MyClass s;
    let trace = 0.0;
    for i in 0..rows(a) {
        trace += s.x + a[i, i];
    }
    return trace;
}
""",
    "methods": """\
kernel methods(a: arr2d) -> f64 {
    MyClass s;
    let trace = 0.0;
    for i in 0..rows(a) {
        trace += s.get() + a[i, i];
    }
    return trace;
}
""",
}

CASE_NAMES = tuple(_KERNELS)

#: The paper's reported speedups, for side-by-side display only — absolute
#: machine times are not reproducible and never asserted.
REFERENCE_SPEEDUPS = {
    "fn-no-args": 4.84,
    "overloaded-fns": 7.70,
    "templated-fns": 20.66,
    "data-members": 3.10,
    "methods": 2.36,
}


def fresh_engine() -> Engine:
    """A new engine with the full corpus declared."""
    engine = Engine()
    engine.declare(CORPUS_DECLS)
    return engine


def case_kernel(case: str) -> KernelDef:
    from .errors import UnknownCase

    try:
        source = _KERNELS[case]
    except KeyError:
        raise UnknownCase(f"unknown case {case!r}; expected one of {', '.join(CASE_NAMES)}")
    return parse_kernel(source)


def kernel_source(case: str) -> str:
    return _KERNELS[case]
