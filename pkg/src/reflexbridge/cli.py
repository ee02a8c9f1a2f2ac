"""Command-line entry point.

    reflexbridge parse --decls decls.hxx [--print]
    reflexbridge run --decls decls.hxx --kernel k.krn --args "a=zeros(100,100)"
    reflexbridge jit-run ... [--dump-ir] [--emit-stats]
    reflexbridge bench table1 [--size N] [--reps R] [--format table|csv|json-lines]
    reflexbridge bench templates --mode tuple|vector --max N [--step S]
    reflexbridge serve [--stdio | --port P] [--corpus]

Exit codes: 0 success, 1 user error, 2 internal invariant failure.
"""

from __future__ import annotations

import argparse
import re
import sys

from .boxed import Array2D, BoxedValue, box
from .entities import Engine
from .errors import INTERNAL_ERRORS, EngineError
from .kernel_parser import parse_kernel_file
from .lowerer import dump_ir, execute, lower
from .dyn_runtime import run_kernel_dynamic
from .protocol import encode_value
from .specializer import stats, type_kernel
from .types import BOOL, BUILTINS, F64, I32

_ARRAY_SPEC = re.compile(r"^(zeros|ones|random)\((\d+),(\d+)(?:,(\d+))?\)$")
_SCALAR_SPEC = re.compile(r"^([-+]?[0-9][0-9.eE+-]*?)(i32|i64|f32|f64)?$")


def parse_arg_spec(spec: str) -> tuple[str, BoxedValue]:
    """name=zeros(R,C) | name=ones(R,C) | name=random(R,C,seed) | name=7i64
    | name=1.5 | name=true"""
    name, eq, rhs = spec.partition("=")
    if not eq or not name:
        raise EngineError(f"bad --args {spec!r}: expected name=value")
    rhs = rhs.strip()
    m = _ARRAY_SPEC.match(rhs)
    if m:
        gen, rows, cols, seed = m.group(1), int(m.group(2)), int(m.group(3)), m.group(4)
        if gen == "zeros":
            arr = Array2D.zeros(rows, cols)
        elif gen == "ones":
            arr = Array2D.ones(rows, cols)
        else:
            arr = Array2D.random(rows, cols, int(seed or 0))
        return name.strip(), box(arr)
    if rhs in ("true", "false"):
        return name.strip(), BoxedValue(BOOL, rhs == "true")
    m = _SCALAR_SPEC.match(rhs)
    if m:
        lit, suffix = m.group(1), m.group(2)
        if suffix in ("i32", "i64"):
            return name.strip(), BoxedValue(BUILTINS[suffix], int(lit))
        if suffix in ("f32", "f64"):
            return name.strip(), BoxedValue(BUILTINS[suffix], float(lit))
        if "." in lit or "e" in lit or "E" in lit:
            return name.strip(), BoxedValue(F64, float(lit))
        return name.strip(), BoxedValue(I32, int(lit))
    raise EngineError(f"bad --args {spec!r}")


def _load(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise EngineError(f"cannot read {path}: {exc}")


def _setup_kernel(args):
    engine = Engine()
    if args.decls:
        engine.declare(_load(args.decls))
    kernels = parse_kernel_file(_load(args.kernel))
    if args.name:
        match = [k for k in kernels if k.name == args.name]
        if not match:
            raise EngineError(f"no kernel named {args.name!r}")
        kernel = match[0]
    elif len(kernels) == 1:
        kernel = kernels[0]
    else:
        raise EngineError("file declares several kernels; pick one with --name")
    by_name = dict(parse_arg_spec(s) for s in args.args or [])
    boxed = []
    for pname, _ in kernel.params:
        if pname not in by_name:
            raise EngineError(f"missing --args value for kernel parameter {pname!r}")
        boxed.append(by_name[pname])
    return engine, kernel, boxed


def cmd_parse(args) -> int:
    from .decl_parser import print_decl

    engine = Engine()
    entities = engine.declare(_load(args.decls))
    if args.print:
        for ent in entities:
            print(print_decl(engine, ent))
    else:
        for ent in entities:
            print(f"{ent.kind.name} {ent.qualified_name}")
    return 0


def cmd_run(args) -> int:
    engine, kernel, boxed = _setup_kernel(args)
    result = None
    for _ in range(args.reps):
        result = run_kernel_dynamic(engine, kernel, boxed)
    print(json_line(encode_value(result)))
    return 0


def cmd_jit_run(args) -> int:
    from .boxed import unbox

    engine, kernel, boxed = _setup_kernel(args)
    param_types = [t for _, t in kernel.params]
    tk = type_kernel(engine, kernel, param_types)
    ir = lower(engine, tk)
    if args.dump_ir:
        sys.stdout.write(dump_ir(ir))
    native = [unbox(b, t) for b, t in zip(boxed, param_types)]
    value = None
    for _ in range(args.reps):
        value = execute(engine, ir, native)
    print(json_line(encode_value(BoxedValue(kernel.return_type, value))))
    if args.emit_stats:
        snap = stats(engine)
        per = {engine.entity(t).qualified_name: n for t, n in snap.per_template.items()}
        print(
            json_line(
                {
                    "total_instantiations": snap.total_instantiations,
                    "cache_hits": snap.cache_hits,
                    "node_count": snap.node_count,
                    "per_template": per,
                    "order_log": snap.order_log,
                }
            ),
            file=sys.stderr,
        )
    return 0


def json_line(obj) -> str:
    from .protocol import dumps

    return dumps(obj)


def cmd_bench(args) -> int:
    from .bench import bench_table, bench_templates, report

    if args.bench_cmd == "table1":
        rows = bench_table(size=args.size, reps=args.reps)
        sys.stdout.write(report(rows, args.format))
        from .fixtures import REFERENCE_SPEEDUPS

        # reported for side-by-side comparison only; absolute machine times
        # are not reproducible and never asserted
        ref = ", ".join(f"{c}={v}x" for c, v in REFERENCE_SPEEDUPS.items())
        print(f"reference speedups (original hardware): {ref}", file=sys.stderr)
    else:
        rows = bench_templates(args.mode, args.max, args.step)
        sys.stdout.write(report(rows, args.format))
    return 0


def cmd_serve(args) -> int:
    from .server import serve_stdio, serve_tcp

    if args.port is not None:
        serve_tcp(
            args.port,
            preload_corpus=args.corpus,
            announce=lambda p: print(f"listening on {p}", file=sys.stderr, flush=True),
        )
    else:
        serve_stdio(preload_corpus=args.corpus)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reflexbridge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("parse", help="parse declarations and list entities")
    sp.add_argument("--decls", required=True)
    sp.add_argument("--print", action="store_true", help="echo round-trippable declarations")
    sp.set_defaults(fn=cmd_parse)

    for name, fn in (("run", cmd_run), ("jit-run", cmd_jit_run)):
        sp = sub.add_parser(name, help=f"{name} a kernel")
        sp.add_argument("--decls")
        sp.add_argument("--kernel", required=True)
        sp.add_argument("--name", help="kernel name when the file has several")
        sp.add_argument("--args", action="append", metavar="SPEC")
        sp.add_argument("--reps", type=int, default=1)
        if name == "jit-run":
            sp.add_argument("--dump-ir", action="store_true")
            sp.add_argument("--emit-stats", action="store_true")
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("bench", help="benchmarks")
    bsub = sp.add_subparsers(dest="bench_cmd", required=True)
    bt = bsub.add_parser("table1", help="five-case two-path timing table")
    bt.add_argument("--size", type=int, default=100)
    bt.add_argument("--reps", type=int, default=3000)
    bt.add_argument("--format", choices=("table", "csv", "json-lines"), default="table")
    bt.set_defaults(fn=cmd_bench)
    bm = bsub.add_parser("templates", help="instantiation scaling")
    bm.add_argument("--mode", choices=("tuple", "vector"), required=True)
    bm.add_argument("--max", type=int, required=True)
    bm.add_argument("--step", type=int, default=1)
    bm.add_argument("--format", choices=("table", "csv", "json-lines"), default="table")
    bm.set_defaults(fn=cmd_bench)

    sp = sub.add_parser("serve", help="line-delimited request/reply loop")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--stdio", action="store_true", default=True)
    group.add_argument("--port", type=int)
    sp.add_argument("--corpus", action="store_true", help="preload the fixture corpus")
    sp.set_defaults(fn=cmd_serve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except INTERNAL_ERRORS as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 2
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    raise SystemExit(main())
