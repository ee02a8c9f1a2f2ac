#!/usr/bin/env python3
"""Regenerate the checked-in golden files (reflection sweep, IR dumps, and
wire transcripts). Output is deterministic; review diffs before committing.

    python3 tools/make_goldens.py
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from reflexbridge.errors import EngineError
from reflexbridge.fixtures import case_kernel, fresh_engine
from reflexbridge.lowerer import dump_ir, lower
from reflexbridge.protocol import dumps, encode_reflex_reply
from reflexbridge.reflex import ReflexFormat, ReflexKind, cpp_reflex
from reflexbridge.server import Session
from reflexbridge.specializer import instantiate, type_kernel
from reflexbridge.types import ARR2D, F64

GOLDEN = ROOT / "tests" / "golden"


def sweep_engine():
    """Corpus plus one class and one function instantiation, so every
    entity kind is represented."""
    engine = fresh_engine()
    instantiate(engine, engine.lookup("Tuple"), [F64])
    instantiate(engine, engine.lookup("add42"), [F64])
    return engine


def make_reflex_sweep() -> None:
    engine = sweep_engine()
    out = {}
    for ent in engine.all_entities():
        for kind in ReflexKind:
            for fmt in ReflexFormat:
                index = 0 if kind is ReflexKind.OVERLOAD_AT else None
                key = f"{ent.id}|{ent.qualified_name}|{kind.name}|{fmt.name}"
                try:
                    reply = cpp_reflex(engine, ent, kind, fmt, index=index)
                    out[key] = {"payload": reply.payload, "value": encode_reflex_reply(reply)}
                except EngineError as exc:
                    out[key] = {"error": exc.code}
    path = GOLDEN / "reflex_sweep.json"
    path.write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
    print(f"wrote {path} ({len(out)} entries)")


def make_ir_dump() -> None:
    engine = fresh_engine()
    k = case_kernel("methods")
    ir = lower(engine, type_kernel(engine, k, [ARR2D]))
    path = GOLDEN / "ir_methods.txt"
    path.write_text(dump_ir(ir))
    print(f"wrote {path}")


MINI_DECLS = "template<class T>\nT add42(T t) {\n    return T(t + 42);\n}\nstruct S { double x = 1.5; double get() { return x; } };"
TRACE_KERNEL = (
    "kernel trace(a: arr2d) -> f64 { let t = 0.0;"
    " for i in 0..rows(a) { t += add42(a[i, i]) + add42(i64(a[i, i])); } return t; }"
)


def transcript_requests() -> dict[str, list[dict]]:
    """Each transcript is self-contained against a fresh session."""
    declare = {"id": 1, "op": "declare", "source": MINI_DECLS}
    declare_kernel = {"id": 2, "op": "declare", "lang": "kernel", "source": TRACE_KERNEL}
    return {
        "declare": [
            declare,
            {"id": 2, "op": "declare", "lang": "kernel", "source": "kernel one() -> f64 { return 1.0; }"},
        ],
        "reflect": [
            declare,
            {"id": 2, "op": "reflect", "entity": "add42", "kind": "IS_TEMPLATE", "format": "STRING"},
            {"id": 3, "op": "reflect", "entity": "S", "kind": "TYPE", "format": "STRING"},
            {"id": 4, "op": "reflect", "entity": "S::get", "kind": "RETURN_TYPE", "format": "OPTIMAL"},
            {"id": 5, "op": "reflect", "entity": "nope", "kind": "TYPE", "format": "STRING"},
        ],
        "list_members": [
            declare,
            {"id": 2, "op": "list_members", "entity": "S"},
        ],
        "invoke": [
            declare,
            {"id": 2, "op": "invoke", "target": "add42", "args": [{"t": "f64", "v": 0.0}]},
            {"id": 3, "op": "invoke", "target": "add42", "args": [{"t": "i64", "v": 0}]},
            {"id": 4, "op": "invoke", "target": "add42", "targs": ["f64"], "args": [{"t": "f64", "v": 1.5}]},
        ],
        "run_kernel": [
            declare,
            declare_kernel,
            {"id": 3, "op": "run_kernel", "kernel": "trace",
             "args": [{"t": "arr2d", "rows": 4, "cols": 4, "gen": "zeros"}]},
            {"id": 4, "op": "run_kernel", "kernel": "trace",
             "args": [{"t": "arr2d", "rows": 4, "cols": 4, "gen": "ones"}]},
        ],
        "jit_kernel": [
            declare,
            declare_kernel,
            {"id": 3, "op": "jit_kernel", "kernel": "trace",
             "args": [{"t": "arr2d", "rows": 4, "cols": 4, "gen": "zeros"}]},
            {"id": 4, "op": "jit_kernel", "kernel": "trace",
             "args": [{"t": "arr2d", "rows": 4, "cols": 4, "gen": "random", "seed": 7}]},
        ],
        "stats": [
            declare,
            declare_kernel,
            {"id": 3, "op": "jit_kernel", "kernel": "trace",
             "args": [{"t": "arr2d", "rows": 2, "cols": 2, "gen": "zeros"}]},
            {"id": 4, "op": "stats"},
        ],
        "shutdown": [
            {"id": 1, "op": "shutdown"},
        ],
    }


def make_transcripts() -> None:
    tdir = GOLDEN / "transcripts"
    tdir.mkdir(parents=True, exist_ok=True)
    for name, requests in transcript_requests().items():
        session = Session()
        lines = []
        for req in requests:
            line = dumps(req)
            reply, _ = session.handle_line(line)
            lines.append(line)
            lines.append(reply)
        path = tdir / f"{name}.txt"
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    make_reflex_sweep()
    make_ir_dump()
    make_transcripts()
