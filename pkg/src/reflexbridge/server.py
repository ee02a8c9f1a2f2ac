"""Serve mode: a strictly serial request loop over stdio or TCP.

One engine per session; requests are processed in arrival order and every
request produces exactly one reply line. The loop ends cleanly on
end-of-stream or a shutdown request.
"""

from __future__ import annotations

import json
from typing import Optional

from .boxed import unbox
from .dyn_runtime import dyn_call, run_kernel_dynamic
from .entities import Engine
from .errors import EngineError, NotFound
from .fixtures import CORPUS_DECLS
from .kernel_parser import parse_kernel_file
from .lowerer import execute, lower
from .nodes import KernelDef
from .protocol import (
    decode_value,
    encode_reflex_reply,
    encode_value,
    error_reply,
    ok_reply,
    parse_format,
    parse_kind,
)
from .reflex import cpp_reflex, list_members
from .specializer import stats, type_kernel
from .boxed import BoxedValue


class Session:
    """Protocol state for one connection."""

    def __init__(self, engine: Optional[Engine] = None, preload_corpus: bool = False):
        self.engine = engine or Engine()
        if preload_corpus:
            self.engine.declare(CORPUS_DECLS)
        self.kernels: dict[str, KernelDef] = {}
        self.ir_cache: dict[tuple, object] = {}

    # -- op handlers; each returns the reply `value` -------------------------

    def op_declare(self, req: dict):
        source = req.get("source")
        if not isinstance(source, str):
            raise EngineError("declare needs a 'source' string")
        if req.get("lang", "cpp") == "kernel":
            kernels = parse_kernel_file(source)
            for k in kernels:
                self.kernels[k.name] = k
            return {"kernels": [k.name for k in kernels]}
        entities = self.engine.declare(source)
        return {"declared": [e.qualified_name for e in entities]}

    def op_reflect(self, req: dict):
        target = self.engine.lookup(_required(req, "entity"))
        kind = parse_kind(_required(req, "kind"))
        fmt = parse_format(req.get("format", "OPTIMAL"))
        reply = cpp_reflex(self.engine, target, kind, fmt, index=req.get("index"))
        return encode_reflex_reply(reply)

    def op_list_members(self, req: dict):
        target = self.engine.lookup(_required(req, "entity"))
        return [[name, eid] for name, eid in list_members(self.engine, target)]

    def op_invoke(self, req: dict):
        target = self.engine.lookup(_required(req, "target"))
        args = [decode_value(a) for a in req.get("args", [])]
        targs = req.get("targs")
        explicit = (
            tuple(self.engine.parse_type(t) for t in targs) if targs is not None else None
        )
        return encode_value(dyn_call(self.engine, target, args, explicit))

    def _kernel_and_args(self, req: dict):
        name = _required(req, "kernel")
        kernel = self.kernels.get(name)
        if kernel is None:
            raise NotFound(name)
        args = [decode_value(a) for a in req.get("args", [])]
        reps = int(req.get("reps", 1))
        if reps < 1:
            raise EngineError("reps must be >= 1")
        return kernel, args, reps

    def op_run_kernel(self, req: dict):
        kernel, args, reps = self._kernel_and_args(req)
        for _ in range(reps):
            result = run_kernel_dynamic(self.engine, kernel, args)
        return encode_value(result)

    def op_jit_kernel(self, req: dict):
        kernel, args, reps = self._kernel_and_args(req)
        param_types = [t for _, t in kernel.params]
        key = (kernel.name, tuple(param_types))
        ir = self.ir_cache.get(key)
        if ir is None:
            tk = type_kernel(self.engine, kernel, param_types)
            ir = lower(self.engine, tk)
            self.ir_cache[key] = ir
        native = [unbox(b, t) for b, t in zip(args, param_types)]
        for _ in range(reps):
            value = execute(self.engine, ir, native)
        return encode_value(BoxedValue(kernel.return_type, value))

    def op_stats(self, req: dict):
        snap = stats(self.engine, reset=bool(req.get("reset", False)))
        per_template = {
            self.engine.entity(tid).qualified_name: n for tid, n in snap.per_template.items()
        }
        return {
            "total_instantiations": snap.total_instantiations,
            "cache_hits": snap.cache_hits,
            "node_count": snap.node_count,
            "per_template": per_template,
            "order_log": snap.order_log,
        }

    def op_shutdown(self, req: dict):
        return "bye"

    # -- dispatch ---------------------------------------------------------------

    def handle_line(self, line: str) -> tuple[str, bool]:
        """Process one request line; returns (reply line, keep_going)."""
        rid = None
        try:
            req = json.loads(line)
            if not isinstance(req, dict):
                raise ValueError("request must be an object")
            rid = req.get("id")
            op = req.get("op")
            handler = getattr(self, f"op_{op}", None) if isinstance(op, str) else None
            if handler is None:
                return error_reply(rid, "unknown op", "UnknownOp"), True
            value = handler(req)
            return ok_reply(rid, value), op != "shutdown"
        except EngineError as exc:
            return error_reply(rid, str(exc), exc.code), True
        except (ValueError, KeyError, TypeError) as exc:
            return error_reply(rid, f"malformed request: {exc}", "MalformedRequest"), True


def _required(req: dict, field: str):
    v = req.get(field)
    if not isinstance(v, str):
        raise EngineError(f"request needs a {field!r} string")
    return v


def serve_streams(infile, outfile, engine: Optional[Engine] = None, preload_corpus: bool = False) -> None:
    """Run the request loop until end-of-stream or shutdown."""
    session = Session(engine, preload_corpus=preload_corpus)
    for line in infile:
        line = line.strip()
        if not line:
            continue
        reply, keep_going = session.handle_line(line)
        outfile.write(reply + "\n")
        outfile.flush()
        if not keep_going:
            break


def serve_stdio(preload_corpus: bool = False) -> None:
    import sys

    serve_streams(sys.stdin, sys.stdout, preload_corpus=preload_corpus)


def serve_tcp(port: int, preload_corpus: bool = False, announce=None, once: bool = False) -> None:
    """Accept connections one at a time, a fresh engine per connection."""
    import socket

    srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    srv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    srv.bind(("127.0.0.1", port))
    srv.listen(1)
    bound = srv.getsockname()[1]
    if announce is not None:
        announce(bound)
    try:
        while True:
            conn, _ = srv.accept()
            with conn:
                rfile = conn.makefile("r", encoding="utf-8")
                wfile = conn.makefile("w", encoding="utf-8")
                try:
                    serve_streams(rfile, wfile, preload_corpus=preload_corpus)
                except (BrokenPipeError, ConnectionResetError):
                    pass  # transport loss ends the loop cleanly
            if once:
                break
    finally:
        srv.close()
