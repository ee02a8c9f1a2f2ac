"""reflexbridge: lazy, reflection-driven binding specialization.

One set of bound declarations, two call paths: a boxed dynamic path that
re-resolves every call, and a trace-typed path that binds each call site
once and runs on an unboxed register machine. A request/reply reflection
API, a memoizing template instantiator, a benchmark harness, and a
line-delimited wire protocol sit on top.
"""

from .boxed import Array2D, BoxedValue, box, unbox
from .dyn_runtime import dyn_call, run_kernel_dynamic
from .entities import Engine, Entity, EntityKind, InstantiationStats
from .errors import EngineError
from .kernel_parser import parse_kernel, parse_kernel_file
from .lowerer import dump_ir, execute, lower, verify
from .reflex import ReflexFormat, ReflexKind, ReflexReply, cpp_reflex, list_members
from .specializer import (
    CallSignature,
    deduce,
    instantiate,
    resolve_overload,
    stats,
    type_kernel,
)
from .types import render_type, type_equal

__version__ = "0.1.0"

__all__ = [
    "Array2D",
    "BoxedValue",
    "CallSignature",
    "Engine",
    "EngineError",
    "Entity",
    "EntityKind",
    "InstantiationStats",
    "ReflexFormat",
    "ReflexKind",
    "ReflexReply",
    "box",
    "cpp_reflex",
    "deduce",
    "dump_ir",
    "dyn_call",
    "execute",
    "instantiate",
    "list_members",
    "lower",
    "parse_kernel",
    "parse_kernel_file",
    "render_type",
    "resolve_overload",
    "run_kernel_dynamic",
    "stats",
    "type_equal",
    "type_kernel",
    "unbox",
    "verify",
]
