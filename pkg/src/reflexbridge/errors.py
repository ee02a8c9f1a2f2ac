"""Engine error taxonomy.

Every error carries a stable ``code`` (its class name by default) which is
what crosses the wire protocol; user-facing messages may vary freely.
"""

from __future__ import annotations


class EngineError(Exception):
    @property
    def code(self) -> str:
        return type(self).__name__


class NotFound(EngineError):
    def __init__(self, name: str):
        super().__init__(f"no entity named {name!r}")
        self.name = name


class Redefinition(EngineError):
    def __init__(self, qualified_name: str):
        super().__init__(f"redefinition of {qualified_name!r}")
        self.qualified_name = qualified_name


class ParseError(EngineError):
    """Syntax error with a source position; span lies within the input."""

    def __init__(self, span, message: str):
        super().__init__(f"{span}: {message}")
        self.span = span
        self.reason = message

    @property
    def code(self) -> str:
        return "SyntaxError"


class UnsupportedConstruct(ParseError):
    @property
    def code(self) -> str:
        return "UnsupportedConstruct"


class UndeclaredLocal(EngineError):
    def __init__(self, name: str, span=None):
        super().__init__(f"use of undeclared local {name!r}")
        self.name = name
        self.span = span


class KindMismatch(EngineError):
    def __init__(self, kind, entity_kind):
        super().__init__(f"reflection kind {kind} is meaningless for {entity_kind}")
        self.kind = kind
        self.entity_kind = entity_kind


class IndexOutOfRange(EngineError):
    pass


class TagMismatch(EngineError):
    def __init__(self, expected, actual):
        super().__init__(f"cannot unbox {actual} as {expected}")
        self.expected = expected
        self.actual = actual


class NoViableOverload(EngineError):
    def __init__(self, name: str, arg_types):
        from .types import render_type

        rendered = ", ".join(render_type(t) for t in arg_types)
        super().__init__(f"no viable overload of {name!r} for ({rendered})")
        self.name = name
        self.arg_types = tuple(arg_types)


class AmbiguousOverload(EngineError):
    def __init__(self, name: str, candidates):
        super().__init__(f"ambiguous call to {name!r}: {len(candidates)} candidates tie")
        self.name = name
        self.candidates = list(candidates)


class DeductionFailure(EngineError):
    pass


class ArityMismatch(EngineError):
    pass


class SubstitutionFailure(EngineError):
    pass


class KernelTypeError(EngineError):
    """Typing failure; wraps the underlying resolution errors with spans."""

    def __init__(self, message: str, span=None, causes=None):
        super().__init__(message)
        self.span = span
        self.causes = list(causes or [])

    @property
    def code(self) -> str:
        # Surface the root cause so both execution paths report the same
        # structured error class for the same defect.
        if self.causes:
            c = self.causes[0]
            return c.code if isinstance(c, EngineError) else "TypeError"
        return "TypeError"


class LoweringError(EngineError):
    """Internal invariant breach in the lowerer; a bug, not user error."""


class VerifyError(LoweringError):
    pass


class EvalError(EngineError):
    pass


class IndexOutOfBounds(EvalError):
    def __init__(self, i: int, j: int, dims):
        super().__init__(f"index ({i}, {j}) out of bounds for {dims[0]}x{dims[1]}")
        self.i = i
        self.j = j
        self.dims = dims


class ChecksumMismatch(EngineError):
    def __init__(self, case: str, hot, dynamic):
        super().__init__(f"{case}: paths disagree (hot={hot!r}, dynamic={dynamic!r})")
        self.case = case
        self.hot = hot
        self.dynamic = dynamic


class UnknownCase(EngineError):
    pass


#: Errors that indicate a broken engine rather than bad user input; the CLI
#: maps these to exit code 2.
INTERNAL_ERRORS = (LoweringError, ChecksumMismatch)
