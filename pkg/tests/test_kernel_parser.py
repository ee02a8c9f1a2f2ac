from __future__ import annotations

import pytest

from reflexbridge import nodes as N
from reflexbridge.errors import ParseError, UndeclaredLocal
from reflexbridge.fixtures import kernel_source
from reflexbridge.kernel_parser import parse_kernel, parse_kernel_file
from reflexbridge.types import ARR2D, F64, I64


def test_trace_kernel_shape():
    k = parse_kernel(kernel_source("templated-fns"))
    assert k.name == "templated_fns"
    assert k.params == [("a", ARR2D)]
    assert k.return_type == F64
    calls = [n for n in N.walk_stmts(k.body) if isinstance(n, N.Call)]
    assert len(calls) == 2
    loops = [n for n in N.walk_stmts(k.body) if isinstance(n, N.ForRange)]
    assert len(loops) == 1
    assert isinstance(k.body[-1], N.ReturnStmt)


def test_trivial_kernel():
    k = parse_kernel("kernel k() -> f64 { return 1.0; }")
    assert k.params == []
    assert isinstance(k.body[0], N.ReturnStmt)
    assert isinstance(k.body[0].value, N.Lit)


def test_construct_and_member_read():
    src = """
kernel mem() -> f64 {
    S s;
    let total = 0.0;
    for i in 0..100 {
        total += s.x;
    }
    return total;
}
"""
    k = parse_kernel(src)
    constructs = [n for n in N.walk_stmts(k.body) if isinstance(n, N.Construct)]
    members = [n for n in N.walk_stmts(k.body) if isinstance(n, N.MemberRead)]
    assert len(constructs) == 1 and constructs[0].class_name == "S"
    assert len(members) == 1 and members[0].member == "x"


def test_explicit_template_args_parse():
    k = parse_kernel("kernel k() -> f64 { return add42<f64>(1.0); }")
    call = k.body[0].value
    assert isinstance(call, N.Call)
    assert call.explicit_targs == (F64,)


def test_node_ids_unique():
    k = parse_kernel(kernel_source("templated-fns"))
    ids = [n.node_id for n in N.walk_stmts(k.body)]
    assert len(ids) == len(set(ids))


def test_undeclared_local():
    with pytest.raises(UndeclaredLocal):
        parse_kernel("kernel k() -> f64 { return nope; }")
    with pytest.raises(UndeclaredLocal):
        parse_kernel("kernel k() -> f64 { let t = 0.0; for i in 0..rows(b) { t += 1.0; } return t; }")


def test_return_must_be_final():
    with pytest.raises(ParseError):
        parse_kernel("kernel k() -> f64 { return 1.0; let x = 2.0; return x; }")
    with pytest.raises(ParseError):
        parse_kernel("kernel k() -> f64 { let t = 0.0; for i in 0..3 { return t; } return t; }")
    with pytest.raises(ParseError):
        parse_kernel("kernel k() -> f64 { let x = 1.0; }")


def test_loop_bounds_restricted():
    with pytest.raises(ParseError):
        parse_kernel("kernel k() -> f64 { let t = 0.0; for i in 0..t { t += 1.0; } return t; }")
    with pytest.raises(ParseError):
        parse_kernel("kernel k(a: arr2d) -> f64 { let t = 0.0; for i in 1..rows(a) { t += 1.0; } return t; }")


def test_error_positions_inside_input():
    src = "kernel k() -> f64 {\n    return 1.0 +;\n}"
    try:
        parse_kernel(src)
        assert False
    except ParseError as exc:
        assert exc.span.line == 2


def test_redeclaration_rejected():
    with pytest.raises(ParseError):
        parse_kernel("kernel k() -> f64 { let x = 1.0; let x = 2.0; return x; }")


def test_several_kernels_per_file():
    ks = parse_kernel_file(
        "kernel a() -> f64 { return 1.0; }\nkernel b() -> i64 { return 2; }"
    )
    assert [k.name for k in ks] == ["a", "b"]
    with pytest.raises(ParseError):
        parse_kernel("kernel a() -> f64 { return 1.0; }\nkernel b() -> f64 { return 2.0; }")


def test_literal_suffixes():
    k = parse_kernel("kernel k() -> i64 { return 7i64; }")
    lit = k.body[0].value
    assert lit.type == I64 and lit.value == 7
    with pytest.raises(ParseError):
        parse_kernel("kernel k() -> i64 { return 1.5i64; }")
