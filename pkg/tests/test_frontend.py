import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopsum.frontend import ParseError, check, parse
from loopsum.oracle import Status, interpret
from loopsum.program import Assert, Decl, If, While, format_expr


def tags(src):
    ast, diags = check(src)
    assert ast is None
    return [(d.tag, d.line, d.column) for d in diags]


def test_inputs_and_body():
    ast = parse("// input x in [-5, 7]\n// input y in [0, 3]\nint s = 0;\nwhile (x < 10) { x += 2; }\n")
    assert [(d.name, d.lo, d.hi) for d in ast.inputs] == [("x", -5, 7), ("y", 0, 3)]
    assert isinstance(ast.body[0], Decl) and isinstance(ast.body[1], While)
    assert ast.variables()[:2] == ["x", "y"]


def test_if_else_and_assert():
    ast = parse("int x = 1;\nif (x > 0) { x = 2; } else { x = 3; }\nassert(x == 2);\n")
    assert isinstance(ast.body[1], If)
    assert isinstance(ast.body[2], Assert)
    assert (ast.body[2].line, ast.body[2].column) == (3, 1)


@pytest.mark.parametrize("src, tag", [
    ("float y = 1;", "REAL_TYPE"),
    ("int *p = malloc(4);", "MEMORY_OP"),
    ("// input x in [0,5]\nint y = x / x;", "DIV_BY_VAR"),
    ("y = 3;", "UNDECLARED_VAR"),
    ("int x = 1 +;", "SYNTAX_ERROR"),
    ("int x = 5 / 0;", "UNSUPPORTED_EXPR"),
])
def test_rejections_carry_tags(src, tag):
    assert tag in [t for t, _, _ in tags(src)]


def test_diagnostic_position():
    assert tags("int x = 1;\nint y = x +;\n") == [("SYNTAX_ERROR", 2, 12)]


def test_parse_raises_with_diagnostics():
    with pytest.raises(ParseError) as info:
        parse("while (")
    assert info.value.diagnostics


def test_compound_assignment_matches_expanded_form():
    a = parse("// input x in [-9, 9]\nx += 3; x -= 1; x *= 2;")
    b = parse("// input x in [-9, 9]\nx = x + 3; x = x - 1; x = x * 2;")
    for x in range(-9, 10):
        assert interpret(a, {"x": x}).values == interpret(b, {"x": x}).values


# -- printed expressions parse back to the same value --------------------------------------

def _ref(e, env):
    op = e[0]
    if op == "num":
        return e[1]
    if op == "var":
        return env[e[1]]
    a = _ref(e[1], env)
    if op == "/":
        return a // e[2]
    if op == "%":
        return a % e[2]
    b = _ref(e[2], env)
    return {"+": a + b, "-": a - b, "*": a * b}[op]


def _src(e):
    op = e[0]
    if op == "num":
        return f"({e[1]})" if e[1] < 0 else str(e[1])
    if op == "var":
        return e[1]
    right = _src(e[2]) if op not in ("/", "%") else (f"({e[2]})" if e[2] < 0 else str(e[2]))
    return f"({_src(e[1])} {op} {right})"


leaf = st.one_of(st.tuples(st.just("num"), st.integers(-20, 20)),
                 st.tuples(st.just("var"), st.sampled_from(["x", "y"])))
exprs = st.recursive(
    leaf,
    lambda sub: st.one_of(
        st.tuples(st.sampled_from(["+", "-", "*"]), sub, sub),
        st.tuples(st.sampled_from(["/", "%"]), sub, st.integers(1, 7).flatmap(
            lambda k: st.sampled_from([k, -k])))),
    max_leaves=8)


@settings(max_examples=200, deadline=None)
@given(exprs, st.integers(-50, 50), st.integers(-50, 50))
def test_expression_semantics_floor_division(e, x, y):
    src = f"// input x in [-50, 50]\n// input y in [-50, 50]\nint r = {_src(e)};\n"
    ast = parse(src)
    st_ = interpret(ast, {"x": x, "y": y})
    assert st_.status == Status.DONE
    assert st_.values["r"] == _ref(e, {"x": x, "y": y})
    # the pretty-printer round-trips
    again = parse(f"// input x in [-50, 50]\n// input y in [-50, 50]\nint r = {format_expr(ast.body[0].init)};\n")
    assert interpret(again, {"x": x, "y": y}).values == st_.values
