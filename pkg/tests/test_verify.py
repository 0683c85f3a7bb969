import itertools

import pytest

from helpers import VERIFY_CASES, nondet_loop_lines
from loopsum.frontend import parse, parse_file
from loopsum.oracle import ScriptedNondet, Status, interpret
from loopsum.pipeline import Options
from loopsum.summarize.model import FAILURE_REASONS
from loopsum.verify import HOLDS, UNKNOWN, VIOLATED, rewrite_nondet_loops, verify

H, V, U = HOLDS, VIOLATED, UNKNOWN

# verdicts confirmed by exhaustive execution when they were frozen
EXPECTED = {
    "after_false": [H, V, V],
    "break_after": [H, V],
    "count_steps": [H, V, H],
    "custom4_after": [H, H, V],
    "fig1c_in_loop": [V, H],
    "fig3_after": [H, V],
    "fig5a_after": [H, V, V],
    "geometric_in_loop": [H, H],
    "in_loop_bound": [H],
    "in_loop_skip": [V],
    "nested_after": [H, H],
    "nondet_counter": [H, V],
    "reset_in_loop": [U],
    "sequential_loops": [H, H, V],
    "straight_line": [H, H, V],
    "two_asserts_order": [V, H],
}


def replay(ast, witness):
    loops = {int(k): n for k, n in witness.get("nondet_loops", {}).items()}
    return interpret(ast, witness["inputs"], nondet=ScriptedNondet(witness.get("nondet", []), loops))


def test_every_case_is_listed():
    assert sorted(p.stem for p in VERIFY_CASES.glob("*.wl")) == sorted(EXPECTED)


@pytest.mark.parametrize("name", sorted(EXPECTED))
def test_verdicts(name):
    ast = parse_file(str(VERIFY_CASES / f"{name}.wl"))
    verdicts = verify(ast)
    assert [v.status for v in verdicts] == EXPECTED[name]
    assert [(v.line, v.column) for v in verdicts] == sorted((v.line, v.column) for v in verdicts)
    for v in verdicts:
        if v.status == VIOLATED:
            st = replay(ast, v.witness)
            assert st.status == Status.ASSERT_FAILED and st.location == (v.line, v.column)
        elif v.status == UNKNOWN:
            assert v.reason in FAILURE_REASONS and v.witness is None


def test_no_assertions():
    assert verify(parse("// input x in [0, 3]\nwhile (x < 5) { x = x + 1; }\n")) == []


def test_assertion_in_inner_loop_is_unknown():
    src = ("// input x in [0, 3]\nint i = 0;\nwhile (i < 3) { i = i + 1; int j = 0; "
           "while (j < x) { j = j + 1;\n assert(j < 10); } }\n")
    (v,) = verify(parse(src))
    assert v.status == UNKNOWN and v.where == "loop" and v.reason


def test_large_domain_decided_by_solver():
    # far more inputs than exhaustive evaluation covers
    src = "// input x in [-1000000, 1000000]\nwhile (x < 0) { x = x + 3; }\nassert(x >= 0);\nassert(x <= 999999);\n"
    a, b = verify(parse(src))
    assert a.status == HOLDS
    assert b.status == VIOLATED and replay(parse(src), b.witness).status == Status.ASSERT_FAILED


def test_summarization_failure_gives_typed_unknown():
    (v,) = verify(parse_file(str(VERIFY_CASES / "count_steps.wl")), Options(max_cases=1))[:1]
    assert v.status == UNKNOWN and v.reason == "CASE_EXPLOSION"


def test_nondet_rewrite_preserves_runs():
    ast = parse_file(str(VERIFY_CASES / "nondet_counter.wl"))
    rewritten = rewrite_nondet_loops(ast)
    assert not nondet_loop_lines(rewritten)
    (line,) = nondet_loop_lines(ast)
    for x, n in itertools.product(range(0, 51, 7), range(0, 40, 3)):
        a = interpret(ast, {"x": x}, nondet=ScriptedNondet([], {line: n}))
        b = interpret(rewritten, {"x": x}, nondet=ScriptedNondet([n]))
        assert a.status == b.status and a.location == b.location
        assert {k: b.values[k] for k in a.values} == a.values


def test_rewrite_leaves_plain_programs_alone():
    ast = parse("// input x in [0, 3]\nwhile (x < 5) { x = x + 1; }\n")
    assert rewrite_nondet_loops(ast) is ast


def test_json_shape():
    ast = parse_file(str(VERIFY_CASES / "nondet_counter.wl"))
    held, broken = (v.to_json() for v in verify(ast))
    assert held == {"line": 7, "column": 1, "assertion": "x - n >= 0", "where": "top", "status": "HOLDS"}
    assert broken["witness"]["nondet_loops"] == {"3": 30}
