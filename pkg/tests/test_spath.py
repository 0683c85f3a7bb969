import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import corpus_ast, solver
from loopsum.cfg import build_cfg, canonical_program, canonicalize
from loopsum.frontend import parse
from loopsum.oracle import interpret
from loopsum.program import While
from loopsum.spath import (
    PathExplosionError,
    compute_cond_op,
    dump_spaths,
    enumerate_spaths,
    loop_paths_from_stmt,
    path_name,
    prune_invalid,
)
from loopsum.symexpr import bevaluate, pre
from progs import HEADER, VARS, loop_bodies


def paths_of(src):
    ast = parse(src)
    prog = canonical_program(ast)
    return enumerate_spaths(canonicalize(build_cfg(prog))[0], prog.variables())


def test_fig3_paths_and_pruning():
    prog = canonical_program(corpus_ast("fig3"))
    paths = enumerate_spaths(canonicalize(build_cfg(prog))[0], prog.variables())
    assert [sp.name for sp in paths.spaths] == ["A", "B", "C"]
    assert paths.spaths[1].cond.text() == "x₀ >= 0 && x₀ <= -3"
    assert paths.spaths[0].op_text(["x", "i"]) == "x = x₀ + 2, i = i₀ + 3"
    valid = prune_invalid(paths, solver())
    assert [sp.name for sp in valid.spaths] == ["A", "C"]
    assert paths.spaths[1].valid is False
    assert "B [invalid]" in dump_spaths(paths)


@settings(max_examples=150, deadline=None)
@given(loop_bodies(), st.integers(-20, 20), st.integers(-20, 20))
def test_paths_partition_states_and_match_execution(body, x, y):
    ast = parse(HEADER + f"while (x < 100) {{ {body} }}\n")
    loop = ast.body[0]
    assert isinstance(loop, While)
    paths = loop_paths_from_stmt(loop, list(VARS))
    env = {pre("x"): x, pre("y"): y}
    taken = [sp for sp in paths.spaths if bevaluate(sp.cond, env)]
    assert len(taken) == 1
    once = interpret(parse(HEADER + body + "\n"), {"x": x, "y": y})
    assert {v: taken[0].op[v].evaluate_int(env) for v in VARS} == {v: once.values[v] for v in VARS}


@settings(max_examples=50, deadline=None)
@given(loop_bodies())
def test_recomputing_cond_op_from_branches(body):
    loop = parse(HEADER + f"while (x < 100) {{ {body} }}\n").body[0]
    paths = loop_paths_from_stmt(loop, list(VARS))
    for sp in paths.spaths:
        cond, op = sp.cond, dict(sp.op)
        compute_cond_op(sp, loop.body, list(VARS))
        assert sp.cond == cond and sp.op == op


def test_cfg_paths_attached():
    paths = paths_of("// input x in [0, 9]\nwhile (x < 10) { if (x > 3) { x = x + 2; } else { x = x + 1; } }\n")
    assert len(paths.spaths) == 2
    assert all(sp.nodes for sp in paths.spaths)


def test_path_explosion():
    ifs = " ".join(f"if (x > {k}) {{ x = x + 1; }}" for k in range(8))
    loop = parse(f"// input x in [0, 9]\nwhile (x < 100) {{ {ifs} }}\n").body[0]
    with pytest.raises(PathExplosionError):
        loop_paths_from_stmt(loop, ["x"], max_paths=100)
    assert len(loop_paths_from_stmt(loop, ["x"], max_paths=256).spaths) == 256


def test_nondet_marks_path():
    paths = paths_of("int x = 0;\nint d = 0;\nwhile (x < 10) { d = nondet(); x = x + d; }\n")
    assert paths.spaths[0].nondet


def test_path_names():
    assert [path_name(i) for i in (0, 1, 25, 26, 27)] == ["A", "B", "Z", "AA", "AB"]
