import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loopsum.cfg import (
    Cfg,
    Edge,
    IrreducibleFlowError,
    Node,
    back_edges,
    build_cfg,
    canonical_program,
    canonicalize,
    check_reducible,
    dominates,
    dominators,
    is_canonical,
)
from loopsum.frontend import parse
from loopsum.oracle import interpret
from loopsum.program import Break, While, walk
from progs import programs


def _reachable_without(cfg: Cfg, removed: int) -> set[int]:
    seen, todo = set(), [cfg.entry] if cfg.entry != removed else []
    while todo:
        n = todo.pop()
        if n in seen:
            continue
        seen.add(n)
        todo.extend(s for s in cfg.succs(n) if s != removed)
    return seen


@settings(max_examples=80, deadline=None)
@given(programs())
def test_dominators_match_brute_force(src):
    cfg = build_cfg(parse(src))
    idom = dominators(cfg)
    nodes = [n.id for n in cfg.nodes]
    assert set(idom) == set(nodes)  # unreachable nodes are pruned when building
    for a, b in itertools.product(nodes, nodes):
        brute = a == b or b not in _reachable_without(cfg, a)
        assert dominates(idom, a, b) == brute, (a, b)


@settings(max_examples=80, deadline=None)
@given(programs())
def test_one_canonical_loop_per_while(src):
    ast = parse(src)
    cfg = build_cfg(ast)
    loops = canonicalize(cfg)
    prog = canonical_program(ast)
    assert len(loops) == sum(isinstance(s, While) for s in walk(prog.body))
    for loop in loops:
        # single entry and single exit: the only edges crossing the loop boundary
        into = [e for e in loop.cfg.edges if e.dst in loop.nodes and e.src not in loop.nodes]
        out = [e for e in loop.cfg.edges if e.src in loop.nodes and e.dst not in loop.nodes]
        assert into == [loop.entry_edge] and out == [loop.exit_edge]
        assert loop.entry_edge.dst == loop.header == loop.exit_edge.src
    assert len(back_edges(build_cfg(prog))) == len(loops)


@settings(max_examples=120, deadline=None)
@given(programs(), st.integers(-20, 20), st.integers(-20, 20))
def test_break_removal_preserves_behaviour(src, x, y):
    ast = parse(src)
    prog = canonical_program(ast)
    assert is_canonical(prog)
    assert not any(isinstance(s, Break) for s in walk(prog.body))
    a = interpret(ast, {"x": x, "y": y})
    b = interpret(prog, {"x": x, "y": y})
    assert a.status == b.status
    assert {k: v for k, v in b.values.items() if k in a.values} == a.values


def test_break_loop_gets_flag_guard():
    ast = parse("// input x in [0, 9]\nwhile (x < 10) { x = x + 1; if (x == 5) { break; } }\n")
    assert not is_canonical(ast)
    prog = canonical_program(ast)
    assert "__brk0" in prog.variables()
    (loop,) = canonicalize(build_cfg(ast))
    assert "__brk0" in loop.cfg.program.variables()


def _manual_cfg(edges):
    n = 1 + max(max(a, b) for a, b in edges)
    nodes = [Node(i, "block") for i in range(n)]
    return Cfg(nodes, [Edge(a, b) for a, b in edges], 0, n - 1, parse(""))


def test_irreducible_flow_rejected():
    # two entries into the cycle 1 <-> 2
    cfg = _manual_cfg([(0, 1), (0, 2), (1, 2), (2, 1), (2, 3)])
    with pytest.raises(IrreducibleFlowError):
        check_reducible(cfg)


def test_reducible_manual_graph_accepted():
    cfg = _manual_cfg([(0, 1), (1, 2), (2, 1), (1, 3)])
    check_reducible(cfg)
    assert back_edges(cfg) == [Edge(2, 1)]


def test_dot_output_is_deterministic():
    src = "// input x in [0, 9]\nwhile (x < 10) { if (x > 3) { x = x + 2; } else { x = x + 1; } }\n"
    a, b = build_cfg(parse(src)).to_dot(), build_cfg(parse(src)).to_dot()
    assert a == b and a.startswith("digraph cfg {")
