from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import solver
from loopsum.frontend import parse
from loopsum.graph import END, HIGH_ORDER, ONE_ORDER, START, ZERO_ORDER, build_spath_graph, contract, tarjan
from loopsum.spath import loop_paths_from_stmt, prune_invalid
from loopsum.symexpr import bevaluate, pre

# -- Tarjan ---------------------------------------------------------------------------


def _closure(nodes, edges):
    reach = {n: {n} for n in nodes}
    changed = True
    while changed:
        changed = False
        for a, b in edges:
            new = reach[b] - reach[a]
            if new:
                reach[a] |= new
                changed = True
    return reach


graphs = st.integers(1, 9).flatmap(lambda n: st.tuples(
    st.just(list(range(n))),
    st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n)))


@settings(max_examples=300, deadline=None)
@given(graphs)
def test_tarjan_matches_mutual_reachability(g):
    nodes, edges = g
    sccs = tarjan(nodes, lambda n: sorted({b for a, b in edges if a == n}))
    reach = _closure(nodes, edges)
    expected = {frozenset(m for m in nodes if m in reach[n] and n in reach[m]) for n in nodes}
    assert {frozenset(c) for c in sccs} == expected
    assert sorted(n for c in sccs for n in c) == nodes
    # reverse topological order: no edge leads from an earlier SCC to a later one
    pos = {n: i for i, c in enumerate(sccs) for n in c}
    assert all(pos[a] >= pos[b] for a, b in edges)


def test_tarjan_deep_chain_is_iterative():
    n = 5000
    sccs = tarjan(range(n), lambda i: [i + 1] if i + 1 < n else [0])
    assert len(sccs) == 1 and len(sccs[0]) == n


# -- jumps ----------------------------------------------------------------------------

BOX = range(-150, 151)


def _loop(k, a, b, bound):
    src = (f"// input x in [-150, 150]\nwhile (x < {bound}) {{ if (x > {k}) {{ x = x + {a}; }} "
           f"else {{ x = x + {b}; }} }}\n")
    return loop_paths_from_stmt(parse(src).body[0], ["x"])


def _brute_edges(paths):
    def holds(b, x):
        return bevaluate(b, {pre("x"): x})

    def post(sp, x):
        return sp.op["x"].evaluate_int({pre("x"): x})

    edges = set()
    for x in BOX:
        if not holds(paths.guard, x):
            continue
        here = [sp for sp in paths.spaths if holds(sp.cond, x)]
        edges |= {(START, sp.index) for sp in here}
        for sp in here:
            y = post(sp, x)
            if not holds(paths.guard, y):
                edges.add((sp.index, END))
            edges |= {(sp.index, t.index) for t in paths.spaths
                      if holds(paths.guard, y) and holds(t.cond, y)}
    return edges


@settings(max_examples=60, deadline=None)
@given(st.integers(-20, 20), st.integers(-9, 9), st.integers(-9, 9), st.integers(-20, 40))
def test_jump_edges_match_enumeration(k, a, b, bound):
    paths = prune_invalid(_loop(k, a, b, bound), solver())
    g = build_spath_graph(paths, solver())
    assert not g.flagged
    assert g.edges == _brute_edges(paths)


@settings(max_examples=60, deadline=None)
@given(st.integers(-20, 20), st.integers(-9, 9), st.integers(-9, 9), st.integers(-20, 40))
def test_contraction_is_acyclic_and_trimmed(k, a, b, bound):
    paths = prune_invalid(_loop(k, a, b, bound), solver())
    g = build_spath_graph(paths, solver())
    csg = contract(g)
    order = csg.topological()
    assert order[0] == START and order[-1] == END
    fwd = _closure(order, csg.edges)
    for s in csg.sccs:
        assert s.id in fwd[START] and END in fwd[s.id]
        self_edge = (s.members[0], s.members[0]) in g.edges
        assert s.order == (HIGH_ORDER if len(s.members) > 1 else ONE_ORDER if self_edge else ZERO_ORDER)
    kept = {m for s in csg.sccs for m in s.members} | {m for s in csg.pruned for m in s.members}
    assert kept == {sp.index for sp in paths.spaths}
