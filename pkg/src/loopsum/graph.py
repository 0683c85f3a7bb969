"""SPath graphs and their SCC-contracted form.

Nodes are SPath indices plus the synthetic ``"start"`` and ``"end"``.
An edge ``a -> b`` (a jump) exists when some state satisfies the loop
guard and ``a``'s condition, and after ``a``'s operation again satisfies
the loop guard and ``b``'s condition.  Edges into ``"end"`` require the
guard to fail after ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Union

from .solver import UNKNOWN, UNSAT
from .spath import LoopPaths, SPath
from .symexpr import Bool, bsubstitute, negate

START = "start"
END = "end"
NodeKey = Union[int, str]

ZERO_ORDER = "ZERO"
ONE_ORDER = "ONE"
HIGH_ORDER = "HIGH"


def _key(n: NodeKey) -> tuple:
    if n == START:
        return (0, 0)
    if n == END:
        return (2, 0)
    return (1, n)


def jump_query(paths: LoopPaths, sp1: Optional[SPath], sp2: Optional[SPath]) -> list[Bool]:
    """Constraints whose satisfiability is the jump ``sp1 -> sp2``.

    ``None`` stands for the start node (as ``sp1``) or the end node (as ``sp2``).
    """
    g = paths.guard
    if sp1 is None:
        if sp2 is None:
            return [negate(g)]
        return [g, sp2.cond]
    after_g = bsubstitute(g, sp1.pre_map)
    if sp2 is None:
        return [g, sp1.cond, negate(after_g)]
    return [g, sp1.cond, after_g, bsubstitute(sp2.cond, sp1.pre_map)]


def jump_feasible(paths: LoopPaths, sp1: Optional[SPath], sp2: Optional[SPath], solver) -> bool:
    """Whether the jump exists; undecided queries count as feasible."""
    return solver.check(jump_query(paths, sp1, sp2)).status != UNSAT


@dataclass
class SPathGraph:
    paths: LoopPaths
    edges: set[tuple[NodeKey, NodeKey]]
    flagged: list[tuple[NodeKey, NodeKey]] = field(default_factory=list)

    @property
    def nodes(self) -> list[NodeKey]:
        return [START] + [sp.index for sp in self.paths.spaths] + [END]

    def spath(self, index: int) -> SPath:
        for sp in self.paths.spaths:
            if sp.index == index:
                return sp
        raise KeyError(index)

    def succs(self, n: NodeKey) -> list[NodeKey]:
        return sorted((b for a, b in self.edges if a == n), key=_key)

    def sorted_edges(self) -> list[tuple[NodeKey, NodeKey]]:
        return sorted(self.edges, key=lambda e: (_key(e[0]), _key(e[1])))

    def named_edges(self) -> set[tuple[str, str]]:
        def nm(n: NodeKey) -> str:
            return n if isinstance(n, str) else self.spath(n).name

        return {(nm(a), nm(b)) for a, b in self.edges}

    def to_dot(self) -> str:
        lines = ["digraph spaths {"]
        for n in self.nodes:
            label = n if isinstance(n, str) else self.spath(n).name
            lines.append(f'  "{label}";')
        for a, b in self.sorted_edges():
            la = a if isinstance(a, str) else self.spath(a).name
            lb = b if isinstance(b, str) else self.spath(b).name
            style = " [style=dashed]" if (a, b) in self.flagged else ""
            lines.append(f'  "{la}" -> "{lb}"{style};')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_spath_graph(paths: LoopPaths, solver) -> SPathGraph:
    """All pairwise jumps among valid SPaths, plus start and end jumps."""
    sps = paths.valid
    edges: set[tuple[NodeKey, NodeKey]] = set()
    flagged: list[tuple[NodeKey, NodeKey]] = []
    pairs: list[tuple[Optional[SPath], Optional[SPath]]] = []
    for b in sps:
        pairs.append((None, b))
    for a in sps:
        for b in sps:
            pairs.append((a, b))
        pairs.append((a, None))
    for a, b in pairs:
        res = solver.check(jump_query(paths, a, b))
        if res.status == UNSAT:
            continue
        e = (START if a is None else a.index, END if b is None else b.index)
        edges.add(e)
        if res.status == UNKNOWN:
            flagged.append(e)
    return SPathGraph(paths, edges, flagged)


# -- strongly connected components -------------------------------------------------


def tarjan(nodes: Iterable[Hashable], succs) -> list[list[Hashable]]:
    """Strongly connected components (iterative Tarjan), in reverse topological order."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    out: list[list] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succs(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succs(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


@dataclass
class Scc:
    id: int
    members: list[int]
    self_loop: bool

    @property
    def order(self) -> str:
        if len(self.members) > 1:
            return HIGH_ORDER
        return ONE_ORDER if self.self_loop else ZERO_ORDER

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass
class Csg:
    graph: SPathGraph
    sccs: list[Scc]
    edges: set[tuple[NodeKey, NodeKey]]  # between SCC ids, START, END
    pruned: list[Scc] = field(default_factory=list)  # SCCs that cannot reach the end

    def scc_of(self, spath_index: int) -> Optional[Scc]:
        for s in self.sccs + self.pruned:
            if spath_index in s.members:
                return s
        return None

    def get(self, scc_id: int) -> Scc:
        for s in self.sccs:
            if s.id == scc_id:
                return s
        raise KeyError(scc_id)

    def succs(self, n: NodeKey) -> list[NodeKey]:
        return sorted((b for a, b in self.edges if a == n), key=_key)

    def topological(self) -> list[NodeKey]:
        indeg: dict[NodeKey, int] = {START: 0, END: 0}
        for s in self.sccs:
            indeg[s.id] = 0
        for _, b in self.edges:
            indeg[b] += 1
        ready = sorted((n for n, d in indeg.items() if d == 0), key=_key)
        order: list[NodeKey] = []
        while ready:
            n = ready.pop(0)
            order.append(n)
            for b in self.succs(n):
                indeg[b] -= 1
                if indeg[b] == 0:
                    ready.append(b)
                    ready.sort(key=_key)
        if len(order) != len(indeg):
            raise ValueError("CSG is not acyclic")
        return order

    def describe(self) -> dict:
        names = {sp.index: sp.name for sp in self.graph.paths.spaths}
        return {
            "sccs": [
                {"id": s.id, "members": [names[m] for m in s.members], "order": s.order}
                for s in self.sccs
            ],
            "edges": [[a if isinstance(a, str) else a, b] for a, b in
                      sorted(self.edges, key=lambda e: (_key(e[0]), _key(e[1])))],
            "pruned": [[names[m] for m in s.members] for s in self.pruned],
        }

    def to_dot(self) -> str:
        names = {sp.index: sp.name for sp in self.graph.paths.spaths}
        lines = ["digraph csg {", '  "start"; "end";']
        for s in self.sccs:
            label = "{" + ",".join(names[m] for m in s.members) + "}"
            lines.append(f'  "scc{s.id}" [label="{label} {s.order.lower()}-order"];')
        for a, b in sorted(self.edges, key=lambda e: (_key(e[0]), _key(e[1]))):
            la = a if isinstance(a, str) else f"scc{a}"
            lb = b if isinstance(b, str) else f"scc{b}"
            lines.append(f'  "{la}" -> "{lb}";')
        lines.append("}")
        return "\n".join(lines) + "\n"


def contract(g: SPathGraph) -> Csg:
    """Contract SCCs and keep only what lies on a start-to-end path."""
    nodes = g.nodes
    comps = tarjan(nodes, g.succs)
    inner = [sorted(c) for c in comps if all(isinstance(n, int) for n in c)]
    inner.sort(key=lambda c: c[0])
    comp_of: dict[NodeKey, NodeKey] = {START: START, END: END}
    sccs: list[Scc] = []
    for i, members in enumerate(inner):
        loop = any((m, m2) in g.edges for m in members for m2 in members)
        sccs.append(Scc(i, members, loop))
        for m in members:
            comp_of[m] = i
    edges = {(comp_of[a], comp_of[b]) for a, b in g.edges if comp_of[a] != comp_of[b]}
    fwd = _reach(START, edges, forward=True)
    bwd = _reach(END, edges, forward=False)
    keep = fwd & bwd
    kept = [s for s in sccs if s.id in keep]
    pruned = [s for s in sccs if s.id in fwd and s.id not in bwd]
    edges = {(a, b) for a, b in edges if a in keep and b in keep}
    return Csg(g, kept, edges, pruned)


def _reach(root: NodeKey, edges: set, forward: bool) -> set:
    adj: dict = {}
    for a, b in edges:
        if forward:
            adj.setdefault(a, []).append(b)
        else:
            adj.setdefault(b, []).append(a)
    seen = {root}
    stack = [root]
    while stack:
        n = stack.pop()
        for m in adj.get(n, ()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen
