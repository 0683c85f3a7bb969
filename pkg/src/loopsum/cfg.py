"""Control-flow graphs, dominators and canonical loops.

Nodes are numbered in creation order, which follows source order, so the
reverse post-order (and everything derived from it) is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .program import (
    Assign,
    Binary,
    Break,
    Decl,
    Exp,
    If,
    Num,
    ProgramAst,
    Stmt,
    Var,
    While,
    format_expr,
    format_stmts,
    walk,
)


class IrreducibleFlowError(Exception):
    code = "IRREDUCIBLE_FLOW"


@dataclass
class Node:
    id: int
    kind: str  # entry, exit, block, cond
    stmts: list[Stmt] = field(default_factory=list)
    cond: Optional[Exp] = None
    line: int = 0
    loop_stmt: Optional[While] = None  # set on loop headers

    def label(self) -> str:
        if self.kind in ("entry", "exit"):
            return self.kind
        if self.kind == "cond":
            return format_expr(self.cond)
        return "\\l".join(format_stmts(tuple(self.stmts))) + ("\\l" if self.stmts else "")


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    label: Optional[bool] = None


@dataclass
class Cfg:
    nodes: list[Node]
    edges: list[Edge]
    entry: int
    exit: int
    program: ProgramAst

    def succs(self, n: int) -> list[int]:
        return [e.dst for e in self.edges if e.src == n]

    def preds(self, n: int) -> list[int]:
        return [e.src for e in self.edges if e.dst == n]

    def out_edges(self, n: int) -> list[Edge]:
        return [e for e in self.edges if e.src == n]

    def successor(self, n: int, label: Optional[bool]) -> int:
        for e in self.edges:
            if e.src == n and e.label == label:
                return e.dst
        raise KeyError((n, label))

    def to_dot(self) -> str:
        lines = ["digraph cfg {", "  node [shape=box, fontname=monospace];"]
        for n in self.nodes:
            shape = ", shape=diamond" if n.kind == "cond" else ""
            if n.kind in ("entry", "exit"):
                shape = ", shape=oval"
            label = n.label().replace('"', '\\"')
            lines.append(f'  n{n.id} [label="{label}"{shape}];')
        for e in self.edges:
            attr = "" if e.label is None else f' [label="{"T" if e.label else "F"}"]'
            lines.append(f"  n{e.src} -> n{e.dst}{attr};")
        lines.append("}")
        return "\n".join(lines) + "\n"


class _Builder:
    def __init__(self, prog: ProgramAst):
        self.prog = prog
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []

    def node(self, kind: str, **kw) -> int:
        n = Node(len(self.nodes), kind, **kw)
        self.nodes.append(n)
        return n.id

    def edge(self, a: int, b: int, label: Optional[bool] = None) -> None:
        self.edges.append(Edge(a, b, label))

    def build(self) -> Cfg:
        entry = self.node("entry")
        exit_placeholder: list[int] = []
        end = self.seq(self.prog.body, entry, None, exit_placeholder)
        exit_ = self.node("exit")
        if end is not None:
            self.edge(end, exit_)
        for n in exit_placeholder:
            self.edge(n, exit_)
        return Cfg(self.nodes, self.edges, entry, exit_, self.prog)

    def seq(self, body, cur: int, brk: Optional[list[int]], _exits) -> Optional[int]:
        """Lay out ``body`` after node ``cur``; return the fall-through node."""
        block: Optional[int] = None
        for s in body:
            if isinstance(s, While):
                header = self.node("cond", cond=s.cond, line=s.line, loop_stmt=s)
                self.edge(cur, header)
                breaks: list[int] = []
                body_start = self.node("block", line=s.line)
                self.edge(header, body_start, True)
                tail = self.seq(s.body, body_start, breaks, _exits)
                if tail is not None:
                    self.edge(tail, header)
                after = self.node("block", line=s.line)
                self.edge(header, after, False)
                for b in breaks:
                    self.edge(b, after)
                cur, block = after, after
            elif isinstance(s, If):
                c = self.node("cond", cond=s.cond, line=s.line)
                self.edge(cur, c)
                join = None
                ends = []
                for label, branch in ((True, s.then), (False, s.orelse)):
                    start = self.node("block", line=s.line)
                    self.edge(c, start, label)
                    tail = self.seq(branch, start, brk, _exits)
                    if tail is not None:
                        ends.append(tail)
                join = self.node("block", line=s.line)
                for t in ends:
                    self.edge(t, join)
                cur, block = join, join
            elif isinstance(s, Break):
                if block is None:
                    block = self.node("block", line=s.line)
                    self.edge(cur, block)
                brk.append(block)
                return None
            else:
                if block is None:
                    block = self.node("block", line=getattr(s, "line", 0))
                    self.edge(cur, block)
                    cur = block
                self.nodes[block].stmts.append(s)
        if block is None:
            return cur
        return block


def build_cfg(ast: ProgramAst) -> Cfg:
    """Build the CFG of ``ast``; statement order inside blocks is preserved."""
    cfg = _Builder(ast).build()
    return _prune_unreachable(cfg)


def _prune_unreachable(cfg: Cfg) -> Cfg:
    # nodes after an unconditional break are unreachable; drop them and renumber
    seen = set(_reachable(cfg, cfg.entry))
    if len(seen) == len(cfg.nodes):
        return cfg
    keep = [n for n in cfg.nodes if n.id in seen]
    remap = {n.id: i for i, n in enumerate(keep)}
    nodes = []
    for n in keep:
        nodes.append(Node(remap[n.id], n.kind, n.stmts, n.cond, n.line, n.loop_stmt))
    edges = [Edge(remap[e.src], remap[e.dst], e.label) for e in cfg.edges
             if e.src in seen and e.dst in seen]
    return Cfg(nodes, edges, remap[cfg.entry], remap[cfg.exit], cfg.program)


def _reachable(cfg: Cfg, start: int) -> list[int]:
    succ = _succ_map(cfg)
    seen = [start]
    seen_set = {start}
    i = 0
    while i < len(seen):
        for s in succ[seen[i]]:
            if s not in seen_set:
                seen_set.add(s)
                seen.append(s)
        i += 1
    return seen


def _succ_map(cfg: Cfg) -> dict[int, list[int]]:
    succ: dict[int, list[int]] = {n.id: [] for n in cfg.nodes}
    # true edges first so RPO visits the then-branch first
    for e in sorted(cfg.edges, key=lambda e: (e.src, e.label is not True)):
        succ[e.src].append(e.dst)
    return succ


def reverse_postorder(cfg: Cfg) -> list[int]:
    succ = _succ_map(cfg)
    order: list[int] = []
    seen = {cfg.entry}
    stack = [(cfg.entry, iter(succ[cfg.entry]))]
    while stack:
        n, it = stack[-1]
        for s in it:
            if s not in seen:
                seen.add(s)
                stack.append((s, iter(succ[s])))
                break
        else:
            order.append(n)
            stack.pop()
    order.reverse()
    return order


def dominators(cfg: Cfg) -> dict[int, Optional[int]]:
    """Immediate dominators by the iterative reverse-post-order algorithm.

    The entry maps to ``None``; unreachable nodes are omitted.
    """
    rpo = reverse_postorder(cfg)
    index = {n: i for i, n in enumerate(rpo)}
    preds: dict[int, list[int]] = {n: [] for n in rpo}
    for e in cfg.edges:
        if e.src in index and e.dst in index:
            preds[e.dst].append(e.src)
    idom: dict[int, Optional[int]] = {cfg.entry: cfg.entry}

    def intersect(a: int, b: int) -> int:
        while a != b:
            while index[a] > index[b]:
                a = idom[a]
            while index[b] > index[a]:
                b = idom[b]
        return a

    changed = True
    while changed:
        changed = False
        for n in rpo[1:]:
            new = None
            for p in preds[n]:
                if p in idom:
                    new = p if new is None else intersect(p, new)
            if idom.get(n) != new:
                idom[n] = new
                changed = True
    out: dict[int, Optional[int]] = dict(idom)
    out[cfg.entry] = None
    return out


def dominates(idom: dict[int, Optional[int]], a: int, b: int) -> bool:
    """Whether ``a`` dominates ``b`` (reflexively)."""
    n: Optional[int] = b
    while n is not None:
        if n == a:
            return True
        n = idom.get(n)
    return False


def back_edges(cfg: Cfg, idom=None) -> list[Edge]:
    idom = idom if idom is not None else dominators(cfg)
    return [e for e in cfg.edges if e.dst in idom and e.src in idom and dominates(idom, e.dst, e.src)]


def check_reducible(cfg: Cfg) -> None:
    """Raise :class:`IrreducibleFlowError` if a cycle survives removing back edges."""
    backs = set(back_edges(cfg))
    succ: dict[int, list[int]] = {n.id: [] for n in cfg.nodes}
    for e in cfg.edges:
        if e not in backs:
            succ[e.src].append(e.dst)
    state: dict[int, int] = {}
    for root in succ:
        if root in state:
            continue
        stack = [(root, iter(succ[root]))]
        state[root] = 1
        while stack:
            n, it = stack[-1]
            for s in it:
                if state.get(s) == 1:
                    raise IrreducibleFlowError(f"cycle through node {s} has more than one entry")
                if s not in state:
                    state[s] = 1
                    stack.append((s, iter(succ[s])))
                    break
            else:
                state[n] = 2
                stack.pop()


# -- canonical loops -----------------------------------------------------------


@dataclass
class CanonicalLoop:
    id: int
    header: int
    nodes: frozenset[int]
    entry_edge: Edge
    exit_edge: Edge
    parent: Optional[int]
    stmt: While
    cfg: Cfg = field(repr=False)

    @property
    def depth(self) -> int:
        return 0 if self.parent is None else 1

    def body_paths(self) -> list[list[int]]:
        """Node sequences from the body start back to the header.

        Inner loops count as a single opaque region: their headers are
        traversed through the false (exit) edge only.
        """
        start = self.cfg.successor(self.header, True)
        out: list[list[int]] = []
        stack = [(start, [start])]
        while stack:
            n, path = stack.pop()
            if n == self.header:
                out.append(path[:-1])
                continue
            node = self.cfg.nodes[n]
            if node.loop_stmt is not None:
                nxt = [self.cfg.successor(n, False)]
            else:
                nxt = [e.dst for e in sorted(self.cfg.out_edges(n), key=lambda e: e.label is True)]
            for s in nxt:
                if s in self.nodes:
                    stack.append((s, path + [s]))
        out.sort()
        return out


def natural_loops(cfg: Cfg) -> list[CanonicalLoop]:
    idom = dominators(cfg)
    check_reducible(cfg)
    rpo = reverse_postorder(cfg)
    order = {n: i for i, n in enumerate(rpo)}
    bodies: dict[int, set[int]] = {}
    for e in back_edges(cfg, idom):
        body = bodies.setdefault(e.dst, {e.dst})
        stack = [e.src]
        while stack:
            n = stack.pop()
            if n not in body:
                body.add(n)
                stack.extend(cfg.preds(n))
    headers = sorted(bodies, key=lambda h: order[h])
    loops: list[CanonicalLoop] = []
    for lid, h in enumerate(headers):
        body = bodies[h]
        entries = [e for e in cfg.edges if e.dst == h and e.src not in body]
        exits = [e for e in cfg.edges if e.src in body and e.dst not in body]
        if len(entries) != 1 or len(exits) != 1:
            raise IrreducibleFlowError(
                f"loop at node {h} has {len(entries)} entries and {len(exits)} exits"
            )
        parent = None
        for pid in range(lid - 1, -1, -1):
            if h in loops[pid].nodes:
                parent = pid
                break
        stmt = cfg.nodes[h].loop_stmt
        loops.append(CanonicalLoop(lid, h, frozenset(body), entries[0], exits[0], parent, stmt, cfg))
    return loops


def _has_break(body: tuple[Stmt, ...]) -> bool:
    for s in body:
        if isinstance(s, Break):
            return True
        if isinstance(s, If) and (_has_break(s.then) or _has_break(s.orelse)):
            return True
    return False


def _neq0(name: str) -> Exp:
    return Binary("==", Var(name), Num(0))


def _remove_breaks(body: tuple[Stmt, ...], flag: str) -> tuple[Stmt, ...]:
    out: list[Stmt] = []
    for i, s in enumerate(body):
        if isinstance(s, Break):
            out.append(Assign(flag, Num(1), line=s.line))
            return tuple(out)
        if isinstance(s, If) and (_has_break(s.then) or _has_break(s.orelse)):
            out.append(If(s.cond, _remove_breaks(s.then, flag), _remove_breaks(s.orelse, flag), line=s.line))
            rest = _remove_breaks(body[i + 1:], flag)
            if rest:
                out.append(If(_neq0(flag), rest, (), line=s.line))
            return tuple(out)
        out.append(s)
    return tuple(out)


def canonical_program(ast: ProgramAst) -> ProgramAst:
    """Rewrite every loop with ``break`` into a single-exit loop guarded by a flag."""
    counter = [0]
    flags: list[str] = []

    def rewrite(body: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for s in body:
            if isinstance(s, While):
                inner = rewrite(s.body)
                if _has_break(inner):
                    flag = f"__brk{counter[0]}"
                    counter[0] += 1
                    flags.append(flag)
                    out.append(Assign(flag, Num(0), line=s.line))
                    cond = Binary("&&", s.cond, _neq0(flag))
                    out.append(While(cond, _remove_breaks(inner, flag), line=s.line))
                else:
                    out.append(While(s.cond, inner, line=s.line))
            elif isinstance(s, If):
                out.append(If(s.cond, rewrite(s.then), rewrite(s.orelse), line=s.line))
            else:
                out.append(s)
        return tuple(out)

    body = rewrite(ast.body)
    if not flags:
        return ast
    decls = tuple(Decl(f) for f in flags)
    return ProgramAst(ast.inputs, decls + body, ast.bitwidth, ast.nondet_range)


def canonicalize(cfg: Cfg) -> list[CanonicalLoop]:
    """Single-entry/single-exit loops of ``cfg``'s program, outermost first.

    Programs with ``break`` are rewritten first; the returned loops then
    refer to the CFG of the rewritten program.
    """
    check_reducible(cfg)
    prog = canonical_program(cfg.program)
    if prog is not cfg.program:
        cfg = build_cfg(prog)
    return natural_loops(cfg)


def is_canonical(ast: ProgramAst) -> bool:
    return not any(isinstance(s, Break) for s in walk(ast.body))
