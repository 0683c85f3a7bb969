"""Assertion checking on top of loop summaries.

The program is executed symbolically at the top level, with every loop
replaced by the cases of its summary.  An assertion after a loop is
violated when some route through the summary cases reaches it with the
assertion false.  For an assertion inside a loop body, the loop is first
summarized with its guard strengthened by "no assertion fails in this
iteration"; the assertion is violated when that loop stops with the
original guard still true and the iteration about to fail it.  This
covers every iteration index, since the summary leaves the iteration
count free.

Each check is a satisfiability query.  When the solver cannot decide a
query (for instance because a count is only defined by search), the same
formula is decided by evaluating it on every point of the bounded input
domain, if that domain is small enough.  Witnesses are always replayed
through the interpreter before a violation is reported.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import prod
from typing import Optional, Union

from .cfg import canonical_program
from .oracle import DEFAULT_NONDET_RANGE, ScriptedNondet, Status, interpret
from .pipeline import Options, flatten
from .program import (
    Assert,
    Assign,
    Binary,
    Decl,
    If,
    Nondet,
    Num,
    ParAssign,
    ProgramAst,
    Stmt,
    Var,
    While,
    format_expr,
    walk,
)
from .solver import SAT, UNSAT, Solver
from .spath import LoopPaths, LoweringError, PathExplosionError, loop_paths_from_stmt, lower_bool, lower_expr
from .summarize import SummaryFailure, summarize_paths
from .summarize.model import GuardStep, LetStep
from .symexpr import (
    FALSE,
    Bool,
    Divergence,
    Expr,
    Opaque,
    bevaluate,
    bexprs,
    bfree_symbols,
    bsubstitute,
    conj,
    disj,
    eq,
    ge,
    le,
    negate,
    pre,
    sym,
)

HOLDS = "HOLDS"
VIOLATED = "VIOLATED"
UNKNOWN = "UNKNOWN"

# reasons for UNKNOWN that are not summarization failures
QUERY_UNDECIDED = "QUERY_UNDECIDED"
WITNESS_NOT_REPLAYED = "WITNESS_NOT_REPLAYED"

ENUM_LIMIT = 10_000  # largest input domain decided by exhaustive evaluation
MAX_ROUTES = 4096


@dataclass
class Verdict:
    line: int
    column: int
    text: str
    where: str  # "loop" or "top"
    status: str = HOLDS
    reason: str = ""
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        out: dict = {"line": self.line, "column": self.column, "assertion": self.text,
                     "where": self.where, "status": self.status}
        if self.reason:
            out["reason"] = self.reason
        if self.witness is not None:
            out["witness"] = self.witness
        return out

    def line_text(self) -> str:
        extra = f" ({self.reason})" if self.reason else ""
        return f"{self.line}:{self.column} assert({self.text}) {self.status}{extra}"


# -- nondeterministic loop guards ------------------------------------------------------


def rewrite_nondet_loops(ast: ProgramAst) -> ProgramAst:
    """``while (nondet()) B`` becomes a loop running a nondeterministic number of times.

    The replacement is ``__cK = 0; __bK = nondet(); while (__cK < __bK) { __cK = __cK + 1; B }``,
    which has an explicit guard the summarizer can work with.
    """
    names: list[str] = []

    def rewrite(body: tuple[Stmt, ...]) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for s in body:
            if isinstance(s, While):
                inner = rewrite(s.body)
                if isinstance(s.cond, Nondet):
                    k = len(names)
                    c, b = f"__c{k}", f"__b{k}"
                    names.extend([c, b])
                    out.append(Assign(c, Num(0), line=s.line))
                    out.append(Assign(b, Nondet(), line=s.line))
                    step = Assign(c, Binary("+", Var(c), Num(1)), line=s.line)
                    out.append(While(Binary("<", Var(c), Var(b)), (step,) + inner, line=s.line))
                else:
                    out.append(While(s.cond, inner, line=s.line))
            elif isinstance(s, If):
                out.append(If(s.cond, rewrite(s.then), rewrite(s.orelse), line=s.line))
            else:
                out.append(s)
        return tuple(out)

    body = rewrite(ast.body)
    if not names:
        return ast
    return ProgramAst(ast.inputs, tuple(Decl(n) for n in names) + body, ast.bitwidth, ast.nondet_range)


# -- symbolic routes ---------------------------------------------------------------------

Piece = Union[GuardStep, LetStep]


@dataclass
class Route:
    pieces: list[Piece]
    env: dict[str, Expr]
    draws: list[tuple[str, str, int]] = field(default_factory=list)  # (kind, symbol, line)
    unknown: str = ""  # set when an earlier loop could not be summarized

    def fork(self, extra: Piece) -> "Route":
        return Route(self.pieces + [extra], dict(self.env), list(self.draws), self.unknown)


@dataclass
class Query:
    key: tuple[int, int]
    pieces: list[Piece]
    draws: list[tuple[str, str, int]]
    unknown: str = ""


class _Executor:
    def __init__(self, prog: ProgramAst, options: Options, solver: Solver, rebuilt: set[int],
                 nondet_range: tuple[int, int]):
        self.prog = prog
        self.options = options
        self.solver = solver
        self.rebuilt = rebuilt
        self.nondet_range = nondet_range
        self.variables = prog.variables()
        self.queries: list[Query] = []
        self.unknown_keys: dict[tuple[int, int], str] = {}
        self._counter = 0
        self._loops = 0

    def _name(self, prefix: str) -> str:
        self._counter += 1
        return f"{prefix}{self._counter}"

    def run(self) -> None:
        env = {v: Expr.const(0) for v in self.variables}
        pieces: list[Piece] = []
        for d in self.prog.inputs:
            x = sym(pre(d.name))
            env[d.name] = x
            if d.lo is not None:
                pieces.append(GuardStep(ge(x, d.lo)))
            if d.hi is not None:
                pieces.append(GuardStep(le(x, d.hi)))
        self.block(self.prog.body, [Route(pieces, env)])

    def block(self, body: tuple[Stmt, ...], routes: list[Route]) -> list[Route]:
        for s in body:
            if not routes:
                break
            if isinstance(s, While):
                routes = self.loop(s, routes)
            else:
                routes = [out for r in routes for out in self.stmt(s, r)]
            if len(routes) > MAX_ROUTES:
                raise SummaryFailure("CASE_EXPLOSION", f"more than {MAX_ROUTES} routes")
        return routes

    def _drawer(self, r: Route, line: int, kind: str = "draw"):
        def fresh() -> Expr:
            name = self._name("__nd")
            r.draws.append((kind, name, line))
            lo, hi = self.nondet_range
            r.pieces.append(GuardStep(conj(ge(sym(name), lo), le(sym(name), hi))))
            return sym(name)
        return fresh

    def stmt(self, s: Stmt, r: Route) -> list[Route]:
        fresh = self._drawer(r, s.line)
        try:
            if isinstance(s, Decl):
                r.env[s.name] = Expr.const(0) if s.init is None else lower_expr(s.init, r.env, fresh)
            elif isinstance(s, Assign):
                if isinstance(s.value, Nondet) and s.name.startswith("__b") and s.name[3:].isdigit():
                    fresh = self._drawer(r, s.line, "loop")
                r.env[s.name] = lower_expr(s.value, r.env, fresh)
            elif isinstance(s, ParAssign):
                vals = [lower_expr(v, r.env, fresh) for v in s.values]
                r.env.update(zip(s.names, vals))
            elif isinstance(s, If):
                c = lower_bool(s.cond, r.env, fresh)
                out = []
                if c != FALSE:
                    out += self.block(s.then, [r.fork(GuardStep(c))])
                nc = negate(c)
                if nc != FALSE:
                    out += self.block(s.orelse, [r.fork(GuardStep(nc))])
                return out
            elif isinstance(s, Assert):
                phi = lower_bool(s.cond, r.env, fresh)
                self.queries.append(Query((s.line, s.column), r.pieces + [GuardStep(negate(phi))],
                                          list(r.draws), r.unknown))
                r.pieces.append(GuardStep(phi))
            else:  # pragma: no cover - breaks are rewritten away
                raise SummaryFailure("NOT_SUMMARIZABLE", f"unexpected statement {s}")
        except LoweringError as exc:
            raise SummaryFailure("NOT_SUMMARIZABLE", str(exc)) from exc
        return [r]

    def loop(self, s: While, routes: list[Route]) -> list[Route]:
        keys = [(a.line, a.column) for a in walk(s.body) if isinstance(a, Assert)]
        loop_id = self._loops
        self._loops += 1
        try:
            lp = loop_paths_from_stmt(s, self.variables, loop_id, self.options.max_paths)
        except (LoweringError, PathExplosionError):
            return self._give_up(routes, keys, "NOT_SUMMARIZABLE")
        fails: dict[tuple[int, int], list[Bool]] = {k: [] for k in keys}
        if keys:
            bad = []
            for sp in lp.spaths:
                held: list[Bool] = []
                for a, phi in sp.asserts:
                    f = conj(sp.cond, *held, negate(phi))
                    fails[(a.line, a.column)].append(f)
                    bad.append(f)
                    held.append(phi)
            lp = LoopPaths(lp.loop_id, lp.variables, conj(lp.guard, negate(disj(*bad))), lp.spaths, lp.stmt)
        summary = summarize_paths(lp, self.solver, max_cases=self.options.max_cases,
                                  max_values=self.options.max_interval_values,
                                  from_nested=id(s) in self.rebuilt).summary
        if not summary.success:
            return self._give_up(routes, keys, summary.failure.reason)
        guard = loop_paths_from_stmt(s, self.variables, loop_id, self.options.max_paths).guard
        out = []
        for r in routes:
            base = {pre(v): r.env[v] for v in self.variables}
            for case in summary.cases:
                if case.diverges:
                    continue
                pieces = list(r.pieces)
                subst = dict(base)
                for st in case.steps:
                    if isinstance(st, LetStep):
                        new = self._name("__n")
                        pieces.append(LetStep(new, st.value.substitute(subst)))
                        subst[st.name] = sym(new)
                    else:
                        pieces.append(GuardStep(bsubstitute(st.cond, subst)))
                post = {v: case.post[v].substitute(subst) for v in self.variables}
                at_post = {pre(v): post[v] for v in self.variables}
                g_post = bsubstitute(guard, at_post)
                for k, fs in fails.items():
                    viol = conj(g_post, bsubstitute(disj(*fs), at_post))
                    self.queries.append(Query(k, pieces + [GuardStep(viol)], list(r.draws), r.unknown))
                if keys:
                    pieces.append(GuardStep(negate(g_post)))
                out.append(Route(pieces, post, list(r.draws), r.unknown))
        return out

    def _give_up(self, routes: list[Route], keys, reason: str) -> list[Route]:
        for k in keys:
            self.unknown_keys.setdefault(k, reason)
        for r in routes:
            r.unknown = r.unknown or reason
        return routes


def _constraint(p: Piece) -> Bool:
    return p.cond if isinstance(p, GuardStep) else eq(sym(p.name), p.value)


def _has_opaque(b: Bool) -> bool:
    return any(isinstance(a, Opaque) for e in bexprs(b) for a in e.all_atoms())


def _run_pieces(pieces: list[Piece], env: dict[str, int]) -> Optional[dict[str, int]]:
    """Evaluate ``pieces`` in order; the extended environment when all guards hold."""
    env = dict(env)
    try:
        for p in pieces:
            if isinstance(p, LetStep):
                env[p.name] = p.value.evaluate_int(env)
            elif not bevaluate(p.cond, env):
                return None
    except Divergence:
        return None
    return env


class _Decider:
    def __init__(self, ast: ProgramAst, solver: Solver, nondet_range: tuple[int, int], fuel: int):
        self.ast = ast
        self.solver = solver
        self.nondet_range = nondet_range
        self.fuel = fuel

    def decide(self, q: Query) -> tuple[str, Optional[dict], str]:
        """``(status, witness, reason)`` for one violation query."""
        if q.unknown:
            return UNKNOWN, None, q.unknown
        res = self.solver.check([_constraint(p) for p in q.pieces])
        if res.status == UNSAT:
            return HOLDS, None, ""
        if res.status == SAT:
            w = self.witness(q, res.model)
            if self.replays(q.key, w):
                return VIOLATED, w, ""
        else:
            # dropping what the solver cannot encode only widens the query
            relaxed = [c for c in map(_constraint, q.pieces) if not _has_opaque(c)]
            if self.solver.check(relaxed).status == UNSAT:
                return HOLDS, None, ""
        return self.enumerate(q, QUERY_UNDECIDED if res.status != SAT else WITNESS_NOT_REPLAYED)

    def _domains(self, q: Query) -> Optional[list[tuple[str, range]]]:
        used: set[str] = set()
        lets = set()
        for p in q.pieces:
            if isinstance(p, LetStep):
                lets.add(p.name)
                used |= p.value.free_symbols()
            else:
                used |= bfree_symbols(p.cond)
        used -= lets
        out = []
        for d in self.ast.inputs:
            if pre(d.name) in used:
                if not d.bounded:
                    return None
                out.append((pre(d.name), range(d.lo, d.hi + 1)))
        lo, hi = self.nondet_range
        for _, name, _ in q.draws:
            if name in used:
                out.append((name, range(lo, hi + 1)))
        return out

    def enumerate(self, q: Query, reason: str) -> tuple[str, Optional[dict], str]:
        doms = self._domains(q)
        if doms is None or prod(len(r) for _, r in doms) > ENUM_LIMIT:
            return UNKNOWN, None, reason
        names = [n for n, _ in doms]
        for values in itertools.product(*(r for _, r in doms)):
            env = _run_pieces(q.pieces, dict(zip(names, values)))
            if env is None:
                continue
            w = self.witness(q, env)
            if self.replays(q.key, w):
                return VIOLATED, w, ""
            return UNKNOWN, None, WITNESS_NOT_REPLAYED
        return HOLDS, None, ""

    def witness(self, q: Query, model: dict[str, int]) -> dict:
        inputs = {}
        for d in self.ast.inputs:
            default = 0 if d.lo is None else max(d.lo, 0 if d.hi is None else min(0, d.hi))
            inputs[d.name] = int(model.get(pre(d.name), default))
        draws = [int(model.get(n, 0)) for kind, n, _ in q.draws if kind == "draw"]
        loops = {line: max(0, int(model.get(n, 0))) for kind, n, line in q.draws if kind == "loop"}
        out: dict = {"inputs": inputs}
        if draws:
            out["nondet"] = draws
        if loops:
            out["nondet_loops"] = {str(k): v for k, v in sorted(loops.items())}
        return out

    def replays(self, key: tuple[int, int], w: dict) -> bool:
        loops = {int(k): v for k, v in w.get("nondet_loops", {}).items()}
        src = ScriptedNondet(w.get("nondet", []), loops, self.nondet_range)
        st = interpret(self.ast, w["inputs"], fuel=self.fuel, nondet=src)
        return st.status == Status.ASSERT_FAILED and st.location == key


def _assertions(body: tuple[Stmt, ...], depth: int = 0):
    """``(assert, loop depth)`` in source order."""
    for s in body:
        if isinstance(s, Assert):
            yield s, depth
        elif isinstance(s, If):
            yield from _assertions(s.then, depth)
            yield from _assertions(s.orelse, depth)
        elif isinstance(s, While):
            yield from _assertions(s.body, depth + 1)


def verify(ast: ProgramAst, options: Optional[Options] = None,
           solver: Optional[Solver] = None) -> list[Verdict]:
    """One verdict per assertion of ``ast``, in source order."""
    options = options or Options()
    options.validate()
    solver = solver or options.make_solver()
    nd_range = ast.nondet_range or DEFAULT_NONDET_RANGE
    verdicts: dict[tuple[int, int], Verdict] = {}
    for a, depth in _assertions(ast.body):
        v = Verdict(a.line, a.column, format_expr(a.cond), "loop" if depth else "top")
        if depth > 1:
            v.status, v.reason = UNKNOWN, "assertion inside an inner loop"
        verdicts[(a.line, a.column)] = v
    if not verdicts:
        return []

    def all_unknown(reason: str) -> list[Verdict]:
        for v in verdicts.values():
            v.status, v.reason, v.witness = UNKNOWN, reason, None
        return list(verdicts.values())

    prog = canonical_program(rewrite_nondet_loops(ast))
    try:
        flat, _, rebuilt = flatten(prog, options, solver)
        ex = _Executor(flat, options, solver, rebuilt, nd_range)
        ex.run()
    except SummaryFailure as exc:
        return all_unknown(exc.reason)
    decider = _Decider(ast, solver, nd_range, options.fuel)
    unknown: dict[tuple[int, int], str] = dict(ex.unknown_keys)
    for q in ex.queries:
        v = verdicts[q.key]
        if v.status != HOLDS:
            continue
        status, w, reason = decider.decide(q)
        if status == VIOLATED:
            v.status, v.witness = VIOLATED, w
        elif status == UNKNOWN:
            unknown.setdefault(q.key, reason)
    for key, reason in unknown.items():
        v = verdicts[key]
        if v.status == HOLDS:
            v.status, v.reason = UNKNOWN, reason
    return list(verdicts.values())
