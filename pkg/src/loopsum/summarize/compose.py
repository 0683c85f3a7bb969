"""Composing per-SCC phases into a piecewise loop summary.

A run of the loop visits the SCCs of the contracted SPath graph in
topological order.  Starting from the pre-state, the composer tries every
way to continue (leave the loop, or enter a successor SCC through one of
its phases), keeps the branches whose accumulated guard is satisfiable,
and emits one case per complete route.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..graph import END, HIGH_ORDER, ONE_ORDER, START, Csg, NodeKey, Scc
from ..intervals import IntervalSet
from ..solver import UNSAT
from ..solver.iterations import (
    COUPLED_RECURRENCE as CF_COUPLED,
    ClosedFormError,
    closed_form,
    first_failure,
)
from ..spath import LoopPaths, SPath
from ..symexpr import (
    TRUE,
    Bool,
    Expr,
    bsubstitute,
    conj,
    const,
    ge,
    in_set,
    le,
    mod,
    negate,
    pre,
    sym,
)
from .cycles import CycleTable, PeriodicRun
from .model import (
    CASE_EXPLOSION,
    CLOSED_FORM_UNAVAILABLE,
    COUPLED_RECURRENCE,
    DEFAULT_MAX_CASES,
    DEFAULT_SEARCH_CAP,
    HIGH_ORDER_PERIODIC,
    HIGH_ORDER_PREPHASE,
    INDUCTIVENESS_TRAP_NESTED,
    NOT_SUMMARIZABLE,
    ONE_ORDER as P_ONE,
    ZERO_ORDER as P_ZERO,
    GuardStep,
    LeastExit,
    LetStep,
    Step,
    SummaryCase,
    SummaryFailure,
)
from .oscillation import DEFAULT_MAX_VALUES, Oscillation, analyze

K = "__k"
J = "__j"


@dataclass
class Partial:
    steps: list[Step]
    state: dict[str, Expr]
    iterations: Expr
    phases: list[str]
    node: NodeKey
    visited: frozenset = frozenset()
    in_prephase: bool = False


@dataclass
class HighInfo:
    osc: Oscillation
    table: CycleTable
    prephase: list[tuple[SPath, IntervalSet]] = field(default_factory=list)


class Composer:
    def __init__(self, paths: LoopPaths, csg: Csg, solver, max_cases: int = DEFAULT_MAX_CASES,
                 max_values: int = DEFAULT_MAX_VALUES, from_nested: bool = False,
                 search_cap: int = DEFAULT_SEARCH_CAP):
        self.paths = paths
        self.csg = csg
        self.solver = solver
        self.max_cases = max_cases
        self.max_values = max_values
        self.from_nested = from_nested
        self.search_cap = search_cap
        self.variables = paths.variables
        self.cases: list[SummaryCase] = []
        self.high: dict[int, HighInfo] = {}
        self._forms: dict[int, dict[str, Expr]] = {}
        self._counter = 0

    # -- helpers --------------------------------------------------------------
    def _apply(self, b: Bool, state: dict[str, Expr]) -> Bool:
        return bsubstitute(b, {pre(v): e for v, e in state.items()})

    def _apply_expr(self, e: Expr, state: dict[str, Expr]) -> Expr:
        return e.substitute({pre(v): x for v, x in state.items()})

    def _fresh(self) -> str:
        self._counter += 1
        return f"__n{self._counter}"

    def _feasible(self, steps: list[Step]) -> bool:
        probe = SummaryCase(list(steps), {}, const(0), [])
        guard, _, _ = probe.inlined()
        return self.solver.check([guard]).status != UNSAT

    def _spath(self, index: int) -> SPath:
        return self.csg.graph.spath(index)

    def _form(self, sp: SPath) -> dict[str, Expr]:
        if sp.index not in self._forms:
            if sp.nondet:
                raise SummaryFailure(NOT_SUMMARIZABLE, f"path {sp.name} updates with nondet() values")
            try:
                self._forms[sp.index] = closed_form(sp.op, self.variables, K)
            except ClosedFormError as exc:
                if exc.reason == CF_COUPLED:
                    raise SummaryFailure(COUPLED_RECURRENCE, f"path {sp.name}: {exc}") from exc
                if exc.opaque and self.from_nested:
                    raise SummaryFailure(INDUCTIVENESS_TRAP_NESTED,
                                         f"path {sp.name}: summarized inner loop makes the update "
                                         f"non-inductive ({exc})") from exc
                raise SummaryFailure(CLOSED_FORM_UNAVAILABLE, f"path {sp.name}: {exc}") from exc
        return self._forms[sp.index]

    def _emit(self, p: Partial, steps: list[Step], diverges: bool = False) -> None:
        if len(self.cases) >= self.max_cases:
            raise SummaryFailure(CASE_EXPLOSION, f"more than {self.max_cases} cases")
        # number the counts of each case N1, N2, ... in binding order
        names = {s.name: sym(f"N{i + 1}") for i, s in enumerate(x for x in steps if isinstance(x, LetStep))}
        steps = [LetStep(names[s.name].text(), s.value.substitute(names)) if isinstance(s, LetStep)
                 else GuardStep(bsubstitute(s.cond, names)) for s in steps]
        post = {v: e.substitute(names) for v, e in p.state.items()}
        self.cases.append(SummaryCase(steps, post, p.iterations.substitute(names), list(p.phases),
                                      diverges))

    # -- driver ---------------------------------------------------------------
    def run(self) -> list[SummaryCase]:
        ident = {v: sym(pre(v)) for v in self.variables}
        self._explore(Partial([], ident, const(0), [], START))
        return self.cases

    def _explore(self, p: Partial) -> None:
        g = self.paths.guard
        done = p.steps + [GuardStep(negate(self._apply(g, p.state)))]
        if self._feasible(done):
            self._emit(p, done)
        for nxt in self._continuations(p):
            if self._feasible(nxt.steps):
                self._explore(nxt)
        for sp in self._diverging_entries(p.node):
            steps = p.steps + [GuardStep(conj(self._apply(g, p.state), self._apply(sp.cond, p.state)))]
            if self._feasible(steps):
                self._emit(p, steps, diverges=True)

    def _continuations(self, p: Partial) -> list[Partial]:
        out: list[Partial] = []
        if p.in_prephase:
            info = self.high[p.node]
            out.extend(self._prephases(p, info, p.node))
            out.extend(self._periodic(p, info, p.node))
        for n in self.csg.succs(p.node):
            if n == END:
                continue
            scc = self.csg.get(n)
            out.extend(self._enter(p, scc))
        return out

    def _diverging_entries(self, node: NodeKey) -> list[SPath]:
        """Paths of SCCs that cannot reach the loop exit, entered directly from ``node``."""
        if node == START:
            sources = {START}
        else:
            sources = set(self.csg.get(node).members)
        out = []
        for scc in self.csg.pruned:
            for m in scc.members:
                if any((s, m) in self.csg.graph.edges for s in sources):
                    out.append(self._spath(m))
        return out

    def _enter(self, p: Partial, scc: Scc) -> list[Partial]:
        if scc.order == HIGH_ORDER:
            info = self._high(scc)
            p = replace(p, visited=frozenset())
            return self._prephases(p, info, scc.id) + self._periodic(p, info, scc.id)
        sp = self._spath(scc.members[0])
        if scc.order == ONE_ORDER:
            return self._one_order(p, sp, scc.id, TRUE, P_ONE)
        guard = conj(self._apply(self.paths.guard, p.state), self._apply(sp.cond, p.state))
        if sp.nondet:
            raise SummaryFailure(NOT_SUMMARIZABLE, f"path {sp.name} updates with nondet() values")
        state = {v: self._apply_expr(sp.op[v], p.state) for v in self.variables}
        return [Partial(p.steps + [GuardStep(guard)], state, p.iterations + 1, p.phases + [P_ZERO],
                        scc.id)]

    # -- one-order phases -----------------------------------------------------
    def _one_order(self, p: Partial, sp: SPath, node: int, extra: Bool, tag: str,
                   visited: frozenset = frozenset(), in_prephase: bool = False) -> list[Partial]:
        cf = self._form(sp)
        stay = conj(self.paths.guard, sp.cond, extra)
        after = {pre(v): cf[v].substitute({K: sym(J) + 1}) for v in self.variables}
        q_j = bsubstitute(stay, after)
        entry = GuardStep(self._apply(stay, p.state))
        counts = first_failure(q_j, J)
        if counts == []:
            # the stay condition can never fail once entered
            if self._feasible(p.steps + [entry]):
                self._emit(p, p.steps + [entry], diverges=True)
            return []
        if counts is None:
            least = LeastExit(q_j, J, tuple(self.variables),
                              tuple(p.state[v] for v in self.variables), self.search_cap,
                              f"{self.paths.loop_id}.{sp.name}" + ("" if extra == TRUE else f"|{extra.text()}"))
            counts_list = [(TRUE, Expr.atom(least))]
        else:
            counts_list = [(self._apply(c.guard, p.state), self._apply_expr(c.count, p.state))
                           for c in counts]
        out = []
        for guard, count in counts_list:
            name = self._fresh()
            n = sym(name)
            steps = p.steps + [entry]
            if guard != TRUE:
                steps.append(GuardStep(guard))
            steps.append(LetStep(name, count + 1))
            subst = {pre(v): p.state[v] for v in self.variables}
            subst[K] = n
            state = {v: cf[v].substitute(subst) for v in self.variables}
            out.append(Partial(steps, state, p.iterations + n, p.phases + [tag], node,
                               visited, in_prephase))
        return out

    # -- high-order phases ----------------------------------------------------
    def _high(self, scc: Scc) -> HighInfo:
        if scc.id not in self.high:
            sps = [self._spath(m) for m in scc.members]
            if any(sp.nondet for sp in sps):
                raise SummaryFailure(NOT_SUMMARIZABLE, "oscillating paths use nondet() values")
            osc = analyze(self.paths, sps, self.max_values)
            table = CycleTable.build(osc, f"osc{self.paths.loop_id}_{scc.id}")
            info = HighInfo(osc, table)
            for m in osc.members:
                outside = m.region.difference(osc.o)
                if not outside:
                    continue
                if m.affine is None or m.affine[0] <= 0:
                    raise SummaryFailure(NOT_SUMMARIZABLE, f"path {m.name} moves the control value "
                                         "non-monotonically outside the oscillation interval")
                for comp in outside.components():
                    info.prephase.append((m.spath, comp))
            self.high[scc.id] = info
        return self.high[scc.id]

    def _prephases(self, p: Partial, info: HighInfo, node: int) -> list[Partial]:
        out = []
        xs = sym(pre(info.osc.control))
        for idx, (sp, comp) in enumerate(info.prephase):
            if idx in p.visited:
                continue
            lo, hi = comp.min(), comp.max()
            bounds = conj(TRUE if lo is None else ge(xs, lo), TRUE if hi is None else le(xs, hi))
            out.extend(self._one_order(p, sp, node, bounds, HIGH_ORDER_PREPHASE,
                                       p.visited | {idx}, True))
        return out

    def _periodic(self, p: Partial, info: HighInfo, node: int) -> list[Partial]:
        osc, table = info.osc, info.table
        args = tuple(p.state[v] for v in self.variables)
        x_now = p.state[osc.control]
        base = conj(self._apply(self.paths.guard, p.state), self._apply(osc.param_cond, p.state))
        out = []
        for grp in table.groups:
            name = self._fresh()
            n = sym(name)
            steps = p.steps + [GuardStep(conj(base, _member_of(x_now, grp.values))),
                               LetStep(name, Expr.atom(PeriodicRun(table, "count", args)))]
            state = {}
            for v in self.variables:
                if v in osc.params:
                    state[v] = p.state[v]
                elif v == osc.control and grp.kind == "cycle" and grp.modular is not None:
                    a, c, length = grp.modular
                    state[v] = mod(x_now - a + n.scale(c), length) + a
                else:
                    state[v] = Expr.atom(PeriodicRun(table, v, args))
            out.append(Partial(steps, state, p.iterations + n, p.phases + [HIGH_ORDER_PERIODIC],
                               node))
        return out


def _member_of(x: Expr, values: IntervalSet) -> Bool:
    return in_set(x, values)
