"""Offline solver for linear integer constraints with disjunctions.

Floor division and modulo by literals are linearized with auxiliary
quotient variables.  Disjunctions are split lazily: only a disjunction
that the current candidate model violates is branched on.
"""

from __future__ import annotations

import time
from typing import Optional

from ..symexpr import (
    And,
    BConst,
    Bool,
    Expr,
    FloorDiv,
    InSet,
    Lit,
    Or,
    Sym,
    bevaluate,
    conj,
    in_set,
    lit,
    sym,
)
from .constraints import SAT, UNKNOWN, UNSAT, ConstraintSet, SolveResult, linearizable
from .lp import DEFAULT_BOX, Unknown, solve_int


class _Linearizer:
    def __init__(self) -> None:
        self.aux: dict[str, Expr] = {}
        self.extra: list[Bool] = []
        self.count = 0

    def expr(self, e: Expr) -> Expr:
        if all(isinstance(a, Sym) for a in e.atoms()):
            return e
        out = Expr()
        for m, c in e.terms:
            term = Expr.const(c)
            for atom, p in m:
                term = term * self.atom(atom) if p == 1 else term * _pow(self.atom(atom), p)
            out = out + term
        return out

    def atom(self, a) -> Expr:
        if isinstance(a, Sym):
            return Expr.atom(a)
        key = a.text()
        if key in self.aux:
            return self.aux[key]
        inner = self.expr(a.num)
        q = sym(f"__q{self.count}")
        self.count += 1
        m = a.den
        # m*q <= inner <= m*q + m - 1
        self.extra.append(lit(q.scale(m) - inner, "<="))
        self.extra.append(lit(inner - q.scale(m) - (m - 1), "<="))
        val = q if isinstance(a, FloorDiv) else inner - q.scale(m)
        self.aux[key] = val
        return val

    def bool(self, b: Bool) -> Bool:
        if isinstance(b, BConst):
            return b
        if isinstance(b, Lit):
            return lit(self.expr(b.expr), b.op)
        if isinstance(b, InSet):
            return in_set(self.expr(b.expr), b.iset)
        if isinstance(b, And):
            return conj(*(self.bool(a) for a in b.args))
        return Or(tuple(self.bool(a) for a in b.args))


def _pow(e: Expr, p: int) -> Expr:
    out = Expr.const(1)
    for _ in range(p):
        out = out * e
    return out


def _row(b: Lit) -> tuple[dict[str, int], int]:
    form = b.expr.linear_form()
    assert form is not None, b.text()
    coeffs, c = form
    return {v: int(k) for v, k in coeffs.items()}, -int(c)


def _literal_rows(b: Lit) -> list[tuple[dict[str, int], int]]:
    if b.op == "<=":
        return [_row(b)]
    coeffs, bound = _row(b)  # op '=='
    neg = {v: -c for v, c in coeffs.items()}
    return [(coeffs, bound), (neg, -bound)]


def _options(b: Bool) -> list[Bool]:
    """Alternatives of a disjunctive item."""
    if isinstance(b, Or):
        return list(b.args)
    if isinstance(b, InSet):
        return [in_set(b.expr, part) for part in b.iset.components()]
    if isinstance(b, Lit) and b.op == "!=":
        return [lit(b.expr + 1, "<="), lit(-b.expr + 1, "<=")]
    raise TypeError(b)


class BuiltinSolver:
    name = "builtin"

    def __init__(self, box: int = DEFAULT_BOX, node_budget: int = 500, branch_budget: int = 2000):
        self.box = box
        self.node_budget = node_budget
        self.branch_budget = branch_budget

    def supports(self, cs: ConstraintSet) -> bool:
        return all(linearizable(c) for c in cs.constraints)

    def check(self, cs: ConstraintSet) -> SolveResult:
        t0 = time.perf_counter()
        if not self.supports(cs):
            return SolveResult(UNKNOWN, backend=self.name, reason="non-linear constraint")
        lin = _Linearizer()
        items = [lin.bool(c) for c in cs.constraints]
        items.extend(lin.extra)
        flat: list[Bool] = []
        for it in items:
            flat.extend(it.args if isinstance(it, And) else (it,))
        budget = [self.branch_budget]
        try:
            model = self._search(flat, budget)
        except Unknown as exc:
            return SolveResult(UNKNOWN, backend=self.name, reason=str(exc),
                               seconds=time.perf_counter() - t0)
        dt = time.perf_counter() - t0
        if model is None:
            return SolveResult(UNSAT, backend=self.name, seconds=dt)
        wanted = cs.free_symbols
        model = {k: v for k, v in model.items() if k in wanted}
        for s in wanted:
            model.setdefault(s, 0)
        if not cs.holds(model):  # pragma: no cover - defensive re-check
            return SolveResult(UNKNOWN, backend=self.name, reason="model failed validation", seconds=dt)
        return SolveResult(SAT, dict(sorted(model.items())), dt, self.name)

    def _search(self, items: list[Bool], budget: list[int]) -> Optional[dict[str, int]]:
        budget[0] -= 1
        if budget[0] < 0:
            raise Unknown("disjunction budget exhausted")
        rows = []
        disj: list[Bool] = []
        variables: set[str] = set()
        for it in items:
            if isinstance(it, BConst):
                if not it.value:
                    return None
                continue
            if isinstance(it, Lit) and it.op != "!=":
                rows.extend(_literal_rows(it))
                variables |= it.expr.free_symbols()
            else:
                disj.append(it)
                for e in _exprs(it):
                    variables |= e.free_symbols()
        names = sorted(variables)
        lo = {v: -self.box for v in names}
        hi = {v: self.box for v in names}
        model = solve_int(rows, names, lo, hi, self.node_budget)
        if model is None:
            return None
        pending = next((d for d in disj if not bevaluate(d, model)), None)
        if pending is None:
            return model
        base = [it for it in items if it is not pending]
        for opt in _options(pending):
            extra = list(opt.args) if isinstance(opt, And) else [opt]
            res = self._search(base + extra, budget)
            if res is not None:
                return res
        return None


def _exprs(b: Bool) -> list[Expr]:
    if isinstance(b, (Lit, InSet)):
        return [b.expr]
    if isinstance(b, (And, Or)):
        return [e for a in b.args for e in _exprs(a)]
    return []
