"""Replacing inner loops by the straight-line code of their summaries.

Innermost loops are summarized first; each is replaced by an
``if``/``else`` chain whose branches are the summary cases, with the
iteration counts inlined into the assignments.  The parent loop is then
an ordinary non-nested loop and can be summarized in turn.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Callable

from ..program import (
    Binary,
    BoolLit,
    Embedded,
    Exp,
    If,
    Num,
    ParAssign,
    ProgramAst,
    Stmt,
    Unary,
    Var,
    While,
    contains_loop,
)
from ..symexpr import (
    And,
    BConst,
    Bool,
    Divergence,
    Expr,
    FloorDiv,
    InSet,
    Lit,
    Mod,
    Opaque,
    Or,
    Sym,
    const,
    is_pre,
    pre,
    sym,
    unpre,
)
from .model import NOT_SUMMARIZABLE, Summary, SummaryFailure


class NoExit(Opaque):
    """Marks a spliced branch on which the inner loop never terminates."""

    def __init__(self, args=()):
        super().__init__(args)

    def label(self) -> str:
        return "no_exit"

    def rebuild(self, args):
        return NoExit(args)

    def compute(self, values):
        raise Divergence("inner loop does not terminate")


# -- symbolic expressions back to source ---------------------------------------------


def expr_to_ast(e: Expr) -> Exp:
    """Source expression with the value of ``e`` (pre-state symbols become variables)."""
    denom = 1
    for _, c in e.terms:
        if isinstance(c, Fraction):
            denom = lcm(denom, c.denominator)
    if denom != 1:
        # the value is integral, so scaling up and dividing back is exact
        return Binary("/", expr_to_ast(e.scale(denom)), Num(denom))
    out: Exp | None = None
    for mono, c in e.terms:
        factors = [_atom_ast(a) for a, p in mono for _ in range(p)]
        mag = abs(c)
        if not factors:
            term: Exp = Num(mag)
        else:
            term = factors[0]
            for f in factors[1:]:
                term = Binary("*", term, f)
            if mag != 1:
                term = Binary("*", Num(mag), term)
        if out is None:
            out = term if c > 0 else (Num(c) if not factors else Unary("-", term))
        else:
            out = Binary("+" if c > 0 else "-", out, term)
    return Num(0) if out is None else out


def _atom_ast(a) -> Exp:
    if isinstance(a, Sym):
        return Var(unpre(a.name)) if is_pre(a.name) else Var(a.name)
    if isinstance(a, FloorDiv):
        return Binary("/", expr_to_ast(a.num), Num(a.den))
    if isinstance(a, Mod):
        return Binary("%", expr_to_ast(a.num), Num(a.den))
    return Embedded(Expr.atom(a))


def bool_to_ast(b: Bool) -> Exp:
    if isinstance(b, BConst):
        return BoolLit(b.value)
    if isinstance(b, Lit):
        c = b.expr.constant()
        lhs = b.expr - c
        op = b.op
        if lhs.terms and all(k < 0 for _, k in lhs.terms):
            lhs, c = -lhs, -c
            op = {"<=": ">="}.get(op, op)
        return Binary(op, expr_to_ast(lhs), expr_to_ast(const(-c)))
    if isinstance(b, InSet):
        parts = []
        for lo, hi in b.iset.intervals:
            bounds = []
            if lo is not None:
                bounds.append(Binary(">=", expr_to_ast(b.expr), Num(lo)))
            if hi is not None:
                bounds.append(Binary("<=", expr_to_ast(b.expr), Num(hi)))
            parts.append(_fold("&&", bounds) if bounds else BoolLit(True))
        return _fold("||", parts) if parts else BoolLit(False)
    op = "&&" if isinstance(b, And) else "||"
    assert isinstance(b, (And, Or))
    return _fold(op, [bool_to_ast(a) for a in b.args])


def _fold(op: str, items: list[Exp]) -> Exp:
    out = items[0]
    for it in items[1:]:
        out = Binary(op, out, it)
    return out


# -- splicing -----------------------------------------------------------------------------


def splice(summary: Summary, line: int = 0) -> tuple[Stmt, ...]:
    """Straight-line replacement of the summarized loop."""
    if not summary.success:
        raise summary.failure
    chain: tuple[Stmt, ...] = ()
    for case in reversed(summary.cases):
        guard, post, _ = case.inlined()
        if case.diverges:
            names = tuple(summary.variables[:1])
            values = tuple(Embedded(Expr.atom(NoExit())) for _ in names)
            body: tuple[Stmt, ...] = (ParAssign(names, values, line=line),) if names else ()
        else:
            changed = [v for v in summary.variables if post[v] != sym(pre(v))]
            body = ()
            if changed:
                body = (ParAssign(tuple(changed), tuple(expr_to_ast(post[v]) for v in changed),
                                  line=line),)
        if not chain:
            chain = body if guard == BConst(True) else (If(bool_to_ast(guard), body, (), line=line),)
        else:
            chain = (If(bool_to_ast(guard), body, chain, line=line),)
    return chain


def eliminate_nested(ast: ProgramAst, summarize_stmt: Callable[[While, int], Summary]
                     ) -> tuple[ProgramAst, list[Summary], set[int]]:
    """Replace inner loops inside-out until no loop contains another.

    ``summarize_stmt(loop, index)`` summarizes one non-nested loop over
    all program variables.  Top-level loops are kept; only loops nested
    in other loops are replaced.  Also returns the ids of the top-level
    ``While`` objects whose bodies received spliced code.
    """
    inner: list[Summary] = []
    rebuilt: set[int] = set()

    def rewrite(body: tuple[Stmt, ...], depth: int) -> tuple[Stmt, ...]:
        out: list[Stmt] = []
        for s in body:
            if isinstance(s, While):
                new_body = rewrite(s.body, depth + 1)
                loop = While(s.cond, new_body, line=s.line)
                if depth == 0:
                    if contains_loop(s.body):
                        rebuilt.add(id(loop))
                    out.append(loop)
                    continue
                if contains_loop(new_body):  # pragma: no cover - rewrite removed them
                    raise SummaryFailure(NOT_SUMMARIZABLE, "inner loop still nested")
                summary = summarize_stmt(loop, len(inner))
                inner.append(summary)
                out.extend(splice(summary, s.line))
            elif isinstance(s, If):
                out.append(If(s.cond, rewrite(s.then, depth), rewrite(s.orelse, depth), line=s.line))
            else:
                out.append(s)
        return tuple(out)

    body = rewrite(ast.body, 0)
    if not inner:
        return ast, [], set()
    return ProgramAst(ast.inputs, body, ast.bitwidth, ast.nondet_range), inner, rebuilt
