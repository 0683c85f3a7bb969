"""Iteration counts and closed forms of per-iteration updates.

``min_iterations`` is the solver-driven descending search: find any
``n`` whose predecessor iteration still satisfies the loop condition
while ``n`` itself does not, then keep demanding a smaller ``n`` until
the query becomes unsatisfiable.  ``first_failure`` derives the same
count symbolically when the condition is linear in the iteration index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional

from ..symexpr import (
    FALSE,
    TRUE,
    Bool,
    Expr,
    Lit,
    Opaque,
    Pow,
    Sym,
    bsubstitute,
    conj,
    const,
    floordiv,
    gt,
    le,
    lt,
    negate,
    power,
    pre,
    sym,
    And,
)

MAX_REFINEMENT_ROUNDS = 10**6

COUPLED_RECURRENCE = "COUPLED_RECURRENCE"
CLOSED_FORM_UNAVAILABLE = "CLOSED_FORM_UNAVAILABLE"


class ClosedFormError(Exception):
    def __init__(self, reason: str, message: str, opaque: bool = False):
        super().__init__(message)
        self.reason = reason
        self.opaque = opaque


# -- Alg. 2: descending refinement --------------------------------------------------


@dataclass
class IterationResult:
    status: str  # FOUND, ZERO, NO_SOLUTION, UNKNOWN
    value: Optional[int] = None
    rounds: int = 0
    history: list[int] = field(default_factory=list)
    reason: str = ""


def min_iterations(holds_at: Callable[[Expr], Bool], solver, extra: Iterable[Bool] = (),
                   n_name: str = "n", max_rounds: int = MAX_REFINEMENT_ROUNDS) -> IterationResult:
    """Least ``n > 0`` with ``holds_at(n-1)`` and not ``holds_at(n)``.

    ``holds_at(k)`` is the loop condition on the state after ``k``
    iterations.  ``extra`` typically pins the inputs to concrete values.
    """
    extra = list(extra)
    n = sym(n_name)
    res0 = solver.check([negate(holds_at(const(0)))] + extra)
    if res0.status == "SAT" and not solver.check([holds_at(const(0))] + extra).sat:
        return IterationResult("ZERO", 0)
    base = [gt(n, 0), holds_at(n - 1), negate(holds_at(n))] + extra
    res = solver.check(base)
    if res.status == "UNSAT":
        return IterationResult("NO_SOLUTION", reason="condition never fails")
    if res.status != "SAT":
        return IterationResult("UNKNOWN", reason=res.reason)
    n_val = res.model.get(n_name, 1)
    history = [n_val]
    rounds = 1
    while rounds < max_rounds:
        res = solver.check(base + [lt(n, n_val)])
        rounds += 1
        if res.status == "UNSAT":
            return IterationResult("FOUND", n_val, rounds, history)
        if res.status != "SAT":
            return IterationResult("UNKNOWN", rounds=rounds, history=history, reason=res.reason)
        n_val = res.model[n_name]
        history.append(n_val)
    return IterationResult("UNKNOWN", rounds=rounds, history=history, reason="refinement cap reached")


# -- symbolic first failure ---------------------------------------------------------------


@dataclass
class CountCase:
    """Under ``guard``, the condition first fails after ``count`` iterations."""

    guard: Bool
    count: Expr


def first_failure(cond_k: Bool, k: str) -> Optional[list[CountCase]]:
    """Symbolic least ``k >= 0`` at which ``cond_k`` is false.

    ``cond_k`` must be a conjunction of literals affine in ``k`` with
    constant coefficients.  Literals that never fail as ``k`` grows are
    ignored; the result is one case per literal that can fail (the
    minimum over them, split by guards).  Returns ``[]`` when no literal
    can ever fail, ``None`` when the shape is not supported.
    """
    lits = [cond_k] if not isinstance(cond_k, And) else list(cond_k.args)
    if cond_k == TRUE:
        return []
    if cond_k == FALSE:
        return [CountCase(TRUE, const(0))]
    fails: list[Expr] = []  # candidate first-failure index per literal
    for lt_ in lits:
        if not isinstance(lt_, Lit):
            return None
        split = lt_.expr.split_linear(k)
        if split is None:
            return None
        a, b = split
        if not b.is_constant():
            return None
        bc = b.constant_value()
        if bc == 0:
            # invariant literal: it either fails at 0 or never
            fails.append(None)
            continue
        if lt_.op == "<=":
            if bc < 0:
                fails.append(None)
                continue
            # a + bc*k <= 0  <=>  k <= floor(-a / bc)
            fails.append(floordiv(-a, bc) + 1)
        elif lt_.op == "==":
            # an equality moving with k holds at most once
            fails.append(const(1))
        else:
            return None
    cands = [f for f in fails if f is not None]
    # invariant literals and literals at k=0 are folded in by clamping at zero
    zero_guard = conj(*(bsubstitute(l, {k: const(0)}) for l in lits))
    if not cands:
        return [CountCase(negate(zero_guard), const(0))]
    out = [CountCase(negate(zero_guard), const(0))]
    for i, c in enumerate(cands):
        g = [zero_guard]
        for j, d in enumerate(cands):
            if j < i:
                g.append(lt(c, d))
            elif j > i:
                g.append(le(c, d))
        out.append(CountCase(conj(*g), c))
    return out


# -- closed forms ---------------------------------------------------------------------


def _sum_poly(r: Expr, k: str, n: Expr) -> Optional[Expr]:
    """``sum_{k=0}^{n-1} r(k)`` for ``r`` polynomial in ``k`` plus ``c * b^k`` terms."""
    geo = Expr()
    poly: dict = {}
    for m, c in r.terms:
        pows = [(a, p) for a, p in m if isinstance(a, Pow) and k in a.free_symbols()]
        if not pows:
            poly[m] = c
            continue
        rest = Expr({tuple((a, p) for a, p in m if (a, p) not in pows): c})
        if len(pows) != 1 or pows[0][1] != 1 or pows[0][0].exp != sym(k) or k in rest.free_symbols():
            return None
        b = pows[0][0].base
        geo = geo + rest * (power(b, n) - 1).scale(Fraction(1, b - 1))
    r = Expr(poly)
    coeffs = r.poly_coeffs(k)
    if coeffs is None:
        return None
    d = len(coeffs) - 1
    if d == 0:
        return coeffs[0] * n + geo
    # S is a polynomial of degree d+1 in n; interpolate through n = 0..d+1
    pts = list(range(d + 2))
    vals = []
    acc = Expr()
    for m in pts:
        vals.append(acc)
        acc = acc + r.substitute({k: const(m)})
    total = Expr()
    for i, xi in enumerate(pts):
        basis = const(1)
        for j, xj in enumerate(pts):
            if i != j:
                basis = basis * (n - xj).scale(Fraction(1, xi - xj))
        total = total + vals[i] * basis
    return total + geo


def closed_form(op: Mapping[str, Expr], variables: list[str], count: str = "N") -> dict[str, Expr]:
    """Value of every variable after ``count`` iterations of ``op``.

    ``op`` maps each variable to its one-iteration update over pre-state
    symbols.  Supported: identity, translation by loop-invariant or
    polynomially growing amounts, constant-coefficient geometric
    updates, and variables reset from already solved ones (valid for
    ``count >= 1``).  Coupled updates raise ``COUPLED_RECURRENCE``.
    """
    pre_of = {v: pre(v) for v in variables}
    deps: dict[str, set[str]] = {}
    for v in variables:
        syms = op[v].free_symbols()
        deps[v] = {w for w in variables if pre_of[w] in syms and w != v}
    changing = {pre_of[w] for w in variables if op[w] != sym(pre_of[w])}
    order = _topo(variables, deps)
    if order is None:
        raise ClosedFormError(COUPLED_RECURRENCE, "variables update each other cyclically")
    n = sym(count)
    k = "__k"
    solved: dict[str, Expr] = {}  # closed form in terms of count symbol
    from_one: set[str] = set()  # forms that only hold for count >= 1
    for v in order:
        e = op[v]
        pv = pre_of[v]
        if any(not isinstance(a, Sym) and a.free_symbols() & changing for a in e.all_atoms()):
            # floor/mod/opaque terms over loop variables have no closed form here
            raise ClosedFormError(CLOSED_FORM_UNAVAILABLE, f"update of {v} is not a polynomial",
                                  opaque=True)
        if pv not in e.free_symbols():
            solved[v] = e.substitute({pre_of[w]: solved[w].substitute({count: n - 1}) for w in deps[v]})
            from_one.add(v)
            continue
        split = e.split_linear(pv)
        if split is None:
            raise ClosedFormError(CLOSED_FORM_UNAVAILABLE, f"update of {v} is non-linear in {v}")
        rest, a = split
        if not a.is_constant():
            raise ClosedFormError(CLOSED_FORM_UNAVAILABLE, f"update of {v} has a variable multiplier")
        a_val = a.constant_value()
        if deps[v] & from_one:
            # start the recurrence from the state after the first iteration
            at_k = {pre_of[w]: solved[w].substitute({count: sym(k) + 1}) for w in deps[v]}
            base, m = e, n - 1
            from_one.add(v)
        else:
            at_k = {pre_of[w]: solved[w].substitute({count: sym(k)}) for w in deps[v]}
            base, m = sym(pv), n
        r_k = rest.substitute(at_k)
        if a_val == 1:
            s = _sum_poly(r_k, k, m)
            if s is None:
                raise ClosedFormError(CLOSED_FORM_UNAVAILABLE, f"increment of {v} is not polynomial")
            solved[v] = base + s
            continue
        if isinstance(a_val, Fraction) or k in r_k.free_symbols():
            raise ClosedFormError(CLOSED_FORM_UNAVAILABLE, f"geometric update of {v} with varying offset")
        pw = power(a_val, m)
        solved[v] = pw * base + r_k * (pw - 1).scale(Fraction(1, a_val - 1))
    return {v: solved[v] for v in variables}


def _topo(variables: list[str], deps: dict[str, set[str]]) -> Optional[list[str]]:
    order: list[str] = []
    done: set[str] = set()
    remaining = list(variables)
    while remaining:
        progress = False
        for v in list(remaining):
            if deps[v] <= done:
                order.append(v)
                done.add(v)
                remaining.remove(v)
                progress = True
        if not progress:
            return None
    return order


def uses_pow(e: Expr) -> bool:
    return any(isinstance(a, (Pow, Opaque)) for a in e.all_atoms())
