"""Satisfiability queries over symbolic integer constraints.

:class:`Solver` picks a backend per query: the built-in linear solver
when the constraints linearize, otherwise the external SMT-LIB2 process.
Results are memoized on the canonical text of the constraint set.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from math import ceil, floor
from typing import Iterable, Optional, TextIO

from ..symexpr import And, Bool, Lit, Pow, bexprs, bsubstitute, const
from .builtin import BuiltinSolver
from .constraints import (
    LINEAR,
    OPAQUE,
    POLYNOMIAL,
    SAT,
    UNKNOWN,
    UNSAT,
    ConstraintSet,
    SolveResult,
)
from .smtlib import DEFAULT_SMT_CMD, SmtLibSolver

EXPONENT_SPLIT = 64  # exponent values tried when splitting on a symbolic exponent

__all__ = [
    "LINEAR",
    "OPAQUE",
    "POLYNOMIAL",
    "SAT",
    "UNKNOWN",
    "UNSAT",
    "ConstraintSet",
    "SolveResult",
    "Solver",
    "check",
]


class Solver:
    """Backend dispatcher with a thread-safe memo cache.

    ``backend`` is ``"auto"`` (built-in first, SMT when the built-in
    solver cannot decide), ``"builtin"`` or ``"smt"``.
    """

    def __init__(self, smt_cmd: str = DEFAULT_SMT_CMD, timeout_ms: int = 5000,
                 backend: str = "auto", log: Optional[TextIO] = None):
        if backend not in ("auto", "builtin", "smt"):
            raise ValueError(f"unknown backend {backend!r}")
        self.backend = backend
        self.builtin = BuiltinSolver()
        self.smt = SmtLibSolver(smt_cmd, timeout_ms, log)
        self._cache: dict[tuple[str, ...], SolveResult] = {}
        self._lock = threading.Lock()
        self.stats = {"queries": 0, "cache_hits": 0, "unknown": 0}
        self.timeouts = 0

    def check(self, constraints: Iterable[Bool] | ConstraintSet) -> SolveResult:
        cs = constraints if isinstance(constraints, ConstraintSet) else ConstraintSet(constraints)
        key = cs.key()
        with self._lock:
            self.stats["queries"] += 1
            hit = self._cache.get(key)
            if hit is not None:
                self.stats["cache_hits"] += 1
                return hit
        res = self._solve(cs)
        with self._lock:
            if res.status == UNKNOWN:
                self.stats["unknown"] += 1
            self._cache[key] = res
        return res

    def _solve(self, cs: ConstraintSet) -> SolveResult:
        if not cs.constraints:
            return SolveResult(SAT, {}, 0.0, "trivial")
        split = _exponent_symbol(cs)
        if split is not None:
            return self._split_exponent(cs, split)
        res = None
        if self.backend in ("auto", "builtin") and self.builtin.supports(cs):
            res = self.builtin.check(cs)
            if res.status != UNKNOWN or self.backend == "builtin":
                return res
        if self.backend == "builtin":
            return SolveResult(UNKNOWN, backend="builtin", reason="outside the linear fragment")
        smt = self.smt.check(cs)
        if smt.status == UNKNOWN and "timeout" in smt.reason:
            self.timeouts += 1
        if smt.status == UNKNOWN and res is not None:
            return res
        return smt

    def _split_exponent(self, cs: ConstraintSet, name: str) -> SolveResult:
        """Decide ``cs`` by trying each value of the exponent symbol ``name``.

        Neither backend handles ``b^n`` with symbolic ``n``.  A model found
        for one value is a model of ``cs``; UNSAT needs every value in the
        range fixed by unit bounds on ``name`` to be UNSAT.
        """
        lo, hi = _unit_bounds(cs, name)
        lo = 0 if lo is None else max(lo, 0)
        stop = lo + EXPONENT_SPLIT if hi is None else min(hi, lo + EXPONENT_SPLIT - 1) + 1
        undecided = ""
        for v in range(lo, stop):
            try:
                fixed = [bsubstitute(c, {name: const(v)}) for c in cs.constraints]
            except ValueError:  # a negative exponent: no model with this value
                continue
            res = self.check(fixed)
            if res.status == SAT:
                model = dict(res.model)
                model[name] = v
                return SolveResult(SAT, dict(sorted(model.items())), res.seconds, res.backend)
            if res.status == UNKNOWN:
                undecided = undecided or res.reason
        if hi is not None and stop > hi and not undecided:
            return SolveResult(UNSAT, backend="exponent-split")
        reason = undecided or f"exponent {name} not bounded within {EXPONENT_SPLIT} values"
        return SolveResult(UNKNOWN, backend="exponent-split", reason=reason)

    def satisfiable(self, constraints: Iterable[Bool]) -> Optional[bool]:
        """True/False when decided, ``None`` when unknown."""
        res = self.check(constraints)
        if res.status == UNKNOWN:
            return None
        return res.status == SAT


def _exponent_symbol(cs: ConstraintSet) -> Optional[str]:
    """The single symbol occurring in exponents of ``cs``, if there is exactly one."""
    names: set[str] = set()
    for c in cs.constraints:
        for e in bexprs(c):
            for a in e.all_atoms():
                if isinstance(a, Pow):
                    names |= a.exp.free_symbols()
    return next(iter(names)) if len(names) == 1 else None


def _unit_bounds(cs: ConstraintSet, name: str) -> tuple[Optional[int], Optional[int]]:
    lo = hi = None
    for c in cs.constraints:
        for part in c.args if isinstance(c, And) else (c,):
            if not isinstance(part, Lit) or part.op != "<=" or part.expr.free_symbols() != {name}:
                continue
            form = part.expr.linear_form()
            if form is None:
                continue
            coeffs, k = form
            a = coeffs[name]
            # a*n + k <= 0
            if a > 0:
                b = floor(Fraction(-k) / a)
                hi = b if hi is None else min(hi, b)
            else:
                b = ceil(Fraction(-k) / a)
                lo = b if lo is None else max(lo, b)
    return lo, hi


_default: Optional[Solver] = None


def default_solver() -> Solver:
    global _default
    if _default is None:
        _default = Solver()
    return _default


def check(constraints: Iterable[Bool] | ConstraintSet) -> SolveResult:
    return default_solver().check(constraints)
