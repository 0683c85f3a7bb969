"""Piecewise loop summaries and their concrete evaluation.

A :class:`SummaryCase` is a straight-line recipe: a sequence of guard
checks and iteration-count bindings over the pre-state, followed by the
post-state map.  Guards are checked in order before any later count is
computed, so a count is never evaluated outside the region where it is
meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor
from typing import Mapping, Optional, Union

from ..symexpr import (
    And,
    BConst,
    Bool,
    Divergence,
    Expr,
    Lit,
    Opaque,
    bevaluate,
    bsubstitute,
    conj,
    const,
    pre,
    sym,
    unpre,
)

# failure reasons
INFINITE_OSCILLATION = "INFINITE_OSCILLATION"
COUPLED_RECURRENCE = "COUPLED_RECURRENCE"
INDUCTIVENESS_TRAP_NESTED = "INDUCTIVENESS_TRAP_NESTED"
CASE_EXPLOSION = "CASE_EXPLOSION"
SOLVER_UNKNOWN = "SOLVER_UNKNOWN"
CLOSED_FORM_UNAVAILABLE = "CLOSED_FORM_UNAVAILABLE"
NOT_SUMMARIZABLE = "NOT_SUMMARIZABLE"
FAILURE_REASONS = frozenset({
    INFINITE_OSCILLATION, COUPLED_RECURRENCE, INDUCTIVENESS_TRAP_NESTED, CASE_EXPLOSION,
    SOLVER_UNKNOWN, CLOSED_FORM_UNAVAILABLE, NOT_SUMMARIZABLE,
})

# provenance tags
ZERO_ORDER = "ZERO_ORDER"
ONE_ORDER = "ONE_ORDER"
HIGH_ORDER_PERIODIC = "HIGH_ORDER_PERIODIC"
HIGH_ORDER_PREPHASE = "HIGH_ORDER_PREPHASE"
COMPOSED = "COMPOSED"

DEFAULT_MAX_CASES = 512
DEFAULT_SEARCH_CAP = 2_000_000


class SummaryFailure(Exception):
    def __init__(self, reason: str, message: str = ""):
        super().__init__(message or reason)
        self.reason = reason
        self.message = message or reason


# -- opaque count atoms ------------------------------------------------------------


class LeastExit(Opaque):
    """Least ``j >= 0`` at which ``cond`` (over pre-state symbols and ``j``) fails.

    Arguments are the values of ``variables`` at the start of the phase;
    evaluation steps ``j`` upward, so it is only used when no symbolic
    count is available.
    """

    __slots__ = ("cond", "index", "variables", "cap", "tag")

    def __init__(self, cond: Bool, index: str, variables: tuple[str, ...], args, cap: int, tag: str):
        super().__init__(args)
        self.cond = cond
        self.index = index
        self.variables = variables
        self.cap = cap
        self.tag = tag

    def label(self) -> str:
        return f"least_exit[{self.tag}]"

    def rebuild(self, args):
        return LeastExit(self.cond, self.index, self.variables, args, self.cap, self.tag)

    def compute(self, values):
        env = {pre(v): x for v, x in zip(self.variables, values)}
        fixed = bsubstitute(self.cond, {k: const(x) for k, x in env.items()})
        exact = _first_false_affine(fixed, self.index)
        if exact is not _SCAN:
            if exact is None:
                raise Divergence("condition holds for every iteration")
            return exact
        for j in range(self.cap):
            env[self.index] = j
            if not bevaluate(self.cond, env):
                return j
        raise Divergence(f"condition still holds after {self.cap} iterations")


_SCAN = object()


def _first_false_affine(cond: Bool, j: str):
    """Least ``j >= 0`` falsifying a conjunction of literals affine in ``j``.

    Returns ``None`` when no such ``j`` exists and ``_SCAN`` when some
    part of ``cond`` is not of that shape.
    """
    if isinstance(cond, BConst):
        return None if cond.value else 0
    best = None
    for c in cond.args if isinstance(cond, And) else (cond,):
        if not isinstance(c, Lit):
            return _SCAN
        split = c.expr.split_linear(j)
        if split is None or not split[0].is_constant() or not split[1].is_constant():
            return _SCAN
        a, b = split[0].constant_value(), split[1].constant_value()
        if c.op == "<=":  # fails once a + b*j > 0
            first = 0 if a > 0 else (floor(Fraction(-a) / b) + 1 if b > 0 else None)
        elif c.op == "==":
            first = 0 if a != 0 else (1 if b != 0 else None)
        else:  # "!=": fails at an integral root
            if b == 0:
                first = 0 if a == 0 else None
            else:
                root = Fraction(-a) / b
                first = int(root) if root.denominator == 1 and root >= 0 else None
        if first is not None and (best is None or first < best):
            best = first
    return best


# -- cases -------------------------------------------------------------------------


@dataclass(frozen=True)
class GuardStep:
    cond: Bool


@dataclass(frozen=True)
class LetStep:
    name: str
    value: Expr


Step = Union[GuardStep, LetStep]


@dataclass
class SummaryCase:
    steps: list[Step]
    post: dict[str, Expr]
    iterations: Expr
    phases: list[str]
    diverges: bool = False

    @property
    def provenance(self) -> str:
        if len(self.phases) == 1:
            return self.phases[0]
        return COMPOSED

    @property
    def guard(self) -> Bool:
        return conj(*(s.cond for s in self.steps if isinstance(s, GuardStep)))

    @property
    def counts(self) -> list[tuple[str, Expr]]:
        return [(s.name, s.value) for s in self.steps if isinstance(s, LetStep)]

    def inlined(self) -> tuple[Bool, dict[str, Expr], Expr]:
        """Guard, post map and iteration count with count bindings substituted."""
        env: dict[str, Expr] = {}
        guards = []
        for s in self.steps:
            if isinstance(s, LetStep):
                env[s.name] = s.value.substitute(env)
            else:
                guards.append(bsubstitute(s.cond, env))
        post = {v: e.substitute(env) for v, e in self.post.items()}
        return conj(*guards), post, self.iterations.substitute(env)

    def matches(self, env: dict[str, int]) -> Optional[dict[str, int]]:
        """Run the guard/count steps; the extended environment if all guards hold."""
        env = dict(env)
        for s in self.steps:
            if isinstance(s, GuardStep):
                try:
                    ok = bevaluate(s.cond, env)
                except (ValueError, ZeroDivisionError):
                    return None
                if not ok:
                    return None
            else:
                env[s.name] = s.value.evaluate_int(env)
        return env

    def to_json(self, variables: list[str]) -> dict:
        return {
            "guard": self.guard.text(),
            "counts": [[n, e.text()] for n, e in self.counts],
            "iterations": self.iterations.text(),
            "post": {v: self.post[v].text() for v in variables},
            "provenance": self.provenance,
            "phases": list(self.phases),
            "diverges": self.diverges,
        }


@dataclass
class Summary:
    loop_id: int
    variables: list[str]
    cases: list[SummaryCase] = field(default_factory=list)
    failure: Optional[SummaryFailure] = None
    notes: list[str] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def success(self) -> bool:
        return self.failure is None

    @property
    def status(self) -> str:
        return "SUCCESS" if self.success else "FAILURE"

    def to_json(self) -> dict:
        out: dict = {"loop": self.loop_id, "status": self.status, "variables": list(self.variables)}
        if self.failure is not None:
            out["failure"] = {"reason": self.failure.reason, "message": self.failure.message}
        out["cases"] = [c.to_json(self.variables) for c in self.cases]
        if self.notes:
            out["notes"] = list(self.notes)
        if self.details:
            out["details"] = self.details
        return out


@dataclass
class CaseResult:
    status: str  # OK, NO_CASE, DIVERGES
    values: dict[str, int] = field(default_factory=dict)
    case_index: Optional[int] = None
    iterations: Optional[int] = None


def evaluate_summary(summary: Summary, state: Mapping[str, int]) -> CaseResult:
    """Evaluate the first case whose guard holds on ``state`` (variable -> value)."""
    env = {pre(v): int(state[v]) for v in summary.variables}
    for idx, case in enumerate(summary.cases):
        try:
            ext = case.matches(env)
            if ext is None:
                continue
            if case.diverges:
                return CaseResult("DIVERGES", case_index=idx)
            values = {v: case.post[v].evaluate_int(ext) for v in summary.variables}
            iters = case.iterations.evaluate_int(ext)
        except Divergence:
            return CaseResult("DIVERGES", case_index=idx)
        return CaseResult("OK", values, idx, iters)
    return CaseResult("NO_CASE")


def identity_post(variables: list[str]) -> dict[str, Expr]:
    return {v: sym(pre(v)) for v in variables}


def post_text(post: Mapping[str, Expr]) -> str:
    return ", ".join(f"{v} = {e.text()}" for v, e in post.items())


def display_expr(e: Expr) -> str:
    """Expression text with pre-state symbols shown as plain variable names."""
    mapping = {s: sym(unpre(s)) for s in e.free_symbols() if s.endswith("₀")}
    return e.substitute(mapping).text()
