"""Constraint sets and solver results."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..symexpr import (
    And,
    BConst,
    Bool,
    FloorDiv,
    InSet,
    Lit,
    Mod,
    Or,
    Sym,
    bevaluate,
    bexprs,
    bfree_symbols,
)

LINEAR = "LINEAR"
POLYNOMIAL = "POLYNOMIAL"
OPAQUE = "OPAQUE"
_TIER_RANK = {LINEAR: 0, POLYNOMIAL: 1, OPAQUE: 2}

SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"


def expr_tier(e) -> str:
    tier = LINEAR
    for m, _ in e.terms:
        deg = sum(p for _, p in m)
        for atom, _ in m:
            if not isinstance(atom, Sym):
                return OPAQUE
        if deg > 1:
            tier = POLYNOMIAL
    return tier


def bool_tier(b: Bool) -> str:
    tier = LINEAR
    for e in bexprs(b):
        t = expr_tier(e)
        if _TIER_RANK[t] > _TIER_RANK[tier]:
            tier = t
    return tier


def linearizable(b: Bool) -> bool:
    """True when every atom is a symbol or floor/mod of a linearizable expression."""
    for e in bexprs(b):
        if not _lin_expr(e):
            return False
    return True


def _lin_expr(e) -> bool:
    for m, _ in e.terms:
        if sum(p for _, p in m) > 1:
            return False
        for atom, _ in m:
            if isinstance(atom, (FloorDiv, Mod)):
                if not _lin_expr(atom.num):
                    return False
            elif not isinstance(atom, Sym):
                return False
    return True


@dataclass
class ConstraintSet:
    constraints: list[Bool]

    def __init__(self, constraints: Iterable[Bool] = ()):
        self.constraints = [c for c in constraints if not (isinstance(c, BConst) and c.value)]

    @property
    def free_symbols(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for c in self.constraints:
            out |= bfree_symbols(c)
        return out

    @property
    def tier(self) -> str:
        tier = LINEAR
        for c in self.constraints:
            t = bool_tier(c)
            if _TIER_RANK[t] > _TIER_RANK[tier]:
                tier = t
        return tier

    def key(self) -> tuple[str, ...]:
        return tuple(sorted({c.text() for c in self.constraints}))

    def holds(self, model: dict[str, int]) -> bool:
        try:
            return all(bevaluate(c, model) for c in self.constraints)
        except (KeyError, ValueError, ArithmeticError):
            return False

    def text(self) -> str:
        return "{" + ", ".join(c.text() for c in self.constraints) + "}"


@dataclass
class SolveResult:
    status: str
    model: dict[str, int] = field(default_factory=dict)
    seconds: float = 0.0
    backend: str = ""
    reason: str = ""

    @property
    def sat(self) -> bool:
        return self.status == SAT

    @property
    def unsat(self) -> bool:
        return self.status == UNSAT

    def __repr__(self) -> str:
        extra = f", model={self.model}" if self.status == SAT else ""
        why = f", reason={self.reason!r}" if self.reason else ""
        return f"SolveResult({self.status}{extra}{why})"


def is_atomic(b: Bool) -> bool:
    return isinstance(b, (Lit, BConst))


def has_disjunction(b: Bool) -> bool:
    if isinstance(b, (Or, InSet)):
        return True
    if isinstance(b, And):
        return any(has_disjunction(a) for a in b.args)
    return False


def first_model_symbols(model: Optional[dict[str, int]]) -> list[str]:
    return sorted(model or {})
