"""Oscillation analysis for SCCs with several SPaths.

The SCC must be steered by a single control variable ``x``: every
member condition is a set of ``x`` values (plus loop-invariant parameter
tests shared by all members), every member updates ``x`` by a function
of ``x`` alone, and every other variable is either invariant or updated
as ``y + h(x)`` / ``e(x)``.  Under those restrictions the control value
sequence is a deterministic walk over integers, so once it is confined
to the finite oscillation interval it must repeat.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..intervals import IntervalSet
from ..spath import LoopPaths, SPath
from ..symexpr import (
    And,
    BConst,
    Bool,
    Expr,
    InSet,
    Lit,
    Or,
    bfree_symbols,
    conj,
    conjuncts,
    pre,
    sym,
)
from .model import INFINITE_OSCILLATION, NOT_SUMMARIZABLE, SummaryFailure

MAX_ROUNDS = 64
DEFAULT_MAX_VALUES = 1_000_000


def region_of(b: Bool, xs: str) -> Optional[IntervalSet]:
    """Set of integers ``x`` satisfying ``b`` (a formula over the symbol ``xs`` only)."""
    if isinstance(b, BConst):
        return IntervalSet.universe() if b.value else IntervalSet.empty()
    if isinstance(b, And):
        out = IntervalSet.universe()
        for a in b.args:
            r = region_of(a, xs)
            if r is None:
                return None
            out = out.intersection(r)
        return out
    if isinstance(b, Or):
        out = IntervalSet.empty()
        for a in b.args:
            r = region_of(a, xs)
            if r is None:
                return None
            out = out.union(r)
        return out
    aff = _affine(b.expr, xs)
    if aff is None:
        return None
    a, c = aff
    if isinstance(b, InSet):
        return b.iset.preimage_affine(a, c)
    assert isinstance(b, Lit)
    if b.op == "<=":
        return IntervalSet.closed(None, 0).preimage_affine(a, c)
    zero = IntervalSet.point(0).preimage_affine(a, c)
    return zero if b.op == "==" else zero.complement()


def _affine(e: Expr, xs: str) -> Optional[tuple[int, int]]:
    split = e.split_linear(xs)
    if split is None:
        return None
    rest, a = split
    if not (rest.is_constant() and a.is_constant()):
        return None
    a, c = a.constant_value(), rest.constant_value()
    if a != int(a) or c != int(c):
        return None
    return int(a), int(c)


@dataclass
class Member:
    spath: SPath
    region: IntervalSet
    fx: Expr  # new control value, over the pre-state control symbol
    affine: Optional[tuple[int, int]]
    updates: dict[str, tuple[str, Expr]]  # var -> ("add" | "set", expr over the control symbol)

    @property
    def name(self) -> str:
        return self.spath.name

    def step(self, x: int, xs: str) -> int:
        if self.affine is not None:
            return self.affine[0] * x + self.affine[1]
        return self.fx.evaluate_int({xs: x})

    def image(self, a: IntervalSet, xs: str, cap: int) -> IntervalSet:
        part = a.intersection(self.region)
        if self.affine is not None:
            return part.image_affine(*self.affine)
        n = part.count()
        if n is None or n > cap:
            raise SummaryFailure(INFINITE_OSCILLATION, f"image of {part.text()} under {self.name} "
                                 "is too large to enumerate")
        return IntervalSet.from_values(self.step(v, xs) for v in part)


@dataclass
class Oscillation:
    """Oscillation structure of one high-order SCC."""

    paths: LoopPaths
    control: str
    params: list[str]
    others: list[str]
    param_cond: Bool
    members: list[Member]
    region: IntervalSet
    intervals: dict[str, dict[str, IntervalSet]] = field(default_factory=dict)
    o: IntervalSet = field(default_factory=IntervalSet.empty)
    rounds: int = 0
    history: list[IntervalSet] = field(default_factory=list)

    @property
    def xs(self) -> str:
        return pre(self.control)

    def member_at(self, x: int) -> Optional[Member]:
        for m in self.members:
            if x in m.region:
                return m
        return None

    def describe(self) -> dict:
        return {
            "control": self.control,
            "params": self.params,
            "region": self.region.text(),
            "intervals": {n: {k: v.text() for k, v in iv.items()} for n, iv in self.intervals.items()},
            "oscillation": self.o.text(),
            "rounds": self.rounds,
        }


def _classify(paths: LoopPaths, sps: list[SPath]) -> tuple[str, list[str], list[str]]:
    variables = paths.variables
    params = [v for v in variables if all(sp.op[v] == sym(pre(v)) for sp in sps)]
    pset = {pre(p) for p in params}
    steer: set[str] = set()
    for sp in sps:
        steer |= set(bfree_symbols(sp.cond)) - pset
    if len(steer) != 1:
        names = ", ".join(sorted(steer)) or "none"
        raise SummaryFailure(NOT_SUMMARIZABLE, f"path conditions depend on {names}; "
                             "a single control variable is required")
    xs = steer.pop()
    control = next((v for v in variables if pre(v) == xs), None)
    if control is None:
        raise SummaryFailure(NOT_SUMMARIZABLE, f"path conditions depend on {xs}")
    others = [v for v in variables if v != control and v not in params]
    return control, params, others


def analyze(paths: LoopPaths, sps: list[SPath], max_values: int = DEFAULT_MAX_VALUES) -> Oscillation:
    """Regions, J/I/T intervals and the oscillation interval of an SCC."""
    control, params, others = _classify(paths, sps)
    xs = pre(control)
    pset = {pre(p) for p in params}
    gx = IntervalSet.universe()
    for c in conjuncts(paths.guard):
        fs = set(bfree_symbols(c))
        if fs and fs <= {xs}:
            r = region_of(c, xs)
            if r is not None:
                gx = gx.intersection(r)
    param_parts: Optional[set[str]] = None
    param_cond: Bool = conj()
    members = []
    for sp in sps:
        xpart, ppart = [], []
        for c in conjuncts(sp.cond):
            fs = set(bfree_symbols(c))
            if fs <= pset:
                ppart.append(c)
            elif fs <= {xs}:
                xpart.append(c)
            else:
                raise SummaryFailure(NOT_SUMMARIZABLE, f"condition of {sp.name} mixes the control "
                                     "variable with other variables")
        texts = {c.text() for c in ppart}
        if param_parts is None:
            param_parts, param_cond = texts, conj(*ppart)
        elif texts != param_parts:
            raise SummaryFailure(NOT_SUMMARIZABLE, "members test parameters differently")
        region = region_of(conj(*xpart), xs)
        if region is None:
            raise SummaryFailure(NOT_SUMMARIZABLE, f"condition of {sp.name} is not an integer range")
        fx = sp.op[control]
        if not set(fx.free_symbols()) <= {xs}:
            raise SummaryFailure(NOT_SUMMARIZABLE, f"{sp.name} updates {control} from other variables")
        updates = {}
        for y in others:
            e = sp.op[y]
            fs = set(e.free_symbols())
            if not fs <= {xs, pre(y)}:
                raise SummaryFailure(NOT_SUMMARIZABLE, f"{sp.name} updates {y} from other variables")
            if pre(y) in fs:
                split = e.split_linear(pre(y))
                if split is None or split[1] != Expr.const(1):
                    raise SummaryFailure(NOT_SUMMARIZABLE, f"{sp.name} scales {y}")
                updates[y] = ("add", split[0])
            else:
                updates[y] = ("set", e)
        members.append(Member(sp, region.intersection(gx), fx, _affine(fx, xs), updates))
    region = IntervalSet.empty()
    for m in members:
        region = region.union(m.region)
    osc = Oscillation(paths, control, params, others, param_cond, members, region)
    _jit(osc, max_values)
    _fixpoint(osc, max_values)
    return osc


def _jit(osc: Oscillation, cap: int) -> None:
    """Per member: values jumping to another member (J), staying (I), leaving (T)."""
    s = osc.region
    for m in osc.members:
        if m.affine is not None:
            to_s = s.preimage_affine(*m.affine)
            to_self = m.region.preimage_affine(*m.affine)
        else:
            n = m.region.count()
            if n is None or n > cap:
                raise SummaryFailure(NOT_SUMMARIZABLE, f"{m.name} has a non-affine update over "
                                     "an unbounded range")
            to_s = IntervalSet.from_values(v for v in m.region if m.step(v, osc.xs) in s)
            to_self = IntervalSet.from_values(v for v in m.region if m.step(v, osc.xs) in m.region)
        i_iv = m.region.intersection(to_self)
        j_iv = m.region.intersection(to_s).difference(to_self)
        t_iv = m.region.difference(to_s)
        osc.intervals[m.name] = {"J": j_iv, "I": i_iv, "T": t_iv}


def _fixpoint(osc: Oscillation, cap: int) -> None:
    """Grow the J-intervals by their images until closed under the member maps."""
    a = IntervalSet.empty()
    for iv in osc.intervals.values():
        a = a.union(iv["J"])
    osc.history = [a]
    rounds = 0
    while True:
        n = a.count()
        if n is None or n > cap:
            raise SummaryFailure(INFINITE_OSCILLATION, f"oscillation interval {a.text()} exceeds "
                                 f"{cap} values")
        if rounds >= MAX_ROUNDS:
            raise SummaryFailure(INFINITE_OSCILLATION, f"no fixpoint after {MAX_ROUNDS} rounds")
        rounds += 1
        b = IntervalSet.empty()
        for m in osc.members:
            b = b.union(m.image(a, osc.xs, cap))
        b = b.intersection(osc.region)
        if b.issubset(a):
            break
        a = a.union(b)
        osc.history.append(a)
    osc.o = a
    osc.rounds = rounds
