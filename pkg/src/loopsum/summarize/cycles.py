"""Trajectories of the control value inside the oscillation interval.

Inside ``O`` the next control value is a function of the current one,
so every start value either leaves the SCC region after a few steps or
falls into a cycle.  The tables built here are used both to describe the
periodic cases and to evaluate them quickly: along a cycle every
accumulating variable changes by a fixed amount per lap, so the first
lap at which the loop guard fails is found by solving one linear
inequality per cycle position instead of stepping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..intervals import IntervalSet
from ..symexpr import (
    Bool,
    Expr,
    Lit,
    Opaque,
    bevaluate,
    bsubstitute,
    conjuncts,
    const,
    pre,
    sym,
)
from .model import DEFAULT_SEARCH_CAP, Divergence
from .oscillation import Oscillation

Q = "__lap"


@dataclass
class Group:
    """Start values of the oscillation interval sharing one cycle (or all exiting)."""

    kind: str  # "cycle", "tail" or "exit"
    values: IntervalSet
    cycle: Optional[int] = None
    modular: Optional[tuple[int, int, int]] = None  # (offset a, step c, length L)


@dataclass
class CycleTable:
    osc: Oscillation
    succ: dict[int, int] = field(default_factory=dict)
    cycles: list[list[int]] = field(default_factory=list)
    cycle_of: dict[int, int] = field(default_factory=dict)  # cycle members only
    lead: dict[int, Optional[int]] = field(default_factory=dict)  # cycle reached, None = exits
    tail: dict[int, int] = field(default_factory=dict)  # steps before the cycle / before leaving
    groups: list[Group] = field(default_factory=list)
    label: str = "osc"
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- construction ---------------------------------------------------------
    @classmethod
    def build(cls, osc: Oscillation, label: str) -> "CycleTable":
        t = cls(osc, label=label)
        xs = osc.xs
        for v in osc.o:
            t.succ[v] = osc.member_at(v).step(v, xs)
        state: dict[int, int] = {}  # 0 unseen, 1 on current walk, 2 done
        for v0 in osc.o:
            if state.get(v0):
                continue
            walk = []
            v = v0
            while v in osc.o and not state.get(v):
                state[v] = 1
                walk.append(v)
                v = t.succ[v]
            if v in osc.o and state[v] == 1:
                cyc = walk[walk.index(v):]
                cid = len(t.cycles)
                t.cycles.append(cyc)
                for u in cyc:
                    t.cycle_of[u] = cid
                    t.lead[u] = cid
                    t.tail[u] = 0
                walk = walk[:walk.index(v)]
            for u in reversed(walk):
                nxt = t.succ[u]
                if nxt not in osc.o:
                    t.lead[u], t.tail[u] = None, 1
                else:
                    t.lead[u], t.tail[u] = t.lead[nxt], t.tail[nxt] + 1
            for u in walk:
                state[u] = 2
            for u in t.cycle_of:
                state[u] = 2
        t._group()
        return t

    def _group(self) -> None:
        for cid, cyc in enumerate(self.cycles):
            vals = IntervalSet.from_values(cyc)
            self.groups.append(Group("cycle", vals, cid, self._modular(cyc)))
            tail = [v for v, c in self.lead.items() if c == cid and v not in self.cycle_of]
            if tail:
                self.groups.append(Group("tail", IntervalSet.from_values(tail), cid))
        leaving = [v for v, c in self.lead.items() if c is None]
        if leaving:
            self.groups.append(Group("exit", IntervalSet.from_values(leaving)))

    def _modular(self, cyc: list[int]) -> Optional[tuple[int, int, int]]:
        """``(a, c, L)`` when the cycle is ``x -> a + (x - a + c) mod L`` over ``[a, a+L)``."""
        n = len(cyc)
        a = min(cyc)
        if max(cyc) - a + 1 != n:
            return None
        c = (self.succ[cyc[0]] - cyc[0]) % n
        if all(self.succ[u] == a + (u - a + c) % n for u in cyc):
            return a, c, n
        return None

    def repeat_steps(self, v: int) -> Optional[int]:
        """Steps until the walk from ``v`` revisits a value (``None`` if it leaves first)."""
        cid = self.lead[v]
        if cid is None:
            return None
        return self.tail[v] + len(self.cycles[cid])

    def describe(self) -> dict:
        out = []
        for g in self.groups:
            d = {"kind": g.kind, "values": g.values.text()}
            if g.cycle is not None:
                d["cycle"] = self.cycles[g.cycle]
            if g.modular is not None:
                d["modular"] = list(g.modular)
            out.append(d)
        return {"groups": out}

    # -- evaluation -------------------------------------------------------------
    def _apply(self, x: int, st: dict[str, int]) -> int:
        m = self.osc.member_at(x)
        env = {self.osc.xs: x}
        for y, (kind, e) in m.updates.items():
            val = e.evaluate_int(env)
            st[y] = st[y] + val if kind == "add" else val
        nxt = self.succ.get(x)
        return m.step(x, self.osc.xs) if nxt is None else nxt

    def _holds(self, x: int, st: dict[str, int]) -> bool:
        env = {pre(v): val for v, val in st.items()}
        env[self.osc.xs] = x
        return bevaluate(self.osc.paths.guard, env)

    def run(self, state: tuple[int, ...]) -> tuple[int, dict[str, int]]:
        """Iterations spent in the SCC from ``state`` and the state on leaving it.

        ``state`` lists the values of all loop variables (in loop order);
        the control value must lie in the oscillation interval and the
        loop guard must hold.
        """
        variables = self.osc.paths.variables
        st = dict(zip(variables, state))
        x = st.pop(self.osc.control)
        t = 0
        in_o = self.osc.o
        # walk the tail (or the whole route out of the region)
        while x in in_o and x not in self.cycle_of:
            if not self._holds(x, st):
                return t, _with(st, self.osc.control, x)
            x = self._apply(x, st)
            t += 1
        if x not in in_o:
            return t, _with(st, self.osc.control, x)
        cyc = self.cycles[self.cycle_of[x]]
        lam = len(cyc)
        start = cyc.index(x)
        order = cyc[start:] + cyc[:start]
        # two explicit laps: after one lap, variables that are reset somewhere
        # on the cycle repeat exactly, the rest move by a fixed amount per lap
        snaps = []
        for lap in range(2):
            for r, u in enumerate(order):
                if not self._holds(u, st):
                    return t, _with(st, self.osc.control, u)
                if lap == 1:
                    snaps.append(dict(st))
                self._apply(u, st)
                t += 1
        delta = {y: st[y] - snaps[0][y] for y in st}
        best: Optional[tuple[int, int]] = None  # (laps, residue)
        for r, u in enumerate(order):
            q = self._first_failing_lap(u, snaps[r], delta)
            if q is not None and (best is None or (q, r) < best):
                best = (q, r)
        if best is None:
            raise Divergence("control value cycles forever while the guard holds")
        q, r = best
        final = {y: snaps[r][y] + (q - 1) * delta[y] for y in st}
        return t + (q - 2) * lam + r, _with(final, self.osc.control, order[r])

    def _first_failing_lap(self, x: int, base: dict[str, int], delta: dict[str, int]) -> Optional[int]:
        """Least lap ``q >= 2`` where the guard fails; ``base`` is the state at lap 1."""
        env: dict[str, Expr] = {pre(y): const(base[y]) + (sym(Q) - 1).scale(delta[y]) for y in base}
        env[self.osc.xs] = const(x)
        best: Optional[int] = None
        for c in conjuncts(self.osc.paths.guard):
            q = _lit_first_fail(c, env) if isinstance(c, Lit) else "step"
            if q == "step":
                q = _step_fail(c, env)
            if q is not None and (best is None or q < best):
                best = q
        return best


def _with(st: dict[str, int], name: str, val: int) -> dict[str, int]:
    out = dict(st)
    out[name] = val
    return out


def _lit_first_fail(c: Lit, env: dict[str, Expr]):
    """Least lap ``q >= 2`` violating ``c`` when its value is affine in the lap count."""
    e = c.expr.substitute(env)
    coeffs = e.poly_coeffs(Q)
    if coeffs is None or len(coeffs) > 2 or any(not k.is_constant() for k in coeffs):
        return "step"
    a = coeffs[0].constant_value()
    b = coeffs[1].constant_value() if len(coeffs) > 1 else 0
    # value(q) = a + b*q, and the literal holds at q = 1
    if c.op == "<=":
        if b <= 0:
            return None
        return (-a) // b + 1
    if c.op == "==":
        return 2 if b != 0 else None
    if b == 0 or (-a) % b:
        return None
    q = (-a) // b
    return q if q >= 2 else None


def _step_fail(c: Bool, env: dict[str, Expr], cap: int = DEFAULT_SEARCH_CAP) -> Optional[int]:
    b = bsubstitute(c, env)
    for q in range(2, cap):
        if not bevaluate(b, {Q: q}):
            return q
    return None


class PeriodicRun(Opaque):
    """A component of :meth:`CycleTable.run`: the count or one variable's final value."""

    __slots__ = ("table", "what")

    def __init__(self, table: CycleTable, what: str, args):
        super().__init__(args)
        self.table = table
        self.what = what

    def label(self) -> str:
        return f"{self.table.label}.{self.what}"

    def rebuild(self, args):
        return PeriodicRun(self.table, self.what, args)

    def compute(self, values):
        cache = self.table.cache
        res = cache.get(values)
        if res is None:
            if len(cache) > 65536:
                cache.clear()
            res = self.table.run(values)
            cache[values] = res
        count, final = res
        return count if self.what == "count" else final[self.what]
