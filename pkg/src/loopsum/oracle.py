"""Concrete interpreter for the while-language.

Semantics are over mathematical integers unless the program carries a
bitwidth pragma, in which case every assignment wraps to a signed
two's-complement value of that width.  Division and modulo floor toward
negative infinity.  One step is charged per executed statement and per
evaluated loop guard.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .program import (
    Assert,
    Assign,
    Binary,
    BoolLit,
    Break,
    Decl,
    Embedded,
    Exp,
    If,
    Nondet,
    Num,
    ParAssign,
    ProgramAst,
    Stmt,
    Unary,
    Var,
    While,
)
from .symexpr import Divergence, pre

DEFAULT_FUEL = 2_000_000
DEFAULT_NONDET_RANGE = (-100, 100)
DEFAULT_INPUT_RANGE = (-1000, 1000)


class Status(enum.Enum):
    RUNNING = "RUNNING"
    DONE = "DONE"
    FUEL_EXHAUSTED = "FUEL_EXHAUSTED"
    ASSERT_FAILED = "ASSERT_FAILED"
    RUNTIME_ERROR = "RUNTIME_ERROR"
    NO_CASE = "NO_CASE"


@dataclass
class ConcreteState:
    values: dict[str, int]
    steps: int = 0
    status: Status = Status.RUNNING
    location: Optional[tuple[int, int]] = None
    message: str = ""

    def to_json(self) -> dict:
        out: dict = {"values": dict(sorted(self.values.items())), "steps": self.steps,
                     "status": self.status.value}
        if self.location is not None:
            out["location"] = list(self.location)
        if self.message:
            out["message"] = self.message
        return out


class NondetSource:
    """Supplies ``nondet()`` values: a fixed prefix, then seeded draws."""

    def __init__(self, seed: int = 0, prefix: Iterable[int] = (),
                 value_range: tuple[int, int] = DEFAULT_NONDET_RANGE):
        self.rng = random.Random(seed)
        self.prefix = list(prefix)
        self.range = value_range
        self.drawn: list[int] = []

    def next_int(self) -> int:
        if len(self.drawn) < len(self.prefix):
            v = self.prefix[len(self.drawn)]
        else:
            v = self.rng.randint(*self.range)
        self.drawn.append(v)
        return v

    def next_guard(self, loop: While) -> int:
        """Value of a ``while (nondet())`` guard."""
        return self.next_bool()

    def next_bool(self) -> int:
        if len(self.drawn) < len(self.prefix):
            v = self.prefix[len(self.drawn)]
        else:
            v = self.rng.randint(0, 1)
        self.drawn.append(v)
        return v


class ScriptedNondet(NondetSource):
    """Replays a witness: ordinary draws in order, and per ``while (nondet())``
    loop (keyed by line) the number of iterations to run."""

    def __init__(self, draws: Iterable[int] = (), loops: Optional[Mapping[int, int]] = None,
                 value_range: tuple[int, int] = DEFAULT_NONDET_RANGE):
        super().__init__(0, draws, value_range)
        self.left = dict(loops or {})

    def next_guard(self, loop: While) -> int:
        n = self.left.get(loop.line, 0)
        if n > 0:
            self.left[loop.line] = n - 1
            return 1
        return 0


class Halt(Exception):
    """Ends a run with a non-DONE status; loop hooks may raise it too."""

    def __init__(self, status: Status, location=None, message: str = ""):
        self.status = status
        self.location = location
        self.message = message


class _BreakSignal(Exception):
    pass


LoopHook = Callable[[While, dict[str, int]], Optional[dict[str, int]]]


class Interpreter:
    def __init__(self, ast: ProgramAst, fuel: int = DEFAULT_FUEL,
                 nondet: Optional[NondetSource] = None,
                 loop_hook: Optional[LoopHook] = None,
                 on_iteration: Optional[Callable[[While, dict[str, int]], None]] = None,
                 stop_at_assert: bool = True):
        if fuel <= 0:
            raise ValueError("fuel must be positive")
        self.ast = ast
        self.fuel = fuel
        self.steps = 0
        rng = ast.nondet_range or DEFAULT_NONDET_RANGE
        self.nondet = nondet or NondetSource(0, value_range=rng)
        self.loop_hook = loop_hook
        self.on_iteration = on_iteration
        self.stop_at_assert = stop_at_assert
        self.failed_asserts: list[tuple[int, int]] = []
        bw = ast.bitwidth
        self._wrap = None if bw is None else (1 << bw, 1 << (bw - 1))

    def run(self, inputs: Mapping[str, int]) -> ConcreteState:
        env: dict[str, int] = {}
        for name in self.ast.input_names:
            if name not in inputs:
                raise KeyError(f"missing value for input {name!r}")
            env[name] = self._store(int(inputs[name]))
        try:
            self.exec_block(self.ast.body, env)
        except Halt as stop:
            return ConcreteState(env, self.steps, stop.status, stop.location, stop.message)
        return ConcreteState(env, self.steps, Status.DONE)

    # -- statements -------------------------------------------------------------
    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.fuel:
            self.steps = self.fuel
            raise Halt(Status.FUEL_EXHAUSTED, message=f"exceeded {self.fuel} steps")

    def _store(self, v: int) -> int:
        if self._wrap is None:
            return v
        mod, half = self._wrap
        return (v + half) % mod - half

    def exec_block(self, body: Sequence[Stmt], env: dict[str, int]) -> None:
        for s in body:
            self.exec_stmt(s, env)

    def exec_stmt(self, s: Stmt, env: dict[str, int]) -> None:
        if isinstance(s, While):
            self.exec_while(s, env)
            return
        self.tick()
        if isinstance(s, Assign):
            env[s.name] = self._store(self.eval_int(s.value, env, s.line))
        elif isinstance(s, Decl):
            env[s.name] = 0 if s.init is None else self._store(self.eval_int(s.init, env, s.line))
        elif isinstance(s, ParAssign):
            vals = [self.eval_int(v, env, s.line) for v in s.values]
            for n, v in zip(s.names, vals):
                env[n] = self._store(v)
        elif isinstance(s, If):
            if self.eval_cond(s.cond, env, s.line):
                self.exec_block(s.then, env)
            else:
                self.exec_block(s.orelse, env)
        elif isinstance(s, Assert):
            if not self.eval_cond(s.cond, env, s.line):
                self.failed_asserts.append((s.line, s.column))
                if self.stop_at_assert:
                    raise Halt(Status.ASSERT_FAILED, (s.line, s.column), "assertion failed")
        elif isinstance(s, Break):
            raise _BreakSignal()
        else:  # pragma: no cover - AST is closed
            raise TypeError(s)

    def exec_while(self, s: While, env: dict[str, int]) -> None:
        if self.loop_hook is not None:
            out = self.loop_hook(s, env)
            if out is not None:
                self.tick()
                env.update(out)
                return
        while True:
            self.tick()
            if isinstance(s.cond, Nondet):
                if not self.nondet.next_guard(s):
                    return
            elif not self.eval_cond(s.cond, env, s.line):
                return
            if self.on_iteration is not None:
                self.on_iteration(s, env)
            try:
                self.exec_block(s.body, env)
            except _BreakSignal:
                return

    # -- expressions ------------------------------------------------------------
    def eval_cond(self, e: Exp, env: Mapping[str, int], line: int) -> bool:
        if isinstance(e, Nondet):
            return self.nondet.next_bool() != 0
        return self.eval(e, env, line) != 0

    def eval_int(self, e: Exp, env: Mapping[str, int], line: int) -> int:
        if isinstance(e, Nondet):
            return self.nondet.next_int()
        return self.eval(e, env, line)

    def eval(self, e: Exp, env: Mapping[str, int], line: int) -> int:
        if isinstance(e, Num):
            return e.value
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, BoolLit):
            return int(e.value)
        if isinstance(e, Unary):
            v = self.eval(e.operand, env, line)
            return -v if e.op == "-" else int(v == 0)
        if isinstance(e, Binary):
            op = e.op
            if op == "&&":
                return int(self.eval(e.left, env, line) != 0 and self.eval(e.right, env, line) != 0)
            if op == "||":
                return int(self.eval(e.left, env, line) != 0 or self.eval(e.right, env, line) != 0)
            a = self.eval(e.left, env, line)
            b = self.eval(e.right, env, line)
            return _apply(op, a, b, line)
        if isinstance(e, Nondet):
            return self.nondet.next_int()
        if isinstance(e, Embedded):
            try:
                return e.expr.evaluate_int({pre(v): val for v, val in env.items()})
            except Divergence as exc:
                raise Halt(Status.FUEL_EXHAUSTED, (line, 0), str(exc)) from exc
        raise TypeError(e)  # pragma: no cover


def _apply(op: str, a: int, b: int, line: int) -> int:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op in ("/", "%"):
        if b == 0:
            raise Halt(Status.RUNTIME_ERROR, (line, 0), "division by zero")
        return a // b if op == "/" else a % b
    if op == "<":
        return int(a < b)
    if op == "<=":
        return int(a <= b)
    if op == ">":
        return int(a > b)
    if op == ">=":
        return int(a >= b)
    if op == "==":
        return int(a == b)
    if op == "!=":
        return int(a != b)
    raise ValueError(op)


def interpret(ast: ProgramAst, inputs: Mapping[str, int] | ConcreteState,
              fuel: int = DEFAULT_FUEL, nondet: Optional[NondetSource] = None,
              loop_hook: Optional[LoopHook] = None) -> ConcreteState:
    """Run ``ast`` on ``inputs`` and return the final state."""
    if isinstance(inputs, ConcreteState):
        inputs = inputs.values
    return Interpreter(ast, fuel=fuel, nondet=nondet, loop_hook=loop_hook).run(inputs)


def input_ranges(ast: ProgramAst, default: tuple[int, int] = DEFAULT_INPUT_RANGE) -> dict[str, tuple[int, int]]:
    """Sampling range per input: the declared domain, clipped to ``default`` on open sides."""
    out = {}
    for d in ast.inputs:
        lo = d.lo if d.lo is not None else (default[0] if d.hi is None else min(default[0], d.hi))
        hi = d.hi if d.hi is not None else (default[1] if d.lo is None else max(default[1], lo))
        out[d.name] = (lo, hi)
    return out


def sample_inputs(ast: ProgramAst, count: int, seed: int,
                  default: tuple[int, int] = DEFAULT_INPUT_RANGE) -> list[dict[str, int]]:
    """``count`` seeded random input assignments within the declared domains."""
    rng = random.Random(seed)
    ranges = input_ranges(ast, default)
    return [{n: rng.randint(lo, hi) for n, (lo, hi) in ranges.items()} for _ in range(count)]


def eval_summary(summary, inputs: Mapping[str, int] | ConcreteState) -> ConcreteState:
    """Evaluate one loop summary on a concrete pre-state.

    The first case whose guard holds is applied; the step counter holds
    the case's iteration count.  Status is NO_CASE when no guard matches
    and FUEL_EXHAUSTED when the matching case is a non-terminating one.
    """
    from .summarize.model import evaluate_summary

    if isinstance(inputs, ConcreteState):
        inputs = inputs.values
    state = {v: int(inputs.get(v, 0)) for v in summary.variables}
    res = evaluate_summary(summary, state)
    if res.status == "OK":
        return ConcreteState(dict(res.values), res.iterations, Status.DONE)
    if res.status == "DIVERGES":
        return ConcreteState(state, 0, Status.FUEL_EXHAUSTED, message="loop does not terminate")
    return ConcreteState(state, 0, Status.NO_CASE, message="no summary case matches")
