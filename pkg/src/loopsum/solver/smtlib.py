"""SMT-LIB2 backend talking to an external solver process over stdin/stdout."""

from __future__ import annotations

import re
import shlex
import subprocess
import time
from fractions import Fraction
from typing import Optional, TextIO

from ..symexpr import (
    And,
    BConst,
    Bool,
    Expr,
    FloorDiv,
    InSet,
    Lit,
    Mod,
    Opaque,
    Or,
    Sym,
)
from .constraints import SAT, UNKNOWN, UNSAT, ConstraintSet, SolveResult

DEFAULT_SMT_CMD = "z3 -in -smt2"


class _Encoder:
    def __init__(self) -> None:
        self.names: dict[str, str] = {}
        self.funcs: dict[str, tuple[str, int]] = {}  # opaque label -> (smt name, arity)

    def name(self, s: str) -> str:
        if s not in self.names:
            self.names[s] = f"v{len(self.names)}"
        return self.names[s]

    def num(self, c) -> str:
        if isinstance(c, Fraction):
            # only reachable for membership tests on rational expressions
            return f"(/ {self.num(c.numerator)} {c.denominator})"
        return str(c) if c >= 0 else f"(- {-c})"

    def expr(self, e: Expr) -> str:
        terms = []
        for m, c in e.terms:
            factors = [self.atom(a) for a, p in m for _ in range(p)]
            if c != 1 or not factors:
                factors.insert(0, self.num(c))
            terms.append(factors[0] if len(factors) == 1 else f"(* {' '.join(factors)})")
        if not terms:
            return "0"
        return terms[0] if len(terms) == 1 else f"(+ {' '.join(terms)})"

    def atom(self, a) -> str:
        if isinstance(a, Sym):
            return self.name(a.name)
        if isinstance(a, FloorDiv):
            return f"(div {self.expr(a.num)} {a.den})"
        if isinstance(a, Mod):
            return f"(mod {self.expr(a.num)} {a.den})"
        if isinstance(a, Opaque) and a.args:
            # an uninterpreted function: unsat answers stay sound, models are checked
            fn, arity = self.funcs.setdefault(a.label(), (f"f{len(self.funcs)}", len(a.args)))
            if arity != len(a.args):
                raise _Unsupported(a.text())
            return f"({fn} {' '.join(self.expr(x) for x in a.args)})"
        raise _Unsupported(a.text())

    def bool(self, b: Bool) -> str:
        if isinstance(b, BConst):
            return "true" if b.value else "false"
        if isinstance(b, Lit):
            e = self.expr(b.expr)
            if b.op == "<=":
                return f"(<= {e} 0)"
            if b.op == "==":
                return f"(= {e} 0)"
            return f"(not (= {e} 0))"
        if isinstance(b, And):
            return f"(and {' '.join(self.bool(a) for a in b.args)})"
        if isinstance(b, Or):
            return f"(or {' '.join(self.bool(a) for a in b.args)})"
        if isinstance(b, InSet):
            e = self.expr(b.expr)
            parts = []
            for lo, hi in b.iset.intervals:
                cs = []
                if lo is not None:
                    cs.append(f"(>= {e} {self.num(lo)})")
                if hi is not None:
                    cs.append(f"(<= {e} {self.num(hi)})")
                parts.append(cs[0] if len(cs) == 1 else f"(and {' '.join(cs)})")
            if not parts:
                return "false"
            return parts[0] if len(parts) == 1 else f"(or {' '.join(parts)})"
        raise TypeError(b)


class _Unsupported(Exception):
    pass


_VALUE_RE = re.compile(r"\(\s*(v\d+)\s+(\(\s*-\s*\d+\s*\)|-?\d+)\s*\)")


def _parse_value(text: str) -> int:
    text = text.strip()
    if text.startswith("("):
        return -int(text.strip("() ").split()[-1])
    return int(text)


class SmtLibSolver:
    name = "smtlib"

    def __init__(self, command: str = DEFAULT_SMT_CMD, timeout_ms: int = 5000,
                 log: Optional[TextIO] = None):
        self.command = shlex.split(command)
        self.timeout_ms = timeout_ms
        self.log = log

    def script(self, cs: ConstraintSet) -> tuple[str, dict[str, str]]:
        enc = _Encoder()
        asserts = [enc.bool(c) for c in cs.constraints]
        lines = ["(set-option :produce-models true)", f"(set-option :timeout {self.timeout_ms})",
                 "(set-logic ALL)"]
        for sym_name in sorted(cs.free_symbols, key=enc.name):
            lines.append(f"(declare-const {enc.name(sym_name)} Int)")
        for fn, arity in enc.funcs.values():
            lines.append(f"(declare-fun {fn} ({' '.join(['Int'] * arity)}) Int)")
        lines.extend(f"(assert {a})" for a in asserts)
        lines.append("(check-sat)")
        if enc.names:
            lines.append(f"(get-value ({' '.join(enc.names[s] for s in sorted(enc.names))}))")
        lines.append("(exit)")
        return "\n".join(lines) + "\n", enc.names

    def check(self, cs: ConstraintSet) -> SolveResult:
        t0 = time.perf_counter()
        try:
            text, names = self.script(cs)
        except _Unsupported as exc:
            return SolveResult(UNKNOWN, backend=self.name, reason=f"cannot encode {exc}")
        if self.log is not None:
            self.log.write(f"; query\n{text}")
        try:
            proc = subprocess.run(self.command, input=text, capture_output=True, text=True,
                                  timeout=self.timeout_ms / 1000 + 2)
        except (OSError, subprocess.TimeoutExpired) as exc:
            return SolveResult(UNKNOWN, backend=self.name, reason=f"solver process: {exc}",
                               seconds=time.perf_counter() - t0)
        out = proc.stdout
        if self.log is not None:
            self.log.write(f"; response\n{out}\n")
        dt = time.perf_counter() - t0
        first = out.strip().split("\n", 1)[0].strip() if out.strip() else ""
        if first == "unsat":
            return SolveResult(UNSAT, backend=self.name, seconds=dt)
        if first != "sat":
            reason = first or proc.stderr.strip() or "no output"
            return SolveResult(UNKNOWN, backend=self.name, reason=reason, seconds=dt)
        back = {v: k for k, v in names.items()}
        model = {}
        for m in _VALUE_RE.finditer(out):
            model[back[m.group(1)]] = _parse_value(m.group(2))
        for s in cs.free_symbols:
            model.setdefault(s, 0)
        if not cs.holds(model):
            return SolveResult(UNKNOWN, backend=self.name, reason="model failed validation", seconds=dt)
        return SolveResult(SAT, dict(sorted(model.items())), dt, self.name)
