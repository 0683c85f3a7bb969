"""Loop paths (SPaths) with their symbolic condition and operation.

Each SPath is one acyclic route through a loop body.  Walking the route
forward, guards are rewritten over the pre-state symbols by substituting
the operation accumulated so far, and assignments update that operation.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Optional

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
    Stmt,
    Unary,
    Var,
    While,
    is_boolean,
)
from .symexpr import (
    FALSE,
    TRUE,
    Bool,
    Expr,
    bsubstitute,
    conj,
    const,
    disj,
    eq,
    floordiv,
    ge,
    gt,
    le,
    lt,
    mod,
    ne,
    negate,
    pre,
    sym,
)

DEFAULT_MAX_PATHS = 4096


class PathExplosionError(Exception):
    code = "PATH_EXPLOSION"


class LoweringError(Exception):
    code = "UNSUPPORTED_EXPR"


class NestedLoopError(Exception):
    code = "NESTED_LOOP"


# -- lowering AST expressions ----------------------------------------------------


def lower_expr(e: Exp, env: Mapping[str, Expr], fresh: Optional[Callable[[], Expr]] = None) -> Expr:
    """Integer value of ``e`` with program variables replaced through ``env``."""
    if isinstance(e, Num):
        return const(e.value)
    if isinstance(e, Var):
        return env[e.name]
    if isinstance(e, BoolLit):
        return const(int(e.value))
    if isinstance(e, Nondet):
        if fresh is None:
            raise LoweringError("nondet() value in a symbolic context")
        return fresh()
    if isinstance(e, Embedded):
        return e.expr.substitute({pre(v): x for v, x in env.items()})
    if isinstance(e, Unary):
        if e.op == "-":
            return -lower_expr(e.operand, env, fresh)
        raise LoweringError("boolean negation used as an integer")
    if is_boolean(e):
        raise LoweringError("comparison used as an integer value")
    a = lower_expr(e.left, env, fresh)
    b = lower_expr(e.right, env, fresh)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if not b.is_constant() or b.constant() == 0:
        raise LoweringError("division by a non-literal")
    d = b.constant_value()
    if e.op == "/":
        return floordiv(a, d)
    return mod(a, abs(d)) if d > 0 else -mod(-a, -d)


def lower_bool(e: Exp, env: Mapping[str, Expr], fresh: Optional[Callable[[], Expr]] = None) -> Bool:
    """Truth value of ``e`` (integers are true when nonzero)."""
    if isinstance(e, BoolLit):
        return TRUE if e.value else FALSE
    if isinstance(e, Unary) and e.op == "!":
        return negate(lower_bool(e.operand, env, fresh))
    if isinstance(e, Binary):
        if e.op == "&&":
            return conj(lower_bool(e.left, env, fresh), lower_bool(e.right, env, fresh))
        if e.op == "||":
            return disj(lower_bool(e.left, env, fresh), lower_bool(e.right, env, fresh))
        cmp = {"<": lt, "<=": le, ">": gt, ">=": ge, "==": eq, "!=": ne}.get(e.op)
        if cmp is not None:
            return cmp(lower_expr(e.left, env, fresh), lower_expr(e.right, env, fresh))
    if isinstance(e, Nondet):
        if fresh is None:
            raise LoweringError("nondet() condition in a symbolic context")
        return ne(fresh(), 0)
    return ne(lower_expr(e, env, fresh), 0)


# -- SPaths -----------------------------------------------------------------------


def path_name(index: int) -> str:
    letters = string.ascii_uppercase
    if index < 26:
        return letters[index]
    return letters[index // 26 - 1] + letters[index % 26]


@dataclass
class SPath:
    index: int
    branches: tuple[bool, ...]
    cond: Bool
    op: dict[str, Expr]
    nodes: list[int] = field(default_factory=list)
    asserts: list[tuple[Assert, Bool]] = field(default_factory=list)
    nondet: bool = False
    valid: Optional[bool] = None

    @property
    def name(self) -> str:
        return path_name(self.index)

    @property
    def pre_map(self) -> dict[str, Expr]:
        """Substitution taking a formula over the pre-state to one after this path."""
        return {pre(v): e for v, e in self.op.items()}

    def op_text(self, variables: list[str]) -> str:
        return ", ".join(f"{v} = {self.op[v].text()}" for v in variables)

    def to_json(self, variables: list[str]) -> dict:
        return {
            "name": self.name,
            "index": self.index,
            "cond": self.cond.text(),
            "op": {v: self.op[v].text() for v in variables},
            "valid": self.valid,
        }


@dataclass
class LoopPaths:
    """All SPaths of one loop together with its guard over the pre-state."""

    loop_id: int
    variables: list[str]
    guard: Bool
    spaths: list[SPath]
    stmt: Optional[While] = None

    @property
    def valid(self) -> list[SPath]:
        return [sp for sp in self.spaths if sp.valid is not False]

    def identity(self) -> dict[str, Expr]:
        return {v: sym(pre(v)) for v in self.variables}

    def post_guard(self, sp: SPath) -> Bool:
        """Loop guard evaluated on the state after ``sp``."""
        return bsubstitute(self.guard, sp.pre_map)


def _walk_paths(body: tuple[Stmt, ...], env: dict[str, Expr], cond: Bool,
                branches: tuple[bool, ...], asserts: list, nondet: list[bool],
                fresh: Callable[[], Expr]) -> Iterator[tuple]:
    """Yield ``(cond, env, branches, asserts, nondet)`` for every route through ``body``."""
    for i, s in enumerate(body):
        if isinstance(s, If):
            c = lower_bool(s.cond, env, _mark(fresh, nondet))
            rest = body[i + 1:]
            for label, branch in ((True, s.then), (False, s.orelse)):
                c2 = conj(cond, c if label else negate(c))
                for r in _walk_paths(branch, dict(env), c2, branches + (label,), list(asserts),
                                     list(nondet), fresh):
                    yield from _walk_paths(rest, r[1], r[0], r[2], r[3], r[4], fresh)
            return
        if isinstance(s, While):
            raise NestedLoopError(f"nested loop at line {s.line}")
        if isinstance(s, Break):
            raise LoweringError("break inside a non-canonical loop")
        if isinstance(s, Assign):
            env[s.name] = lower_expr(s.value, env, _mark(fresh, nondet))
        elif isinstance(s, Decl):
            env[s.name] = const(0) if s.init is None else lower_expr(s.init, env, _mark(fresh, nondet))
        elif isinstance(s, ParAssign):
            vals = [lower_expr(v, env, _mark(fresh, nondet)) for v in s.values]
            for n, v in zip(s.names, vals):
                env[n] = v
        elif isinstance(s, Assert):
            asserts.append((s, lower_bool(s.cond, env, _mark(fresh, nondet))))
    yield cond, env, branches, asserts, nondet


def _mark(fresh: Callable[[], Expr], flag: list[bool]) -> Callable[[], Expr]:
    def wrapped() -> Expr:
        if not flag:
            flag.append(True)
        return fresh()

    return wrapped


def enumerate_body(body: tuple[Stmt, ...], variables: list[str],
                   max_paths: int = DEFAULT_MAX_PATHS) -> list[SPath]:
    """SPaths of a loop body, then-branches first, with Cond/Op computed."""
    counter = [0]

    def fresh() -> Expr:
        counter[0] += 1
        return sym(f"nondet{counter[0]}")

    start = {v: sym(pre(v)) for v in variables}
    out: list[SPath] = []
    for cond, env, branches, asserts, nondet in _walk_paths(body, dict(start), TRUE, (), [], [], fresh):
        if len(out) >= max_paths:
            raise PathExplosionError(f"more than {max_paths} paths in loop body")
        op = {v: env.get(v, start[v]) for v in variables}
        out.append(SPath(len(out), branches, cond, op, asserts=asserts, nondet=bool(nondet)))
    return out


def enumerate_spaths(loop, variables: Optional[list[str]] = None,
                     max_paths: int = DEFAULT_MAX_PATHS) -> LoopPaths:
    """SPaths of a :class:`~loopsum.cfg.CanonicalLoop` (Cond/Op filled in)."""
    stmt: While = loop.stmt
    if variables is None:
        variables = loop.cfg.program.variables()
    spaths = enumerate_body(stmt.body, variables, max_paths)
    cfg_paths = loop.body_paths()
    if len(cfg_paths) == len(spaths):
        for sp, nodes in zip(spaths, cfg_paths):
            sp.nodes = nodes
    guard = lower_bool(stmt.cond, {v: sym(pre(v)) for v in variables})
    return LoopPaths(loop.id, list(variables), guard, spaths, stmt)


def loop_paths_from_stmt(stmt: While, variables: list[str], loop_id: int = 0,
                         max_paths: int = DEFAULT_MAX_PATHS) -> LoopPaths:
    spaths = enumerate_body(stmt.body, variables, max_paths)
    guard = lower_bool(stmt.cond, {v: sym(pre(v)) for v in variables})
    return LoopPaths(loop_id, list(variables), guard, spaths, stmt)


def compute_cond_op(sp: SPath, body: tuple[Stmt, ...], variables: list[str]) -> SPath:
    """Recompute Cond/Op of ``sp`` by replaying its branch decisions."""
    for cand in enumerate_body(body, variables):
        if cand.branches == sp.branches:
            sp.cond, sp.op, sp.asserts, sp.nondet = cand.cond, cand.op, cand.asserts, cand.nondet
            return sp
    raise KeyError(f"no route with branches {sp.branches}")


def prune_invalid(paths: LoopPaths, solver) -> LoopPaths:
    """Mark each SPath valid iff ``guard and Cond`` is satisfiable; drop invalid ones."""
    kept = []
    for sp in paths.spaths:
        res = solver.check([paths.guard, sp.cond])
        sp.valid = res.status != "UNSAT"
        if sp.valid:
            kept.append(sp)
    return LoopPaths(paths.loop_id, paths.variables, paths.guard, kept, paths.stmt)


def dump_spaths(paths: LoopPaths) -> str:
    lines = [f"loop {paths.loop_id}: guard {paths.guard.text()}"]
    for sp in paths.spaths:
        status = {True: "valid", False: "invalid", None: "unchecked"}[sp.valid]
        lines.append(f"  {sp.name} [{status}] Cond: {sp.cond.text()}")
        lines.append(f"    Op: {sp.op_text(paths.variables)}")
    return "\n".join(lines) + "\n"
