"""AST for the while-language and its pretty printer."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

# -- expressions ---------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Nondet:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # '-' or '!'
    operand: "Exp"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Exp"
    right: "Exp"


@dataclass(frozen=True)
class Embedded:
    """Value of a symbolic expression over the current variable values.

    Only produced when a summarized inner loop is spliced into its parent
    and the expression has no source spelling (searched or tabulated
    counts, powers).  ``expr`` is a :class:`loopsum.symexpr.Expr` over
    pre-state symbols.
    """

    expr: object


Exp = Union[Num, BoolLit, Var, Nondet, Unary, Binary, Embedded]

ARITH_OPS = ("+", "-", "*", "/", "%")
CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")

PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}


def is_boolean(e: Exp) -> bool:
    """True when ``e`` is syntactically a condition rather than an integer."""
    if isinstance(e, BoolLit):
        return True
    if isinstance(e, Unary):
        return e.op == "!"
    if isinstance(e, Binary):
        return e.op in CMP_OPS or e.op in LOGIC_OPS
    return False


def expr_vars(e: Exp) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return expr_vars(e.operand)
    if isinstance(e, Binary):
        return expr_vars(e.left) | expr_vars(e.right)
    if isinstance(e, Embedded):
        return {s[:-1] for s in e.expr.free_symbols() if s.endswith("₀")}
    return set()


# -- statements ----------------------------------------------------------------


@dataclass(frozen=True)
class Decl:
    name: str
    init: Optional[Exp] = None
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assign:
    name: str
    value: Exp
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class ParAssign:
    """Simultaneous assignment ``a, b = e1, e2``."""

    names: tuple[str, ...]
    values: tuple[Exp, ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class If:
    cond: Exp
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class While:
    cond: Exp
    body: tuple["Stmt", ...]
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Assert:
    cond: Exp
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Break:
    line: int = field(default=0, compare=False)


Stmt = Union[Decl, Assign, ParAssign, If, While, Assert, Break]


@dataclass(frozen=True)
class InputDecl:
    name: str
    lo: Optional[int] = None
    hi: Optional[int] = None

    @property
    def bounded(self) -> bool:
        return self.lo is not None and self.hi is not None


@dataclass(frozen=True)
class ProgramAst:
    inputs: tuple[InputDecl, ...] = ()
    body: tuple[Stmt, ...] = ()
    bitwidth: Optional[int] = None
    nondet_range: Optional[tuple[int, int]] = None

    @property
    def input_names(self) -> list[str]:
        return [d.name for d in self.inputs]

    @property
    def assertions(self) -> list[Assert]:
        return [s for s in walk(self.body) if isinstance(s, Assert)]

    def variables(self) -> list[str]:
        """Inputs then declared locals, in order of first appearance."""
        names = list(self.input_names)
        for s in walk(self.body):
            if isinstance(s, Decl) and s.name not in names:
                names.append(s.name)
        return names

    def input_domain(self, name: str) -> tuple[Optional[int], Optional[int]]:
        for d in self.inputs:
            if d.name == name:
                return d.lo, d.hi
        raise KeyError(name)


def walk(body: tuple[Stmt, ...]) -> Iterator[Stmt]:
    for s in body:
        yield s
        if isinstance(s, If):
            yield from walk(s.then)
            yield from walk(s.orelse)
        elif isinstance(s, While):
            yield from walk(s.body)


def loops(body: tuple[Stmt, ...]) -> list[While]:
    return [s for s in walk(body) if isinstance(s, While)]


def contains_loop(body: tuple[Stmt, ...]) -> bool:
    return any(isinstance(s, While) for s in walk(body))


# -- pretty printing -----------------------------------------------------------


def format_expr(e: Exp) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Nondet):
        return "nondet()"
    if isinstance(e, Embedded):
        names = {s: s[:-1] for s in e.expr.free_symbols() if s.endswith("₀")}
        text = e.expr.text()
        for k, v in names.items():
            text = text.replace(k, v)
        return f"({text})"
    if isinstance(e, Unary):
        inner = format_expr(e.operand)
        if isinstance(e.operand, (Binary, Unary)) or (isinstance(e.operand, Num) and e.operand.value < 0):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    p = PRECEDENCE[e.op]
    left = format_expr(e.left)
    right = format_expr(e.right)
    if isinstance(e.left, Binary) and PRECEDENCE[e.left.op] < p:
        left = f"({left})"
    if isinstance(e.right, Binary) and PRECEDENCE[e.right.op] <= p:
        right = f"({right})"
    return f"{left} {e.op} {right}"


def format_stmts(body: tuple[Stmt, ...], indent: int = 0) -> list[str]:
    pad = "    " * indent
    out: list[str] = []
    for s in body:
        if isinstance(s, Decl):
            init = "" if s.init is None else f" = {format_expr(s.init)}"
            out.append(f"{pad}int {s.name}{init};")
        elif isinstance(s, Assign):
            out.append(f"{pad}{s.name} = {format_expr(s.value)};")
        elif isinstance(s, ParAssign):
            vals = ", ".join(format_expr(v) for v in s.values)
            out.append(f"{pad}{', '.join(s.names)} = {vals};")
        elif isinstance(s, Assert):
            out.append(f"{pad}assert({format_expr(s.cond)});")
        elif isinstance(s, Break):
            out.append(f"{pad}break;")
        elif isinstance(s, While):
            out.append(f"{pad}while ({format_expr(s.cond)}) {{")
            out.extend(format_stmts(s.body, indent + 1))
            out.append(f"{pad}}}")
        elif isinstance(s, If):
            out.extend(_format_if(s, indent, pad))
    return out


def _format_if(s: If, indent: int, pad: str) -> list[str]:
    out = [f"{pad}if ({format_expr(s.cond)}) {{"]
    out.extend(format_stmts(s.then, indent + 1))
    rest = s.orelse
    while len(rest) == 1 and isinstance(rest[0], If):
        nxt = rest[0]
        out.append(f"{pad}}} else if ({format_expr(nxt.cond)}) {{")
        out.extend(format_stmts(nxt.then, indent + 1))
        rest = nxt.orelse
    if rest:
        out.append(f"{pad}}} else {{")
        out.extend(format_stmts(rest, indent + 1))
    out.append(f"{pad}}}")
    return out


def pretty_print(prog: ProgramAst) -> str:
    lines: list[str] = []
    if prog.bitwidth is not None:
        lines.append(f"// bitwidth {prog.bitwidth}")
    if prog.nondet_range is not None:
        lo, hi = prog.nondet_range
        lines.append(f"// nondet in [{lo}, {hi}]")
    for d in prog.inputs:
        if d.lo is None and d.hi is None:
            lines.append(f"// input {d.name}")
        else:
            lo = "-inf" if d.lo is None else str(d.lo)
            hi = "inf" if d.hi is None else str(d.hi)
            lines.append(f"// input {d.name} in [{lo}, {hi}]")
    lines.extend(format_stmts(prog.body))
    return "\n".join(lines) + ("\n" if lines else "")
