"""Parser for the ``.wl`` while-language.

The accepted fragment is integer-only: declarations, assignments,
``if``/``else if``/``else``, ``while``, ``assert``, ``break`` and
``nondet()`` reads.  Division and modulo round toward negative infinity
and need a nonzero literal divisor.  Anything outside the fragment is
rejected with a tagged :class:`SourceDiagnostic`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .program import (
    Assert,
    Assign,
    Binary,
    BoolLit,
    Break,
    Decl,
    Exp,
    If,
    InputDecl,
    Nondet,
    Num,
    ParAssign,
    ProgramAst,
    Stmt,
    Unary,
    Var,
    While,
    expr_vars,
)

MEMORY_OP = "MEMORY_OP"
REAL_TYPE = "REAL_TYPE"
UNSUPPORTED_EXPR = "UNSUPPORTED_EXPR"
DIV_BY_VAR = "DIV_BY_VAR"
SYNTAX_ERROR = "SYNTAX_ERROR"
UNDECLARED_VAR = "UNDECLARED_VAR"

KEYWORDS = {"int", "if", "else", "while", "assert", "break", "true", "false", "nondet"}
REAL_KEYWORDS = {"float", "double", "real"}
MEMORY_KEYWORDS = {"malloc", "free", "sizeof", "struct"}


@dataclass(frozen=True)
class SourceDiagnostic:
    line: int
    column: int
    message: str
    tag: str
    severity: str = "error"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: [{self.tag}] {self.message}"

    def to_json(self) -> dict:
        return {
            "line": self.line,
            "column": self.column,
            "severity": self.severity,
            "tag": self.tag,
            "message": self.message,
        }


class ParseError(Exception):
    def __init__(self, diagnostics: list[SourceDiagnostic]):
        self.diagnostics = diagnostics
        super().__init__("\n".join(str(d) for d in diagnostics))


@dataclass(frozen=True)
class Token:
    kind: str  # NUM, REAL, ID, OP, EOF
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<real>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\.\d+)
  | (?P<num>\d+)
  | (?P<id>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\+\+|--|\+=|-=|\*=|/=|%=|&&|\|\||<<|>>|<=|>=|==|!=|->|[-+*/%<>=!(){};,\[\]&|^~?:.])
  | (?P<str>"[^"\n]*"|'[^'\n]*')
    """,
    re.VERBOSE | re.DOTALL,
)

_PRAGMA_INPUT = re.compile(
    r"^//\s*input\s+([A-Za-z_]\w*)(?:\s+in\s+\[\s*(-?\d+|-inf)\s*,\s*(-?\d+|\+?inf)\s*\])?\s*$"
)
_PRAGMA_BITWIDTH = re.compile(r"^//\s*bitwidth\s+(\d+)\s*$")
_PRAGMA_NONDET = re.compile(r"^//\s*nondet\s+in\s+\[\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*$")


def _bound(text: str) -> Optional[int]:
    return None if text.lstrip("+-") == "inf" else int(text)


class _Lexer:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[Token] = []
        self.diags: list[SourceDiagnostic] = []
        self.inputs: list[InputDecl] = []
        self.bitwidth: Optional[int] = None
        self.nondet_range: Optional[tuple[int, int]] = None

    def run(self) -> None:
        pos, line, line_start = 0, 1, 0
        src = self.source
        while pos < len(src):
            m = _TOKEN_RE.match(src, pos)
            col = pos - line_start + 1
            if m is None:
                self.diags.append(
                    SourceDiagnostic(line, col, f"unexpected character {src[pos]!r}", SYNTAX_ERROR)
                )
                pos += 1
                continue
            kind = m.lastgroup
            text = m.group()
            if kind == "nl":
                line += 1
                line_start = m.end()
            elif kind == "lcomment":
                self._pragma(text, line, col)
            elif kind == "bcomment":
                nls = text.count("\n")
                if nls:
                    line += nls
                    line_start = pos + text.rfind("\n") + 1
            elif kind == "real":
                self.diags.append(
                    SourceDiagnostic(line, col, f"real-valued literal {text}", REAL_TYPE)
                )
                self.tokens.append(Token("NUM", "0", line, col))
            elif kind == "str":
                self.diags.append(SourceDiagnostic(line, col, "string literal", UNSUPPORTED_EXPR))
            elif kind == "num":
                self.tokens.append(Token("NUM", text, line, col))
            elif kind == "id":
                self.tokens.append(Token("ID", text, line, col))
            elif kind == "op":
                self.tokens.append(Token("OP", text, line, col))
            pos = m.end()
        self.tokens.append(Token("EOF", "", line, pos - line_start + 1))

    def _pragma(self, text: str, line: int, col: int) -> None:
        m = _PRAGMA_INPUT.match(text)
        if m:
            lo = _bound(m.group(2)) if m.group(2) else None
            hi = _bound(m.group(3)) if m.group(3) else None
            if lo is not None and hi is not None and lo > hi:
                self.diags.append(
                    SourceDiagnostic(line, col, f"empty input domain for {m.group(1)}", SYNTAX_ERROR)
                )
            if any(d.name == m.group(1) for d in self.inputs):
                self.diags.append(
                    SourceDiagnostic(line, col, f"input {m.group(1)} declared twice", SYNTAX_ERROR)
                )
            self.inputs.append(InputDecl(m.group(1), lo, hi))
            return
        m = _PRAGMA_BITWIDTH.match(text)
        if m:
            self.bitwidth = int(m.group(1))
            return
        m = _PRAGMA_NONDET.match(text)
        if m:
            self.nondet_range = (int(m.group(1)), int(m.group(2)))


class _Parser:
    def __init__(self, lexer: _Lexer):
        self.toks = lexer.tokens
        self.pos = 0
        self.diags = lexer.diags
        self.declared: set[str] = {d.name for d in lexer.inputs}
        self.loop_depth = 0

    # -- token helpers --------------------------------------------------------
    def peek(self, k: int = 0) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("OP", "ID") and t.text == text

    def advance(self) -> Token:
        t = self.peek()
        self.pos += 1
        return t

    def fail(self, tok: Token, message: str, tag: str = SYNTAX_ERROR) -> None:
        self.diags.append(SourceDiagnostic(tok.line, tok.col, message, tag))
        raise _Abort()

    def expect(self, text: str) -> Token:
        t = self.peek()
        if not self.at(text):
            shown = t.text or "end of input"
            self.fail(t, f"expected {text!r}, found {shown!r}")
        return self.advance()

    def ident(self) -> Token:
        t = self.peek()
        if t.kind != "ID" or t.text in KEYWORDS:
            self._reject_special(t)
            self.fail(t, f"expected identifier, found {t.text or 'end of input'!r}")
        return self.advance()

    def _reject_special(self, t: Token) -> None:
        if t.kind == "OP" and t.text in ("*", "&", "->", "["):
            self.fail(t, "pointer or array access", MEMORY_OP)
        if t.kind == "ID" and t.text in REAL_KEYWORDS:
            self.fail(t, f"real-valued type {t.text}", REAL_TYPE)
        if t.kind == "ID" and t.text in MEMORY_KEYWORDS:
            self.fail(t, f"memory operation {t.text}", MEMORY_OP)

    # -- statements -----------------------------------------------------------
    def block(self) -> tuple[Stmt, ...]:
        self.expect("{")
        out = []
        while not self.at("}"):
            if self.peek().kind == "EOF":
                self.fail(self.peek(), "unterminated block")
            out.extend(self.statement())
        self.advance()
        return tuple(out)

    def statement(self) -> list[Stmt]:
        t = self.peek()
        self._reject_special(t)
        if t.kind == "OP" and t.text == ";":
            self.advance()
            return []
        if t.kind == "OP" and t.text == "{":
            return list(self.block())
        if t.kind == "OP" and t.text in ("++", "--"):
            self.advance()
            name = self.ident()
            self.expect(";")
            return [self._step(name, "+" if t.text == "++" else "-", t.line)]
        if t.kind != "ID":
            self.fail(t, f"unexpected {t.text or 'end of input'!r}")
        if t.text == "int":
            return self.declaration()
        if t.text == "if":
            return [self.if_stmt()]
        if t.text == "while":
            self.advance()
            self.expect("(")
            cond = self.condition()
            self.expect(")")
            self.loop_depth += 1
            body = self.block()
            self.loop_depth -= 1
            return [While(cond, body, line=t.line)]
        if t.text == "assert":
            self.advance()
            self.expect("(")
            cond = self.condition()
            self.expect(")")
            self.expect(";")
            return [Assert(cond, line=t.line, column=t.col)]
        if t.text == "break":
            self.advance()
            self.expect(";")
            if self.loop_depth == 0:
                self.fail(t, "break outside of a loop")
            return [Break(line=t.line)]
        return [self.assignment()]

    def declaration(self) -> list[Stmt]:
        self.advance()
        out: list[Stmt] = []
        while True:
            name = self.ident()
            if self.at("["):
                self.fail(self.peek(), "array declaration", MEMORY_OP)
            init = None
            if self.at("="):
                self.advance()
                init = self.rhs()
            if name.text in self.declared:
                self.fail(name, f"variable {name.text} declared twice")
            self.declared.add(name.text)
            out.append(Decl(name.text, init, line=name.line))
            if self.at(","):
                self.advance()
                continue
            self.expect(";")
            return out

    def if_stmt(self) -> If:
        t = self.advance()
        self.expect("(")
        cond = self.condition()
        self.expect(")")
        then = self.block()
        orelse: tuple[Stmt, ...] = ()
        if self.at("else"):
            self.advance()
            if self.at("if"):
                orelse = (self.if_stmt(),)
            else:
                orelse = self.block()
        return If(cond, then, orelse, line=t.line)

    def assignment(self) -> Stmt:
        first = self.ident()
        if self.at("[") or self.at("->") or self.at("."):
            self.fail(self.peek(), "array or field access", MEMORY_OP)
        if self.at("("):
            self.fail(first, f"call to unsupported function {first.text}", UNSUPPORTED_EXPR)
        names = [first]
        while self.at(","):
            self.advance()
            names.append(self.ident())
        for n in names:
            self._check_declared(n)
        op = self.peek()
        if len(names) > 1:
            self.expect("=")
            values = [self.rhs()]
            while self.at(","):
                self.advance()
                values.append(self.rhs())
            self.expect(";")
            if len(values) != len(names):
                self.fail(op, "assignment arity mismatch")
            if len({n.text for n in names}) != len(names):
                self.fail(op, "duplicate target in simultaneous assignment")
            return ParAssign(tuple(n.text for n in names), tuple(values), line=first.line)
        if op.text in ("++", "--"):
            self.advance()
            self.expect(";")
            return self._step(first, "+" if op.text == "++" else "-", first.line)
        if op.text in ("+=", "-=", "*=", "/=", "%="):
            self.advance()
            value = self.expr()
            self.expect(";")
            e = Binary(op.text[0], Var(first.text), value)
            self._check_division(e, op)
            return Assign(first.text, e, line=first.line)
        self.expect("=")
        value = self.rhs()
        self.expect(";")
        return Assign(first.text, value, line=first.line)

    def _step(self, name: Token, op: str, line: int) -> Assign:
        self._check_declared(name)
        return Assign(name.text, Binary(op, Var(name.text), Num(1)), line=line)

    def _check_declared(self, tok: Token) -> None:
        if tok.text not in self.declared:
            self.fail(tok, f"undeclared variable {tok.text}", UNDECLARED_VAR)

    def rhs(self) -> Exp:
        if self.at("nondet"):
            self.advance()
            self.expect("(")
            self.expect(")")
            return Nondet()
        return self.expr()

    def condition(self) -> Exp:
        if self.at("nondet") and self.peek(3).text == ")":
            return self.rhs()
        return self.expr()

    # -- expressions ------------------------------------------------------------
    def expr(self) -> Exp:
        return self.binary(1)

    _LEVELS = {
        1: ("||",),
        2: ("&&",),
        3: ("==", "!="),
        4: ("<", "<=", ">", ">="),
        5: ("+", "-"),
        6: ("*", "/", "%"),
    }

    def binary(self, level: int) -> Exp:
        if level > 6:
            return self.unary()
        left = self.binary(level + 1)
        while True:
            t = self.peek()
            if t.kind == "OP" and t.text in ("|", "^", "<<", ">>", "&", "?", "~"):
                self.fail(t, f"unsupported operator {t.text}", UNSUPPORTED_EXPR)
            if t.kind != "OP" or t.text not in self._LEVELS[level]:
                return left
            self.advance()
            right = self.binary(level + 1)
            left = Binary(t.text, left, right)
            if t.text in ("/", "%"):
                self._check_division(left, t)

    def _check_division(self, e: Binary, tok: Token) -> None:
        if e.op not in ("/", "%"):
            return
        d = e.right
        if isinstance(d, Num):
            if d.value == 0:
                self.fail(tok, "division by literal zero", UNSUPPORTED_EXPR)
            return
        if expr_vars(d):
            self.fail(tok, "division by a variable", DIV_BY_VAR)
        self.fail(tok, "divisor must be an integer literal", UNSUPPORTED_EXPR)

    def unary(self) -> Exp:
        t = self.peek()
        if t.kind == "OP" and t.text == "-":
            self.advance()
            inner = self.unary()
            if isinstance(inner, Num):
                return Num(-inner.value)
            return Unary("-", inner)
        if t.kind == "OP" and t.text == "+":
            self.advance()
            return self.unary()
        if t.kind == "OP" and t.text == "!":
            self.advance()
            return Unary("!", self.unary())
        if t.kind == "OP" and t.text in ("*", "&"):
            self.fail(t, "pointer dereference or address-of", MEMORY_OP)
        if t.kind == "OP" and t.text == "~":
            self.fail(t, "bitwise complement", UNSUPPORTED_EXPR)
        return self.primary()

    def primary(self) -> Exp:
        t = self.peek()
        if t.kind == "NUM":
            self.advance()
            return Num(int(t.text))
        if t.kind == "OP" and t.text == "(":
            self.advance()
            if self.peek().kind == "ID" and self.peek().text in REAL_KEYWORDS | {"int"}:
                self.fail(self.peek(), "type cast", REAL_TYPE if self.peek().text != "int" else UNSUPPORTED_EXPR)
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "ID":
            if t.text in ("true", "false"):
                self.advance()
                return BoolLit(t.text == "true")
            if t.text == "nondet":
                self.fail(t, "nondet() is only allowed as a whole right-hand side or condition", UNSUPPORTED_EXPR)
            self._reject_special(t)
            if t.text in KEYWORDS:
                self.fail(t, f"unexpected keyword {t.text}")
            self.advance()
            if self.at("("):
                self.fail(t, f"call to unsupported function {t.text}", UNSUPPORTED_EXPR)
            if self.at("[") or self.at("->") or self.at("."):
                self.fail(self.peek(), "array or field access", MEMORY_OP)
            self._check_declared(t)
            return Var(t.text)
        self._reject_special(t)
        self.fail(t, f"unexpected {t.text or 'end of input'!r} in expression")
        raise AssertionError("unreachable")


class _Abort(Exception):
    pass


def check(source: str) -> tuple[Optional[ProgramAst], list[SourceDiagnostic]]:
    """Parse ``source``; return the AST (or ``None``) and all diagnostics."""
    lexer = _Lexer(source)
    lexer.run()
    parser = _Parser(lexer)
    body: list[Stmt] = []
    try:
        while parser.peek().kind != "EOF":
            body.extend(parser.statement())
    except _Abort:
        pass
    diags = sorted(set(parser.diags), key=lambda d: (d.line, d.column, d.tag, d.message))
    if diags:
        return None, diags
    ast = ProgramAst(
        inputs=tuple(lexer.inputs),
        body=tuple(body),
        bitwidth=lexer.bitwidth,
        nondet_range=lexer.nondet_range,
    )
    return ast, []


def parse(source: str) -> ProgramAst:
    """Parse ``source`` or raise :class:`ParseError` carrying the diagnostics."""
    ast, diags = check(source)
    if ast is None:
        raise ParseError(diags)
    return ast


def parse_file(path: str) -> ProgramAst:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
