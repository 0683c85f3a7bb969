"""Symbolic integer expressions in a canonical sum-of-products form.

An :class:`Expr` is a polynomial with rational coefficients over *atoms*.
Atoms are integer valued: plain symbols, floor division and modulo by a
positive literal, integer powers with a symbolic exponent, and opaque
extension atoms (tabulated lookups, iteration searches) that know how to
evaluate and substitute themselves.

Monomials are sorted by atom key and constants are folded, so two
expressions are equal exactly when their canonical forms are equal.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Mapping, Optional, Union

Number = Union[int, Fraction]
Env = Mapping[str, int]


def _num(c: Number) -> Number:
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


# ---------------------------------------------------------------------------
# atoms
# ---------------------------------------------------------------------------


class Atom:
    """Integer-valued leaf of a polynomial."""

    __slots__ = ("_key",)
    order = 0

    def key(self) -> tuple:
        k = getattr(self, "_key", None)
        if k is None:
            k = (self.order, self.text())
            self._key = k
        return k

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Atom) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __lt__(self, other: "Atom") -> bool:
        return self.key() < other.key()

    def text(self) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def free_symbols(self) -> frozenset[str]:  # pragma: no cover - abstract
        raise NotImplementedError

    def substitute(self, mapping: Mapping[str, "Expr"]) -> "Expr":  # pragma: no cover
        raise NotImplementedError

    def evaluate(self, env: Env) -> int:  # pragma: no cover - abstract
        raise NotImplementedError

    def subexprs(self) -> tuple["Expr", ...]:
        return ()


class Sym(Atom):
    __slots__ = ("name",)
    order = 0

    def __init__(self, name: str):
        self.name = name
        self._key = None

    def text(self) -> str:
        return self.name

    def free_symbols(self) -> frozenset[str]:
        return frozenset((self.name,))

    def substitute(self, mapping):
        repl = mapping.get(self.name)
        return repl if repl is not None else Expr.atom(self)

    def evaluate(self, env: Env) -> int:
        try:
            return env[self.name]
        except KeyError:
            raise KeyError(f"no value for symbol {self.name!r}") from None


class FloorDiv(Atom):
    """``floor(num / den)`` with a positive integer ``den``."""

    __slots__ = ("num", "den")
    order = 1

    def __init__(self, num: "Expr", den: int):
        self.num = num
        self.den = den
        self._key = None

    def text(self) -> str:
        return f"({self.num.text()})/{self.den}"

    def free_symbols(self):
        return self.num.free_symbols()

    def substitute(self, mapping):
        return floordiv(self.num.substitute(mapping), self.den)

    def evaluate(self, env: Env) -> int:
        v = self.num.evaluate(env)
        if isinstance(v, Fraction):
            return v.numerator // (v.denominator * self.den)
        return v // self.den

    def subexprs(self):
        return (self.num,)


class Mod(Atom):
    """``num mod den`` in ``[0, den)``."""

    __slots__ = ("num", "den")
    order = 2

    def __init__(self, num: "Expr", den: int):
        self.num = num
        self.den = den
        self._key = None

    def text(self) -> str:
        return f"({self.num.text()}) mod {self.den}"

    def free_symbols(self):
        return self.num.free_symbols()

    def substitute(self, mapping):
        return mod(self.num.substitute(mapping), self.den)

    def evaluate(self, env: Env) -> int:
        v = self.num.evaluate(env)
        if isinstance(v, Fraction):
            raise ValueError("mod of a non-integer value")
        return v % self.den

    def subexprs(self):
        return (self.num,)


class Pow(Atom):
    """``base ** exp`` for an integer literal base and non-negative exponent."""

    __slots__ = ("base", "exp")
    order = 3

    def __init__(self, base: int, exp: "Expr"):
        self.base = base
        self.exp = exp
        self._key = None

    def text(self) -> str:
        return f"{self.base}^({self.exp.text()})"

    def free_symbols(self):
        return self.exp.free_symbols()

    def substitute(self, mapping):
        return power(self.base, self.exp.substitute(mapping))

    def evaluate(self, env: Env) -> int:
        e = self.exp.evaluate(env)
        if isinstance(e, Fraction) or e < 0:
            raise ValueError(f"invalid exponent {e}")
        return self.base**e

    def subexprs(self):
        return (self.exp,)


class Divergence(ArithmeticError):
    """An opaque atom found that the quantity it computes does not exist (the loop never exits)."""


class Opaque(Atom):
    """Base for extension atoms whose meaning lives outside the algebra.

    Subclasses hold their symbolic inputs in ``args`` and implement
    ``rebuild`` and ``compute``.
    """

    __slots__ = ("args",)
    order = 4

    def __init__(self, args: tuple["Expr", ...]):
        self.args = tuple(args)
        self._key = None

    def label(self) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def rebuild(self, args: tuple["Expr", ...]) -> "Opaque":  # pragma: no cover
        raise NotImplementedError

    def compute(self, values: tuple[int, ...]) -> int:  # pragma: no cover
        raise NotImplementedError

    def text(self) -> str:
        return f"{self.label()}({', '.join(a.text() for a in self.args)})"

    def free_symbols(self):
        out: frozenset[str] = frozenset()
        for a in self.args:
            out |= a.free_symbols()
        return out

    def substitute(self, mapping):
        return Expr.atom(self.rebuild(tuple(a.substitute(mapping) for a in self.args)))

    def evaluate(self, env: Env) -> int:
        vals = []
        for a in self.args:
            v = a.evaluate(env)
            if isinstance(v, Fraction):
                raise ValueError("non-integer argument to opaque atom")
            vals.append(v)
        return self.compute(tuple(vals))

    def subexprs(self):
        return self.args


# ---------------------------------------------------------------------------
# polynomial expressions
# ---------------------------------------------------------------------------

Monomial = tuple  # tuple[tuple[Atom, int], ...], sorted by atom key


def _mono_key(m: Monomial) -> tuple:
    return tuple((a.key(), p) for a, p in m)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d: dict[Atom, int] = {}
    for atom, p in a:
        d[atom] = d.get(atom, 0) + p
    for atom, p in b:
        d[atom] = d.get(atom, 0) + p
    return tuple(sorted(d.items(), key=lambda ap: ap[0].key()))


class Expr:
    """Immutable canonical polynomial over atoms."""

    __slots__ = ("terms", "_hash", "_text")

    def __init__(self, terms: Mapping[Monomial, Number] | None = None):
        items = [(m, _num(c)) for m, c in (terms or {}).items() if c != 0]
        items.sort(key=lambda mc: (len(mc[0]) == 0, _mono_key(mc[0])))
        self.terms: tuple[tuple[Monomial, Number], ...] = tuple(items)
        self._hash: Optional[int] = None
        self._text: Optional[str] = None

    # -- constructors ---------------------------------------------------------
    @staticmethod
    def const(c: Number) -> "Expr":
        return Expr({(): c})

    @staticmethod
    def atom(a: Atom) -> "Expr":
        return Expr({((a, 1),): 1})

    # -- basic protocol -------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Expr.const(other)
        if not isinstance(other, Expr):
            return NotImplemented
        return self.text() == other.text()

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.text())
        return self._hash

    def __repr__(self) -> str:
        return f"Expr({self.text()})"

    # -- arithmetic ---------------------------------------------------------------
    def _dict(self) -> dict[Monomial, Number]:
        return dict(self.terms)

    def __add__(self, other) -> "Expr":
        other = as_expr(other)
        d = self._dict()
        for m, c in other.terms:
            d[m] = d.get(m, 0) + c
        return Expr(d)

    __radd__ = __add__

    def __neg__(self) -> "Expr":
        return Expr({m: -c for m, c in self.terms})

    def __sub__(self, other) -> "Expr":
        return self + (-as_expr(other))

    def __rsub__(self, other) -> "Expr":
        return as_expr(other) - self

    def __mul__(self, other) -> "Expr":
        other = as_expr(other)
        d: dict[Monomial, Number] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = _mono_mul(m1, m2)
                d[m] = d.get(m, 0) + c1 * c2
        return Expr(d)

    __rmul__ = __mul__

    def scale(self, c: Number) -> "Expr":
        return Expr({m: v * c for m, v in self.terms})

    # -- queries ----------------------------------------------------------------
    def is_constant(self) -> bool:
        return all(not m for m, _ in self.terms)

    def constant(self) -> Number:
        for m, c in self.terms:
            if not m:
                return c
        return 0

    def constant_value(self) -> Number:
        if not self.is_constant():
            raise ValueError(f"{self.text()} is not constant")
        return self.constant()

    def atoms(self) -> set[Atom]:
        return {a for m, _ in self.terms for a, _ in m}

    def all_atoms(self) -> set[Atom]:
        """Atoms at every nesting depth."""
        out: set[Atom] = set()
        stack = [self]
        while stack:
            e = stack.pop()
            for a in e.atoms():
                if a not in out:
                    out.add(a)
                    stack.extend(a.subexprs())
        return out

    def free_symbols(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for a in self.atoms():
            out |= a.free_symbols()
        return out

    def has_opaque(self) -> bool:
        return any(not isinstance(a, Sym) for a in self.all_atoms())

    def degree(self) -> int:
        return max((sum(p for _, p in m) for m, _ in self.terms), default=0)

    def is_integral(self) -> bool:
        return all(isinstance(c, int) for _, c in self.terms)

    def linear_form(self) -> Optional[tuple[dict[str, Number], Number]]:
        """``({sym: coeff}, const)`` when linear over plain symbols only."""
        coeffs: dict[str, Number] = {}
        const: Number = 0
        for m, c in self.terms:
            if not m:
                const = c
            elif len(m) == 1 and m[0][1] == 1 and isinstance(m[0][0], Sym):
                coeffs[m[0][0].name] = c
            else:
                return None
        return coeffs, const

    def split_linear(self, name: str) -> Optional[tuple["Expr", "Expr"]]:
        """Write ``self = a + b*name`` with ``name`` free in neither part."""
        a: dict[Monomial, Number] = {}
        b: dict[Monomial, Number] = {}
        for m, c in self.terms:
            power = 0
            rest = []
            for atom, p in m:
                if isinstance(atom, Sym) and atom.name == name:
                    power = p
                else:
                    if name in atom.free_symbols():
                        return None
                    rest.append((atom, p))
            if power == 0:
                a[m] = a.get(m, 0) + c
            elif power == 1:
                r = tuple(rest)
                b[r] = b.get(r, 0) + c
            else:
                return None
        return Expr(a), Expr(b)

    def poly_coeffs(self, name: str) -> Optional[list["Expr"]]:
        """Coefficients ``[c0, c1, ...]`` of ``self`` as a polynomial in ``name``."""
        out: dict[int, dict[Monomial, Number]] = {}
        for m, c in self.terms:
            power = 0
            rest = []
            for atom, p in m:
                if isinstance(atom, Sym) and atom.name == name:
                    power = p
                else:
                    if name in atom.free_symbols():
                        return None
                    rest.append((atom, p))
            d = out.setdefault(power, {})
            r = tuple(rest)
            d[r] = d.get(r, 0) + c
        if not out:
            return [Expr()]
        return [Expr(out.get(i, {})) for i in range(max(out) + 1)]

    # -- substitution and evaluation -------------------------------------------
    def substitute(self, mapping: Mapping[str, "Expr"]) -> "Expr":
        if not mapping:
            return self
        acc = Expr()
        for m, c in self.terms:
            term = Expr.const(c)
            for atom, p in m:
                sub = atom.substitute(mapping)
                for _ in range(p):
                    term = term * sub
            acc = acc + term
        return acc

    def evaluate(self, env: Env) -> Number:
        total: Number = 0
        for m, c in self.terms:
            v: Number = c
            for atom, p in m:
                v = v * atom.evaluate(env) ** p
            total += v
        return _num(total) if isinstance(total, Fraction) else total

    def evaluate_int(self, env: Env) -> int:
        v = self.evaluate(env)
        if isinstance(v, Fraction):
            raise ValueError(f"{self.text()} evaluated to non-integer {v}")
        return v

    # -- printing ---------------------------------------------------------------
    def text(self) -> str:
        if self._text is None:
            self._text = _format(self.terms)
        return self._text

    __str__ = text


def _format_mono(m: Monomial) -> str:
    parts = []
    for atom, p in m:
        t = atom.text()
        if isinstance(atom, Mod):
            t = f"[{t}]"
        parts.append(t if p == 1 else f"{t}^{p}")
    return "*".join(parts)


def _format(terms) -> str:
    if not terms:
        return "0"
    out = []
    for i, (m, c) in enumerate(terms):
        neg = c < 0
        mag = -c if neg else c
        if not m:
            body = str(mag)
        elif mag == 1:
            body = _format_mono(m)
        else:
            body = f"{mag}*{_format_mono(m)}"
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return Expr.const(v)
    if isinstance(v, str):
        return sym(v)
    raise TypeError(f"cannot convert {v!r} to Expr")


def sym(name: str) -> Expr:
    return Expr.atom(Sym(name))


def const(c: Number) -> Expr:
    return Expr.const(c)


ZERO = Expr()
ONE = Expr.const(1)


# ---------------------------------------------------------------------------
# normalizing constructors for floor / mod / pow
# ---------------------------------------------------------------------------


def _integralize(e: Expr) -> tuple[Expr, int]:
    """Return ``(e * L, L)`` with integer coefficients."""
    L = 1
    for _, c in e.terms:
        if isinstance(c, Fraction):
            L = _lcm(L, c.denominator)
    return (e.scale(L), L) if L != 1 else (e, 1)


def floordiv(num, den: int) -> Expr:
    """``floor(num / den)``, normalized; ``den`` must be a nonzero literal."""
    num = as_expr(num)
    if den == 0:
        raise ZeroDivisionError("floor division by zero")
    if den < 0:
        num, den = -num, -den
    num, L = _integralize(num)
    den *= L
    if num.is_constant():
        return Expr.const(num.constant() // den)
    if den == 1:
        return num
    outer: dict[Monomial, Number] = {}
    inner: dict[Monomial, Number] = {}
    for m, c in num.terms:
        if not m:
            q, r = divmod(c, den)
            if q:
                outer[()] = outer.get((), 0) + q
            if r:
                inner[()] = r
        elif c % den == 0:
            outer[m] = c // den
        else:
            inner[m] = c
    rest = Expr(inner)
    result = Expr(outer)
    if rest.is_constant():
        return result + rest.constant() // den
    return result + Expr.atom(FloorDiv(rest, den))


def mod(num, den: int) -> Expr:
    """``num mod den`` for a positive literal ``den``; result in ``[0, den)``."""
    num = as_expr(num)
    if den <= 0:
        raise ValueError("modulus must be positive")
    num, L = _integralize(num)
    if L != 1:
        # (n/L) mod d is not integer-valued in general; keep the division explicit
        return num.scale(Fraction(1, L)) - floordiv(num, den * L).scale(den)
    if den == 1:
        return Expr()
    reduced = Expr({m: c % den for m, c in num.terms})
    if reduced.is_constant():
        return Expr.const(reduced.constant() % den)
    return Expr.atom(Mod(reduced, den))


def power(base: int, exp) -> Expr:
    exp = as_expr(exp)
    if exp.is_constant():
        e = exp.constant_value()
        if isinstance(e, Fraction) or e < 0:
            raise ValueError("exponent must be a non-negative integer")
        return Expr.const(base**e)
    if base in (0, 1):
        # 0^e for e >= 1 is 0, but e may be 0; keep it opaque for base 0
        return Expr.const(1) if base == 1 else Expr.atom(Pow(base, exp))
    return Expr.atom(Pow(base, exp))


def ceildiv(num, den: int) -> Expr:
    return -floordiv(-as_expr(num), den)


# ---------------------------------------------------------------------------
# boolean constraints
# ---------------------------------------------------------------------------


class Bool:
    __slots__ = ("_text",)

    def text(self) -> str:  # pragma: no cover - abstract
        raise NotImplementedError

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Bool) and self.text() == other.text()

    def __hash__(self) -> int:
        return hash(("B", self.text()))

    def __repr__(self) -> str:
        return f"Bool({self.text()})"

    __str__ = lambda self: self.text()  # noqa: E731


class BConst(Bool):
    __slots__ = ("value",)

    def __init__(self, value: bool):
        self.value = value
        self._text = None

    def text(self) -> str:
        return "true" if self.value else "false"


TRUE = BConst(True)
FALSE = BConst(False)


class Lit(Bool):
    """``expr <op> 0`` with op in ``<=``, ``==``, ``!=``."""

    __slots__ = ("expr", "op")

    def __init__(self, expr: Expr, op: str):
        self.expr = expr
        self.op = op
        self._text = None

    def text(self) -> str:
        if self._text is None:
            self._text = _format_lit(self.expr, self.op)
        return self._text


class And(Bool):
    __slots__ = ("args",)

    def __init__(self, args: tuple[Bool, ...]):
        self.args = args
        self._text = None

    def text(self) -> str:
        if self._text is None:
            self._text = " && ".join(_paren(a) for a in self.args)
        return self._text


class Or(Bool):
    __slots__ = ("args",)

    def __init__(self, args: tuple[Bool, ...]):
        self.args = args
        self._text = None

    def text(self) -> str:
        if self._text is None:
            self._text = " || ".join(_paren(a) for a in self.args)
        return self._text


class InSet(Bool):
    """Membership of an integer expression in an :class:`IntervalSet`."""

    __slots__ = ("expr", "iset")

    def __init__(self, expr: Expr, iset):
        self.expr = expr
        self.iset = iset
        self._text = None

    def text(self) -> str:
        if self._text is None:
            self._text = f"{self.expr.text()} in {self.iset.text()}"
        return self._text


def _paren(b: Bool) -> str:
    return f"({b.text()})" if isinstance(b, (And, Or)) else b.text()


def _format_lit(e: Expr, op: str) -> str:
    c = e.constant()
    lhs = e - c
    rhs = -c
    if op == "<=":
        coeffs = [v for m, v in lhs.terms]
        if coeffs and all(v < 0 for v in coeffs):
            return f"{(-lhs).text()} >= {_fmt_num(-rhs)}"
        return f"{lhs.text()} <= {_fmt_num(rhs)}"
    return f"{lhs.text()} {op} {_fmt_num(rhs)}"


def _fmt_num(c: Number) -> str:
    return str(c)


def _content(e: Expr) -> int:
    g = 0
    for m, c in e.terms:
        if m:
            g = gcd(g, int(c))
    return g


def lit(expr: Expr, op: str) -> Bool:
    """Build a normalized literal ``expr op 0``."""
    if op not in ("<=", "==", "!="):
        raise ValueError(op)
    expr, _ = _integralize(expr)
    if expr.is_constant():
        c = expr.constant()
        return BConst(c <= 0 if op == "<=" else (c == 0) == (op == "=="))
    g = _content(expr)
    c = expr.constant()
    lhs = expr - c
    if op == "<=":
        if g > 1:
            # g*L + c <= 0  <=>  L + ceil(c/g) <= 0
            lhs = Expr({m: v // g for m, v in lhs.terms})
            c = -((-c) // g)
        return Lit(lhs + c, "<=")
    if g > 1:
        if c % g:
            return FALSE if op == "==" else TRUE
        lhs = Expr({m: v // g for m, v in lhs.terms})
        c //= g
    e = lhs + c
    if e.terms and e.terms[0][1] < 0:
        e = -e
    return Lit(e, op)


def le(a, b) -> Bool:
    return lit(as_expr(a) - as_expr(b), "<=")


def lt(a, b) -> Bool:
    return lit(as_expr(a) - as_expr(b) + 1, "<=")


def ge(a, b) -> Bool:
    return le(b, a)


def gt(a, b) -> Bool:
    return lt(b, a)


def eq(a, b) -> Bool:
    return lit(as_expr(a) - as_expr(b), "==")


def ne(a, b) -> Bool:
    return lit(as_expr(a) - as_expr(b), "!=")


def in_set(e, iset) -> Bool:
    e = as_expr(e)
    if iset.is_empty():
        return FALSE
    if iset.intervals == ((None, None),):
        return TRUE
    if e.is_constant():
        return BConst(e.constant_value() in iset)
    if len(iset.intervals) == 1:
        lo, hi = iset.intervals[0]
        parts = []
        if lo is not None:
            parts.append(ge(e, lo))
        if hi is not None:
            parts.append(le(e, hi))
        return conj(*parts)
    return InSet(e, iset)


def conj(*args: Bool) -> Bool:
    flat: list[Bool] = []
    seen: set[str] = set()
    bounds: dict[str, int] = {}  # linear part -> index in flat of its tightest upper bound
    for a in args:
        items = a.args if isinstance(a, And) else (a,)
        for b in items:
            if isinstance(b, BConst):
                if not b.value:
                    return FALSE
                continue
            t = b.text()
            if t in seen:
                continue
            seen.add(t)
            if isinstance(b, Lit) and b.op == "<=":
                c = b.expr.constant()
                key = (b.expr - c).text()
                j = bounds.get(key)
                if j is not None:
                    if c > flat[j].expr.constant():
                        flat[j] = b
                    continue
                bounds[key] = len(flat)
            flat.append(b)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*args: Bool) -> Bool:
    flat: list[Bool] = []
    seen: set[str] = set()
    for a in args:
        items = a.args if isinstance(a, Or) else (a,)
        for b in items:
            if isinstance(b, BConst):
                if b.value:
                    return TRUE
                continue
            t = b.text()
            if t not in seen:
                seen.add(t)
                flat.append(b)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def negate(b: Bool) -> Bool:
    if isinstance(b, BConst):
        return BConst(not b.value)
    if isinstance(b, Lit):
        if b.op == "<=":
            return lit(-b.expr + 1, "<=")
        return lit(b.expr, "!=" if b.op == "==" else "==")
    if isinstance(b, And):
        return disj(*(negate(a) for a in b.args))
    if isinstance(b, Or):
        return conj(*(negate(a) for a in b.args))
    if isinstance(b, InSet):
        return in_set(b.expr, b.iset.complement())
    raise TypeError(b)


def bsubstitute(b: Bool, mapping: Mapping[str, Expr]) -> Bool:
    if not mapping or isinstance(b, BConst):
        return b
    if isinstance(b, Lit):
        return lit(b.expr.substitute(mapping), b.op)
    if isinstance(b, And):
        return conj(*(bsubstitute(a, mapping) for a in b.args))
    if isinstance(b, Or):
        return disj(*(bsubstitute(a, mapping) for a in b.args))
    if isinstance(b, InSet):
        return in_set(b.expr.substitute(mapping), b.iset)
    raise TypeError(b)


def bevaluate(b: Bool, env: Env) -> bool:
    if isinstance(b, BConst):
        return b.value
    if isinstance(b, Lit):
        v = b.expr.evaluate(env)
        if b.op == "<=":
            return v <= 0
        return (v == 0) == (b.op == "==")
    if isinstance(b, And):
        return all(bevaluate(a, env) for a in b.args)
    if isinstance(b, Or):
        return any(bevaluate(a, env) for a in b.args)
    if isinstance(b, InSet):
        v = b.expr.evaluate(env)
        if isinstance(v, Fraction):
            return False
        return v in b.iset
    raise TypeError(b)


def bfree_symbols(b: Bool) -> frozenset[str]:
    out: frozenset[str] = frozenset()
    for e in bexprs(b):
        out |= e.free_symbols()
    return out


def bexprs(b: Bool) -> list[Expr]:
    if isinstance(b, (Lit, InSet)):
        return [b.expr]
    if isinstance(b, (And, Or)):
        return [e for a in b.args for e in bexprs(a)]
    return []


def literals(b: Bool) -> list[Bool]:
    """Leaves (``Lit``/``InSet``) of a boolean formula."""
    if isinstance(b, (Lit, InSet)):
        return [b]
    if isinstance(b, (And, Or)):
        return [x for a in b.args for x in literals(a)]
    return []


def map_bool(b: Bool, fn: Callable[[Expr], Expr]) -> Bool:
    """Rebuild ``b`` applying ``fn`` to every leaf expression."""
    if isinstance(b, BConst):
        return b
    if isinstance(b, Lit):
        return lit(fn(b.expr), b.op)
    if isinstance(b, InSet):
        return in_set(fn(b.expr), b.iset)
    if isinstance(b, And):
        return conj(*(map_bool(a, fn) for a in b.args))
    return disj(*(map_bool(a, fn) for a in b.args))


def conjuncts(b: Bool) -> list[Bool]:
    if isinstance(b, And):
        return list(b.args)
    if isinstance(b, BConst) and b.value:
        return []
    return [b]


def pre(name: str) -> str:
    """Pre-state symbol for program variable ``name``."""
    return f"{name}₀"


def is_pre(symbol: str) -> bool:
    return symbol.endswith("₀")


def unpre(symbol: str) -> str:
    return symbol[:-1] if is_pre(symbol) else symbol


def pre_env(names: Iterable[str]) -> dict[str, Expr]:
    return {n: sym(pre(n)) for n in names}
