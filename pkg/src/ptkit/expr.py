"""Expression ASTs for chart coefficients and patch parametrizations.

Grammar (infix, whitespace insignificant, ASCII identifiers):

    expr     := term (('+' | '-') term)*
    term     := unary ('*' unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)?
    exponent := UINT ('^' UINT)*          # right-associative, folded at parse
    atom     := RATIONAL | UINT | NAME | NAME '(' expr ')' | '(' expr ')'
    RATIONAL := UINT '/' UINT             # the only use of '/'

Precedence, tightest first: ^, unary -, *, binary +/-.  Exponents are
nonnegative integer literals; ``x^2^3`` means ``x^(2^3) = x^8``.  ``sin`` and
``cos`` are the only functions and are rejected unless explicitly allowed
(they belong in patch parametrizations, not chart coefficients).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Number = Union[Fraction, float]


class ExpressionError(ValueError):
    """Base class for parse/usage errors; carries a source position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ExpressionSyntaxError(ExpressionError):
    pass


class UnknownVariableError(ExpressionError):
    pass


class TrigNotAllowedError(ExpressionError):
    pass


@dataclass(frozen=True)
class Expression:
    def __add__(self, other: "Expression") -> "Expression":
        return add(self, other)

    def __sub__(self, other: "Expression") -> "Expression":
        return sub(self, other)

    def __mul__(self, other: "Expression") -> "Expression":
        return mul(self, other)

    def __neg__(self) -> "Expression":
        return neg(self)


@dataclass(frozen=True)
class Num(Expression):
    # Fraction for parsed literals; float only in machine-built expressions
    # (e.g. quadrature sums), never produced by the parser.
    value: Number


@dataclass(frozen=True)
class Var(Expression):
    name: str


@dataclass(frozen=True)
class Add(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Sub(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Mul(Expression):
    left: Expression
    right: Expression


@dataclass(frozen=True)
class Neg(Expression):
    operand: Expression


@dataclass(frozen=True)
class Pow(Expression):
    base: Expression
    exponent: int


@dataclass(frozen=True)
class Sin(Expression):
    operand: Expression


@dataclass(frozen=True)
class Cos(Expression):
    operand: Expression


ZERO = Num(Fraction(0))
ONE = Num(Fraction(1))


def _is_zero(e: Expression) -> bool:
    return isinstance(e, Num) and e.value == 0


def _is_one(e: Expression) -> bool:
    return isinstance(e, Num) and e.value == 1


def add(a: Expression, b: Expression) -> Expression:
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    return Add(a, b)


def sub(a: Expression, b: Expression) -> Expression:
    if _is_zero(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is_zero(a):
        return neg(b)
    return Sub(a, b)


def mul(a: Expression, b: Expression) -> Expression:
    if _is_zero(a) or _is_zero(b):
        return ZERO
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    return Mul(a, b)


def neg(a: Expression) -> Expression:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def evaluate(e: Expression, env: dict) -> float:
    """Numeric evaluation; ``env`` maps variable names to numbers."""
    if isinstance(e, Num):
        return float(e.value)
    if isinstance(e, Var):
        try:
            return float(env[e.name])
        except KeyError:
            raise KeyError(f"no value bound for variable {e.name!r}") from None
    if isinstance(e, Add):
        return evaluate(e.left, env) + evaluate(e.right, env)
    if isinstance(e, Sub):
        return evaluate(e.left, env) - evaluate(e.right, env)
    if isinstance(e, Mul):
        return evaluate(e.left, env) * evaluate(e.right, env)
    if isinstance(e, Neg):
        return -evaluate(e.operand, env)
    if isinstance(e, Pow):
        return evaluate(e.base, env) ** e.exponent
    if isinstance(e, Sin):
        return math.sin(evaluate(e.operand, env))
    if isinstance(e, Cos):
        return math.cos(evaluate(e.operand, env))
    raise TypeError(f"not an Expression node: {e!r}")


def differentiate(e: Expression, var: str) -> Expression:
    """Exact AST derivative with respect to ``var``."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == var else ZERO
    if isinstance(e, Add):
        return add(differentiate(e.left, var), differentiate(e.right, var))
    if isinstance(e, Sub):
        return sub(differentiate(e.left, var), differentiate(e.right, var))
    if isinstance(e, Mul):
        return add(
            mul(differentiate(e.left, var), e.right),
            mul(e.left, differentiate(e.right, var)),
        )
    if isinstance(e, Neg):
        return neg(differentiate(e.operand, var))
    if isinstance(e, Pow):
        if e.exponent == 0:
            return ZERO
        inner = differentiate(e.base, var)
        scale = mul(Num(Fraction(e.exponent)), pow_node(e.base, e.exponent - 1))
        return mul(scale, inner)
    if isinstance(e, Sin):
        return mul(Cos(e.operand), differentiate(e.operand, var))
    if isinstance(e, Cos):
        return neg(mul(Sin(e.operand), differentiate(e.operand, var)))
    raise TypeError(f"not an Expression node: {e!r}")


def pow_node(base: Expression, exponent: int) -> Expression:
    if exponent < 0:
        raise ValueError("exponent must be nonnegative")
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Num):
        return Num(base.value**exponent)
    return Pow(base, exponent)


def substitute(e: Expression, env: dict) -> Expression:
    """Replace variables by numbers or sub-expressions (used by fiber ops)."""
    if isinstance(e, Num):
        return e
    if isinstance(e, Var):
        if e.name not in env:
            return e
        repl = env[e.name]
        if isinstance(repl, Expression):
            return repl
        if isinstance(repl, (int, Fraction)):
            return Num(Fraction(repl))
        return Num(float(repl))
    if isinstance(e, Add):
        return add(substitute(e.left, env), substitute(e.right, env))
    if isinstance(e, Sub):
        return sub(substitute(e.left, env), substitute(e.right, env))
    if isinstance(e, Mul):
        return mul(substitute(e.left, env), substitute(e.right, env))
    if isinstance(e, Neg):
        return neg(substitute(e.operand, env))
    if isinstance(e, Pow):
        return pow_node(substitute(e.base, env), e.exponent)
    if isinstance(e, Sin):
        return Sin(substitute(e.operand, env))
    if isinstance(e, Cos):
        return Cos(substitute(e.operand, env))
    raise TypeError(f"not an Expression node: {e!r}")


def contains_trig(e: Expression) -> bool:
    if isinstance(e, (Sin, Cos)):
        return True
    if isinstance(e, (Add, Sub, Mul)):
        return contains_trig(e.left) or contains_trig(e.right)
    if isinstance(e, Neg):
        return contains_trig(e.operand)
    if isinstance(e, Pow):
        return contains_trig(e.base)
    return False


def free_variables(e: Expression) -> set:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Add, Sub, Mul)):
        return free_variables(e.left) | free_variables(e.right)
    if isinstance(e, Neg):
        return free_variables(e.operand)
    if isinstance(e, Pow):
        return free_variables(e.base)
    if isinstance(e, (Sin, Cos)):
        return free_variables(e.operand)
    return set()


_FUNCTIONS = ("sin", "cos")


class _Lexer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.source) and self.source[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self._skip_ws()
        if self.pos >= len(self.source):
            return None, self.pos
        ch = self.source[self.pos]
        start = self.pos
        if ch.isdigit():
            end = start
            while end < len(self.source) and self.source[end].isdigit():
                end += 1
            return ("int", self.source[start:end]), start
        if ch.isalpha() or ch == "_":
            end = start
            while end < len(self.source) and (
                self.source[end].isalnum() or self.source[end] == "_"
            ):
                end += 1
            return ("name", self.source[start:end]), start
        if ch in "+-*^/()":
            return ("op", ch), start
        raise ExpressionSyntaxError(f"unexpected character {ch!r}", start)

    def next(self):
        tok, start = self.peek()
        if tok is not None:
            self.pos = start + len(tok[1])
        return tok, start


class _Parser:
    def __init__(self, source: str, variables, allow_trig: bool):
        self.lexer = _Lexer(source)
        self.variables = tuple(variables)
        self.allow_trig = allow_trig

    def parse(self) -> Expression:
        e = self._expr()
        tok, start = self.lexer.peek()
        if tok is not None:
            raise ExpressionSyntaxError(f"unexpected token {tok[1]!r}", start)
        return e

    def _expr(self) -> Expression:
        e = self._term()
        while True:
            tok, _ = self.lexer.peek()
            if tok == ("op", "+"):
                self.lexer.next()
                e = Add(e, self._term())
            elif tok == ("op", "-"):
                self.lexer.next()
                e = Sub(e, self._term())
            else:
                return e

    def _term(self) -> Expression:
        e = self._unary()
        while True:
            tok, _ = self.lexer.peek()
            if tok == ("op", "*"):
                self.lexer.next()
                e = Mul(e, self._unary())
            else:
                return e

    def _unary(self) -> Expression:
        tok, _ = self.lexer.peek()
        if tok == ("op", "-"):
            self.lexer.next()
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Expression:
        base = self._atom()
        tok, _ = self.lexer.peek()
        if tok == ("op", "^"):
            self.lexer.next()
            k = self._exponent()
            return pow_node(base, k)
        return base

    def _exponent(self) -> int:
        tok, start = self.lexer.next()
        if tok is None or tok[0] != "int":
            raise ExpressionSyntaxError(
                "exponent must be a nonnegative integer literal", start
            )
        k = int(tok[1])
        nxt, _ = self.lexer.peek()
        if nxt == ("op", "^"):
            self.lexer.next()
            k = k ** self._exponent()
        return k

    def _atom(self) -> Expression:
        tok, start = self.lexer.next()
        if tok is None:
            raise ExpressionSyntaxError("unexpected end of input", start)
        kind, text = tok
        if kind == "int":
            nxt, _ = self.lexer.peek()
            if nxt == ("op", "/"):
                self.lexer.next()
                den, dstart = self.lexer.next()
                if den is None or den[0] != "int":
                    raise ExpressionSyntaxError(
                        "'/' is only valid inside a rational literal p/q", dstart
                    )
                if int(den[1]) == 0:
                    raise ExpressionSyntaxError("zero denominator", dstart)
                return Num(Fraction(int(text), int(den[1])))
            return Num(Fraction(int(text)))
        if kind == "name":
            nxt, _ = self.lexer.peek()
            if nxt == ("op", "("):
                if text not in _FUNCTIONS:
                    raise ExpressionSyntaxError(f"unknown function {text!r}", start)
                if not self.allow_trig:
                    raise TrigNotAllowedError(
                        f"{text} is not allowed in this context", start
                    )
                self.lexer.next()
                inner = self._expr()
                closing, cstart = self.lexer.next()
                if closing != ("op", ")"):
                    raise ExpressionSyntaxError("expected ')'", cstart)
                return Sin(inner) if text == "sin" else Cos(inner)
            if text not in self.variables:
                raise UnknownVariableError(f"unknown variable {text!r}", start)
            return Var(text)
        if tok == ("op", "("):
            inner = self._expr()
            closing, cstart = self.lexer.next()
            if closing != ("op", ")"):
                raise ExpressionSyntaxError("expected ')'", cstart)
            return inner
        if kind == "op" and text == "/":
            raise ExpressionSyntaxError(
                "'/' is only valid inside a rational literal p/q", start
            )
        raise ExpressionSyntaxError(f"unexpected token {text!r}", start)


def parse_expr(source: str, variables, allow_trig: bool = False) -> Expression:
    """Parse ``source`` over the given variable names.

    ``allow_trig`` admits sin/cos (patch parametrizations only).  Raises
    ExpressionSyntaxError / UnknownVariableError / TrigNotAllowedError, each
    carrying the offending source position.
    """
    return _Parser(source, variables, allow_trig).parse()
