"""Expression grammar for cdf segment bodies and breakpoints.

Grammar (whitespace ignored)::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = atom , [ ("^" | "**") , unary ] ;
    atom    = number | "x" | "t" | func , "(" , expr , ")" | "(" , expr , ")" ;
    func    = "phi" | "exp" | "ln" | "abs" ;
    number  = digits , [ "." , digits ] , [ ("e" | "E") , [ "+" | "-" ] , digits ] ;

``^`` binds tighter than unary minus, so ``-x^2`` is ``-(x^2)``, and it is
right-associative. ``+ - * /`` are left-associative. A minus sign directly
in front of a numeric literal folds into a negative constant.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .specfun import std_normal_cdf

__all__ = [
    "Const",
    "Var",
    "Param",
    "Unary",
    "Binary",
    "Expr",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "EvalError",
    "parse",
    "evaluate",
    "evaluate_array",
    "to_text",
    "affine_in_x",
    "depends_on_x",
    "depends_on_t",
    "Coef",
]

UNARY_OPS = ("phi", "exp", "ln", "abs", "neg")
BINARY_OPS = ("add", "sub", "mul", "div", "pow")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    """The argument ``x``."""


@dataclass(frozen=True)
class Param:
    """The index ``t``."""


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Param, Unary, Binary]


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r}", offset)
        self.name = name


class EvalError(ArithmeticError):
    pass


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos))
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, offset = self.peek()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", offset)
        return self.take()

    def parse(self) -> Expr:
        node = self.expr()
        kind, text, offset = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {text!r}", offset)
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = "add" if self.take()[1] == "+" else "sub"
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = "mul" if self.take()[1] == "*" else "div"
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            if self.peek()[0] == "num" and self.peek(1)[1] not in ("^", "**"):
                return Const(-float(self.take()[1]))
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] in ("^", "**"):
            self.take()
            return Binary("pow", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, offset = self.peek()
        if kind == "num":
            self.take()
            return Const(float(text))
        if kind == "ident":
            self.take()
            if text == "x":
                return Var()
            if text == "t":
                return Param()
            if text in ("phi", "exp", "ln", "abs"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(text, arg)
            raise UnknownIdentifierError(text, offset)
        if kind == "op" and text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"expected an operand, found {found}", offset)


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text).parse()


_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}


def to_text(e: Expr) -> str:
    """Fully parenthesized text that parses back to ``e``."""
    if isinstance(e, Const):
        if e.value < 0 or (e.value == 0 and math.copysign(1.0, e.value) < 0):
            return f"(-{repr(-e.value)})"
        return repr(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Param):
        return "t"
    if isinstance(e, Unary):
        if e.op == "neg":
            return f"(-({to_text(e.arg)}))"
        return f"{e.op}({to_text(e.arg)})"
    return f"({to_text(e.left)} {_SYMBOL[e.op]} {to_text(e.right)})"


def depends_on_x(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Unary):
        return depends_on_x(e.arg)
    if isinstance(e, Binary):
        return depends_on_x(e.left) or depends_on_x(e.right)
    return False


def depends_on_t(e: Expr) -> bool:
    if isinstance(e, Param):
        return True
    if isinstance(e, Unary):
        return depends_on_t(e.arg)
    if isinstance(e, Binary):
        return depends_on_t(e.left) or depends_on_t(e.right)
    return False


def _finite(value: float) -> float:
    if not math.isfinite(value):
        raise EvalError("non-finite result")
    return value


def evaluate(e: Expr, x: float, t: float) -> float:
    """Scalar evaluation of ``e`` at argument ``x`` and index ``t``."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(x)
    if isinstance(e, Param):
        return float(t)
    if isinstance(e, Unary):
        a = evaluate(e.arg, x, t)
        if e.op == "neg":
            return -a
        if e.op == "abs":
            return abs(a)
        if e.op == "phi":
            return std_normal_cdf(a)
        if e.op == "exp":
            try:
                return math.exp(a)
            except OverflowError as exc:
                raise EvalError(f"exp overflow at {a}") from exc
        if e.op == "ln":
            if a <= 0:
                raise EvalError(f"ln of nonpositive argument {a}")
            return math.log(a)
        raise EvalError(f"unknown unary op {e.op}")
    a = evaluate(e.left, x, t)
    b = evaluate(e.right, x, t)
    if e.op == "add":
        return _finite(a + b)
    if e.op == "sub":
        return _finite(a - b)
    if e.op == "mul":
        return _finite(a * b)
    if e.op == "div":
        if b == 0:
            raise EvalError("division by zero")
        return _finite(a / b)
    if e.op == "pow":
        try:
            return _finite(math.pow(a, b))
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise EvalError(f"invalid power {a}^{b}") from exc
    raise EvalError(f"unknown binary op {e.op}")


def evaluate_array(e: Expr, x, t: float) -> np.ndarray:
    """Vectorized evaluation over an array of ``x`` values (``t`` scalar)."""
    with np.errstate(all="ignore"):
        out = _eval_arr(e, np.asarray(x, dtype=float), float(t))
    out = np.broadcast_to(out, np.shape(x)).astype(float, copy=True)
    if not np.all(np.isfinite(out)):
        raise EvalError("non-finite result")
    return out


def _eval_arr(e: Expr, x: np.ndarray, t: float):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Param):
        return t
    if isinstance(e, Unary):
        a = _eval_arr(e.arg, x, t)
        if e.op == "neg":
            return -a
        if e.op == "abs":
            return np.abs(a)
        if e.op == "phi":
            return std_normal_cdf(np.asarray(a, dtype=float))
        if e.op == "exp":
            return np.exp(a)
        if e.op == "ln":
            if np.any(np.asarray(a) <= 0):
                raise EvalError("ln of nonpositive argument")
            return np.log(a)
        raise EvalError(f"unknown unary op {e.op}")
    a = _eval_arr(e.left, x, t)
    b = _eval_arr(e.right, x, t)
    if e.op == "add":
        return a + b
    if e.op == "sub":
        return a - b
    if e.op == "mul":
        return a * b
    if e.op == "div":
        if np.any(np.asarray(b) == 0):
            raise EvalError("division by zero")
        return a / b
    if e.op == "pow":
        if np.any((np.asarray(a) < 0) & (np.asarray(b) != np.round(b))):
            raise EvalError("negative base with non-integer exponent")
        return np.power(np.asarray(a, dtype=float), b)
    raise EvalError(f"unknown binary op {e.op}")


ZERO = Const(0.0)
ONE = Const(1.0)


def affine_in_x(e: Expr):
    """Return ``(intercept, slope)`` expressions free of x if ``e`` is affine in x, else None."""
    if not depends_on_x(e):
        return e, ZERO
    if isinstance(e, Var):
        return ZERO, ONE
    if isinstance(e, Unary):
        if e.op != "neg":
            return None
        inner = affine_in_x(e.arg)
        if inner is None:
            return None
        return Unary("neg", inner[0]), Unary("neg", inner[1])
    if isinstance(e, Binary):
        if e.op in ("add", "sub"):
            left, right = affine_in_x(e.left), affine_in_x(e.right)
            if left is None or right is None:
                return None
            return Binary(e.op, left[0], right[0]), Binary(e.op, left[1], right[1])
        if e.op == "mul":
            if not depends_on_x(e.left):
                inner = affine_in_x(e.right)
                return None if inner is None else (
                    Binary("mul", e.left, inner[0]), Binary("mul", e.left, inner[1]))
            if not depends_on_x(e.right):
                inner = affine_in_x(e.left)
                return None if inner is None else (
                    Binary("mul", inner[0], e.right), Binary("mul", inner[1], e.right))
            return None
        if e.op == "div" and not depends_on_x(e.right):
            inner = affine_in_x(e.left)
            return None if inner is None else (
                Binary("div", inner[0], e.right), Binary("div", inner[1], e.right))
    return None


@dataclass(frozen=True)
class Coef:
    """A scalar coefficient that may depend on ``t``.

    ``raw`` keeps the value exactly as it appeared in a spec (number or
    expression text) so specs round-trip unchanged.
    """

    raw: object
    expr: Expr

    @classmethod
    def of(cls, raw) -> "Coef":
        if isinstance(raw, Coef):
            return raw
        if isinstance(raw, bool):
            raise TypeError("boolean is not a coefficient")
        if isinstance(raw, (int, float)):
            return cls(raw, Const(float(raw)))
        if isinstance(raw, str):
            e = parse(raw)
            if depends_on_x(e):
                raise ExprSyntaxError("coefficient may not depend on x", 0)
            return cls(raw, e)
        raise TypeError(f"cannot use {raw!r} as a coefficient")

    def at(self, t: float) -> float:
        return evaluate(self.expr, 0.0, t)

    @property
    def constant(self) -> bool:
        return not depends_on_t(self.expr)
