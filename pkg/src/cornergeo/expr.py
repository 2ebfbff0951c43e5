"""Scalar expression language and second-order jet arithmetic.

Structure data (metric coefficients, frame components, deformation factors)
enters the package as small closed-form expressions in the chart coordinates
``x1, x2, x3``.  Rather than differentiate those expressions symbolically or
by finite differences, everything is evaluated as a *jet*: value, gradient
and Hessian propagated together through exact arithmetic rules.  Quantities
derived from first derivatives of the metric (Christoffel symbols, the frame
one-forms, ...) then still carry exact gradients one order down, which is all
the corner-structure identities ever need.

Grammar accepted by :func:`parse`::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?
    atom    := NUMBER | 'x1' | 'x2' | 'x3' | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := 'exp' | 'ln' | 'sin' | 'cos' | 'sqrt' | 'abs'

``^`` is right-associative and binds tighter than unary minus, so ``-x1^2``
means ``-(x1^2)``.  Numbers are decimal with optional exponent.  Constant
subexpressions are folded at parse time.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "ParseError",
    "EvalDomainError",
    "AbsAtZeroWarning",
    "Jet2",
    "jet_exp",
    "jet_log",
    "jet_sin",
    "jet_cos",
    "jet_sqrt",
    "jet_abs",
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Call",
    "ScalarExpr",
    "parse",
    "as_expr",
    "eval_jet2",
    "to_str",
]


class ParseError(ValueError):
    """Expression text could not be parsed; ``offset`` is the byte position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (offset {offset})")
        self.message = message
        self.offset = offset


class EvalDomainError(ArithmeticError):
    """An evaluation left the domain of a primitive (ln, sqrt, /, ^).

    ``subexpr`` names the offending subexpression when the evaluation came
    from a parsed expression; it is None for raw jet arithmetic.
    """

    def __init__(self, message: str, subexpr: str | None = None):
        text = message if subexpr is None else f"{message} in '{subexpr}'"
        super().__init__(text)
        self.message = message
        self.subexpr = subexpr


class AbsAtZeroWarning(RuntimeWarning):
    """abs() was differentiated at zero; the derivative was taken to be 0."""


# ---------------------------------------------------------------------------
# jets
# ---------------------------------------------------------------------------


class Jet2:
    """Truncated Taylor data (value, gradient, Hessian) at a chart point.

    ``grad`` and ``hess`` may be None, meaning "not tracked to that order":
    arithmetic propagates exactly the orders present in *both* operands, so
    a quantity built from first derivatives of exact jets automatically
    carries an exact gradient and no Hessian.  The invariant ``hess is not
    None implies grad is not None`` is maintained throughout.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value: float, grad=None, hess=None):
        self.value = float(value)
        self.grad = None if grad is None else np.asarray(grad, dtype=float)
        self.hess = None if hess is None else np.asarray(hess, dtype=float)

    @classmethod
    def constant(cls, value: float, order: int = 2) -> "Jet2":
        g = np.zeros(3) if order >= 1 else None
        h = np.zeros((3, 3)) if order >= 2 else None
        return cls(value, g, h)

    @classmethod
    def variable(cls, index: int, value: float, order: int = 2) -> "Jet2":
        if index not in (0, 1, 2):
            raise IndexError(f"coordinate index out of range: {index}")
        g = None
        if order >= 1:
            g = np.zeros(3)
            g[index] = 1.0
        h = np.zeros((3, 3)) if order >= 2 else None
        return cls(value, g, h)

    def __repr__(self) -> str:
        depth = 0 if self.grad is None else (1 if self.hess is None else 2)
        return f"Jet2({self.value!r}, depth={depth})"

    # -- ring operations ----------------------------------------------------

    def __neg__(self) -> "Jet2":
        return Jet2(
            -self.value,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
        )

    def __add__(self, other) -> "Jet2":
        o = _lift(other)
        g = h = None
        if self.grad is not None and o.grad is not None:
            g = self.grad + o.grad
            if self.hess is not None and o.hess is not None:
                h = self.hess + o.hess
        return Jet2(self.value + o.value, g, h)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet2":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "Jet2":
        return (-self) + _lift(other)

    def __mul__(self, other) -> "Jet2":
        o = _lift(other)
        g = h = None
        if self.grad is not None and o.grad is not None:
            g = self.grad * o.value + self.value * o.grad
            if self.hess is not None and o.hess is not None:
                cross = np.outer(self.grad, o.grad)
                h = self.hess * o.value + self.value * o.hess + cross + cross.T
        return Jet2(self.value * o.value, g, h)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet2":
        o = _lift(other)
        if o.value == 0.0:
            raise EvalDomainError("division by zero")
        v = self.value / o.value
        g = h = None
        if self.grad is not None and o.grad is not None:
            g = (self.grad - v * o.grad) / o.value
            if self.hess is not None and o.hess is not None:
                cross = np.outer(g, o.grad)
                h = (self.hess - v * o.hess - cross - cross.T) / o.value
        return Jet2(v, g, h)

    def __rtruediv__(self, other) -> "Jet2":
        return _lift(other) / self

    def __pow__(self, other) -> "Jet2":
        if isinstance(other, Jet2):
            if _is_const_jet(other):
                return _pow_const(self, other.value)
            # general exponent: a^b = exp(b ln a), requires a > 0
            if self.value <= 0.0:
                raise EvalDomainError(
                    "power with non-constant exponent requires a positive base"
                )
            return jet_exp(other * jet_log(self))
        return _pow_const(self, float(other))


def _lift(value) -> Jet2:
    if isinstance(value, Jet2):
        return value
    return Jet2.constant(float(value))


def _is_const_jet(j: Jet2) -> bool:
    if j.grad is None:
        return False
    if np.any(j.grad != 0.0):
        return False
    return j.hess is None or not np.any(j.hess != 0.0)


def _pow_const(a: Jet2, c: float) -> Jet2:
    if c == 0.0:
        return Jet2(
            1.0,
            None if a.grad is None else np.zeros(3),
            None if a.hess is None else np.zeros((3, 3)),
        )
    if c == 1.0:
        return Jet2(a.value, a.grad, a.hess)
    v0 = a.value
    if v0 == 0.0:
        if c.is_integer() and c >= 2:
            f1 = 0.0
            f2 = 2.0 if c == 2.0 else 0.0
            return _chain(a, 0.0, f1, f2)
        raise EvalDomainError("zero raised to a negative or fractional power")
    if v0 < 0.0 and not c.is_integer():
        raise EvalDomainError("negative base with fractional exponent")
    return _chain(a, v0**c, c * v0 ** (c - 1.0), c * (c - 1.0) * v0 ** (c - 2.0))


def _chain(a: Jet2, v: float, f1: float, f2: float) -> Jet2:
    """Push the jet ``a`` through a scalar map with derivatives f1, f2 at a.value."""
    g = h = None
    if a.grad is not None:
        g = f1 * a.grad
        if a.hess is not None:
            h = f1 * a.hess + f2 * np.outer(a.grad, a.grad)
    return Jet2(v, g, h)


def jet_exp(a: Jet2) -> Jet2:
    v = np.exp(a.value)
    return _chain(a, v, v, v)


def jet_log(a: Jet2) -> Jet2:
    if a.value <= 0.0:
        raise EvalDomainError("ln of a non-positive value")
    v0 = a.value
    return _chain(a, np.log(v0), 1.0 / v0, -1.0 / (v0 * v0))


def jet_sin(a: Jet2) -> Jet2:
    return _chain(a, np.sin(a.value), np.cos(a.value), -np.sin(a.value))


def jet_cos(a: Jet2) -> Jet2:
    return _chain(a, np.cos(a.value), -np.sin(a.value), -np.cos(a.value))


def jet_sqrt(a: Jet2) -> Jet2:
    if a.value <= 0.0:
        raise EvalDomainError("sqrt of a non-positive value")
    s = np.sqrt(a.value)
    return _chain(a, s, 0.5 / s, -0.25 / (s * a.value))


def jet_abs(a: Jet2) -> Jet2:
    if a.value == 0.0:
        warnings.warn(
            "abs differentiated at zero; derivative taken as 0",
            AbsAtZeroWarning,
            stacklevel=2,
        )
        sign = 0.0
    else:
        sign = 1.0 if a.value > 0.0 else -1.0
    return _chain(a, abs(a.value), sign, 0.0)


_FUNCTIONS: dict[str, Callable[[Jet2], Jet2]] = {
    "exp": jet_exp,
    "ln": jet_log,
    "sin": jet_sin,
    "cos": jet_cos,
    "sqrt": jet_sqrt,
    "abs": jet_abs,
}


# ---------------------------------------------------------------------------
# syntax tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    index: int  # 0-based; prints as x1/x2/x3


@dataclass(frozen=True)
class Unary:
    op: str  # only '-'
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Const, Var, Unary, Binary, Call]

# precedence levels used by the printer; a negative literal renders with a
# leading '-', so it parenthesizes like a unary node
_LEVEL_ADD, _LEVEL_MUL, _LEVEL_UNARY, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _prec(node: Node) -> int:
    if isinstance(node, Const):
        return _LEVEL_UNARY if node.value < 0 else _LEVEL_ATOM
    if isinstance(node, (Var, Call)):
        return _LEVEL_ATOM
    if isinstance(node, Unary):
        return _LEVEL_UNARY
    return {"+": _LEVEL_ADD, "-": _LEVEL_ADD, "*": _LEVEL_MUL, "/": _LEVEL_MUL, "^": _LEVEL_POW}[node.op]


def _fmt_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def to_str(node: Node) -> str:
    """Render a node back to source text; parse(to_str(n)) rebuilds n."""
    if isinstance(node, Const):
        return _fmt_number(node.value)
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Call):
        return f"{node.name}({to_str(node.arg)})"
    if isinstance(node, Unary):
        return "-" + _wrap(node.arg, _LEVEL_UNARY)
    op = node.op
    if op in "+-":
        return f"{_wrap(node.left, _LEVEL_ADD)} {op} {_wrap(node.right, _LEVEL_MUL)}"
    if op in "*/":
        return f"{_wrap(node.left, _LEVEL_MUL)}{op}{_wrap(node.right, _LEVEL_UNARY)}"
    # '^': the base must be an atom, the exponent may be any factor
    return f"{_wrap(node.left, _LEVEL_ATOM)}^{_wrap(node.right, _LEVEL_UNARY)}"


def _wrap(node: Node, min_level: int) -> str:
    text = to_str(node)
    return f"({text})" if _prec(node) < min_level else text


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------


def _eval(node: Node, x: np.ndarray, order: int) -> Jet2:
    if isinstance(node, Const):
        return Jet2.constant(node.value, order)
    if isinstance(node, Var):
        return Jet2.variable(node.index, x[node.index], order)
    try:
        if isinstance(node, Unary):
            return -_eval(node.arg, x, order)
        if isinstance(node, Call):
            return _FUNCTIONS[node.name](_eval(node.arg, x, order))
        a = _eval(node.left, x, order)
        if node.op == "^" and isinstance(node.right, Const):
            # a literal exponent keeps integer powers of negative bases legal
            return a**node.right.value
        b = _eval(node.right, x, order)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        return a**b
    except EvalDomainError as err:
        if err.subexpr is None:
            raise EvalDomainError(err.message, to_str(node)) from None
        raise


@dataclass(frozen=True)
class ScalarExpr:
    """A parsed scalar expression in the chart coordinates.

    Supports Python arithmetic (with other expressions or numbers), which
    builds new folded trees; ``str()`` renders minimal-parenthesis source.
    """

    root: Node

    def eval_jet2(self, point) -> Jet2:
        x = np.asarray(point, dtype=float).reshape(3)
        return _eval(self.root, x, 2)

    def value(self, point) -> float:
        x = np.asarray(point, dtype=float).reshape(3)
        return _eval(self.root, x, 0).value

    def __call__(self, point) -> float:
        return self.value(point)

    def __str__(self) -> str:
        return to_str(self.root)

    def __neg__(self) -> "ScalarExpr":
        return ScalarExpr(_fold_unary(self.root))

    def __add__(self, other) -> "ScalarExpr":
        return ScalarExpr(_fold_binary("+", self.root, _coerce(other)))

    def __radd__(self, other) -> "ScalarExpr":
        return ScalarExpr(_fold_binary("+", _coerce(other), self.root))

    def __sub__(self, other) -> "ScalarExpr":
        return ScalarExpr(_fold_binary("-", self.root, _coerce(other)))

    def __rsub__(self, other) -> "ScalarExpr":
        return ScalarExpr(_fold_binary("-", _coerce(other), self.root))

    def __mul__(self, other) -> "ScalarExpr":
        return ScalarExpr(_fold_binary("*", self.root, _coerce(other)))

    def __rmul__(self, other) -> "ScalarExpr":
        return ScalarExpr(_fold_binary("*", _coerce(other), self.root))

    def __truediv__(self, other) -> "ScalarExpr":
        return ScalarExpr(_fold_binary("/", self.root, _coerce(other)))

    def __rtruediv__(self, other) -> "ScalarExpr":
        return ScalarExpr(_fold_binary("/", _coerce(other), self.root))

    def __pow__(self, other) -> "ScalarExpr":
        return ScalarExpr(_fold_binary("^", self.root, _coerce(other)))


def _coerce(obj) -> Node:
    if isinstance(obj, ScalarExpr):
        return obj.root
    if isinstance(obj, (Const, Var, Unary, Binary, Call)):
        return obj
    return Const(float(obj))


def eval_jet2(expr: ScalarExpr, point, order: int = 2) -> Jet2:
    """Evaluate an expression to a jet at ``point``; ``order`` trims depth."""
    x = np.asarray(point, dtype=float).reshape(3)
    return _eval(expr.root, x, order)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_VARIABLES = {"x1": 0, "x2": 1, "x3": 2}


@dataclass(frozen=True)
class _Token:
    kind: str  # number | ident | op | lparen | rparen | comma | eof
    text: str
    offset: int


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUMBER_RE.match(src, i)
        if m:
            tokens.append(_Token("number", m.group(), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(src, i)
        if m:
            tokens.append(_Token("ident", m.group(), i))
            i = m.end()
            continue
        if ch in "+-*/^":
            tokens.append(_Token("op", ch, i))
        elif ch == "(":
            tokens.append(_Token("lparen", ch, i))
        elif ch == ")":
            tokens.append(_Token("rparen", ch, i))
        elif ch == ",":
            tokens.append(_Token("comma", ch, i))
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
        i += 1
    tokens.append(_Token("eof", "", n))
    return tokens


def _fold_unary(node: Node) -> Node:
    if isinstance(node, Const):
        return Const(-node.value)
    return Unary("-", node)


def _fold_binary(op: str, left: Node, right: Node) -> Node:
    node = Binary(op, left, right)
    if isinstance(left, Const) and isinstance(right, Const):
        try:
            return Const(_eval(node, np.zeros(3), 0).value)
        except EvalDomainError:
            return node
    return node


def _fold_call(name: str, arg: Node) -> Node:
    node = Call(name, arg)
    if isinstance(arg, Const):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", AbsAtZeroWarning)
                return Const(_eval(node, np.zeros(3), 0).value)
        except EvalDomainError:
            return node
    return node


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, tok: _Token) -> "ParseError":
        if tok.kind == "eof":
            return ParseError("unexpected end of input", tok.offset)
        return ParseError(f"unexpected {tok.text!r}", tok.offset)

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            node = _fold_binary(op, node, self.parse_term())
        return node

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            node = _fold_binary(op, node, self.parse_factor())
        return node

    def parse_factor(self) -> Node:
        if self.peek().kind == "op" and self.peek().text == "-":
            self.advance()
            return _fold_unary(self.parse_factor())
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_atom()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            return _fold_binary("^", base, self.parse_factor())
        return base

    def parse_atom(self) -> Node:
        tok = self.advance()
        if tok.kind == "number":
            return Const(float(tok.text))
        if tok.kind == "ident":
            if tok.text in _VARIABLES:
                return Var(_VARIABLES[tok.text])
            if tok.text in _FUNCTIONS:
                opener = self.advance()
                if opener.kind != "lparen":
                    raise ParseError(
                        f"expected '(' after {tok.text!r}", opener.offset
                    )
                arg = self.parse_expr()
                closer = self.advance()
                if closer.kind == "comma":
                    raise ParseError(
                        f"{tok.text!r} takes a single argument", closer.offset
                    )
                if closer.kind != "rparen":
                    raise self.fail(closer)
                return _fold_call(tok.text, arg)
            raise ParseError(f"unknown identifier {tok.text!r}", tok.offset)
        if tok.kind == "lparen":
            node = self.parse_expr()
            closer = self.advance()
            if closer.kind != "rparen":
                raise self.fail(closer)
            return node
        raise self.fail(tok)


def parse(src: str) -> ScalarExpr:
    """Parse expression source text; raises :class:`ParseError` with offset."""
    parser = _Parser(_tokenize(src))
    node = parser.parse_expr()
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise parser.fail(trailing)
    return ScalarExpr(node)


def as_expr(obj) -> ScalarExpr:
    """Coerce a string, number or expression into a :class:`ScalarExpr`."""
    if isinstance(obj, ScalarExpr):
        return obj
    if isinstance(obj, str):
        return parse(obj)
    return ScalarExpr(Const(float(obj)))
