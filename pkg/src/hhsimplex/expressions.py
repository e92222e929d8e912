"""Small cartesian expression language for CLI-defined functions.

Grammar (whitespace ignored)::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := base ("^" integer)?
    base   := number | var | "(" expr ")" | func "(" expr ")"
    var    := "x" integer          # 1-based cartesian coordinate
    func   := "abs" | "exp" | "max0"

A leading "-" is also accepted as unary minus.  Expressions evaluate in the
cartesian variables x1..xn; barycentric inputs are converted through the
simplex vertices before evaluation.  Purely polynomial expressions (no abs,
exp, max0 or division by a non-constant) can be lowered to a
:class:`~hhsimplex.functions.BaryPolynomial` so the exact integration backend
applies.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionMismatchError, ExpressionEvalError
from .functions import BaryPolynomial, FunctionSpec
from .simplex import Simplex

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\^|[-+*/()]))"
)

_FUNCS = ("abs", "exp", "max0")

# Cartesian polynomials are dicts {exponent tuple: coefficient}.
_CartPoly = dict[tuple[int, ...], float]


class _Node:
    def eval(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def max_var(self) -> int:
        return 0

    def cart_poly(self, nvars: int) -> Optional[_CartPoly]:
        """Expression as a cartesian polynomial, or None if not polynomial."""
        return None


@dataclass(frozen=True)
class _Num(_Node):
    value: float

    def eval(self, X):
        return np.full(X.shape[0], self.value)

    def cart_poly(self, nvars):
        return {(0,) * nvars: self.value}


@dataclass(frozen=True)
class _Var(_Node):
    index: int  # 0-based

    def eval(self, X):
        return X[:, self.index]

    def max_var(self):
        return self.index + 1

    def cart_poly(self, nvars):
        e = [0] * nvars
        e[self.index] = 1
        return {tuple(e): 1.0}


@dataclass(frozen=True)
class _BinOp(_Node):
    op: str
    left: _Node
    right: _Node

    def eval(self, X):
        a, b = self.left.eval(X), self.right.eval(X)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        with np.errstate(divide="ignore", invalid="ignore"):
            return a / b

    def max_var(self):
        return max(self.left.max_var(), self.right.max_var())

    def cart_poly(self, nvars):
        a = self.left.cart_poly(nvars)
        b = self.right.cart_poly(nvars)
        if a is None or b is None:
            return None
        if self.op == "+":
            return _poly_add(a, b, 1.0)
        if self.op == "-":
            return _poly_add(a, b, -1.0)
        if self.op == "*":
            return _poly_mul(a, b)
        # Division is polynomial only by a nonzero constant.
        if set(b) <= {(0,) * nvars}:
            c = b.get((0,) * nvars, 0.0)
            if c != 0.0:
                return {e: v / c for e, v in a.items()}
        return None


@dataclass(frozen=True)
class _Pow(_Node):
    base: _Node
    power: int

    def eval(self, X):
        return self.base.eval(X) ** self.power

    def max_var(self):
        return self.base.max_var()

    def cart_poly(self, nvars):
        b = self.base.cart_poly(nvars)
        if b is None:
            return None
        out = {(0,) * nvars: 1.0}
        for _ in range(self.power):
            out = _poly_mul(out, b)
        return out


@dataclass(frozen=True)
class _Call(_Node):
    func: str
    arg: _Node

    def eval(self, X):
        v = self.arg.eval(X)
        if self.func == "abs":
            return np.abs(v)
        if self.func == "exp":
            with np.errstate(over="ignore"):
                return np.exp(v)
        return np.maximum(v, 0.0)  # max0

    def max_var(self):
        return self.arg.max_var()


@dataclass(frozen=True)
class _Neg(_Node):
    arg: _Node

    def eval(self, X):
        return -self.arg.eval(X)

    def max_var(self):
        return self.arg.max_var()

    def cart_poly(self, nvars):
        a = self.arg.cart_poly(nvars)
        if a is None:
            return None
        return {e: -v for e, v in a.items()}


def _poly_add(a: _CartPoly, b: _CartPoly, sign: float) -> _CartPoly:
    out = dict(a)
    for e, v in b.items():
        out[e] = out.get(e, 0.0) + sign * v
    return out


def _poly_mul(a: _CartPoly, b: _CartPoly) -> _CartPoly:
    out: _CartPoly = {}
    for e1, v1 in a.items():
        for e2, v2 in b.items():
            key = tuple(x + y for x, y in zip(e1, e2))
            out[key] = out.get(key, 0.0) + v1 * v2
    return out


class _Parser:
    def __init__(self, source: str):
        self.tokens = self._tokenize(source)
        self.pos = 0

    @staticmethod
    def _tokenize(source: str) -> list[str]:
        tokens = []
        pos = 0
        while pos < len(source):
            m = _TOKEN_RE.match(source, pos)
            if m is None:
                if source[pos:].strip() == "":
                    break
                raise ExpressionEvalError(
                    f"unexpected character {source[pos]!r} at position {pos}"
                )
            tokens.append(m.group().strip())
            pos = m.end()
        return tokens

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise ExpressionEvalError("unexpected end of expression")
        self.pos += 1
        return tok

    def expect(self, tok: str) -> None:
        got = self.take()
        if got != tok:
            raise ExpressionEvalError(f"expected {tok!r}, got {got!r}")

    def parse(self) -> _Node:
        node = self.expr()
        if self.peek() is not None:
            raise ExpressionEvalError(f"trailing input from {self.peek()!r}")
        return node

    def expr(self) -> _Node:
        negate = False
        if self.peek() == "-":
            self.take()
            negate = True
        node = self.term()
        if negate:
            node = _Neg(node)
        while self.peek() in ("+", "-"):
            op = self.take()
            node = _BinOp(op, node, self.term())
        return node

    def term(self) -> _Node:
        node = self.factor()
        while self.peek() in ("*", "/"):
            op = self.take()
            node = _BinOp(op, node, self.factor())
        return node

    def factor(self) -> _Node:
        node = self.base()
        if self.peek() == "^":
            self.take()
            tok = self.take()
            if not tok.isdigit():
                raise ExpressionEvalError(
                    f"exponent must be a nonnegative integer literal, got {tok!r}"
                )
            node = _Pow(node, int(tok))
        return node

    def base(self) -> _Node:
        tok = self.take()
        if tok == "(":
            node = self.expr()
            self.expect(")")
            return node
        if tok in _FUNCS:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return _Call(tok, arg)
        m = re.fullmatch(r"x(\d+)", tok)
        if m:
            idx = int(m.group(1))
            if idx < 1:
                raise ExpressionEvalError("variables are x1, x2, ... (1-based)")
            return _Var(idx - 1)
        try:
            return _Num(float(tok))
        except ValueError:
            raise ExpressionEvalError(f"unexpected token {tok!r}") from None


def parse_expression(source: str) -> _Node:
    return _Parser(source).parse()


@dataclass(frozen=True)
class Expression(FunctionSpec):
    """A function given by source text in the cartesian grammar above."""

    source: str

    def __post_init__(self):
        object.__setattr__(self, "_ast", parse_expression(self.source))

    @property
    def ast(self) -> _Node:
        return self._ast  # type: ignore[attr-defined]

    def required_dim(self) -> int:
        return self.ast.max_var()

    def validate_for(self, s: Simplex) -> None:
        need = self.required_dim()
        if need > s.dim:
            raise DimensionMismatchError(
                f"expression uses x{need} but the simplex has dimension {s.dim}"
            )

    def evaluate_batch(self, s: Simplex, xi: np.ndarray) -> np.ndarray:
        self.validate_for(s)
        X = xi @ s.vertices
        vals = np.asarray(self.ast.eval(X), dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ExpressionEvalError(
                f"expression {self.source!r} produced a non-finite value"
            )
        return vals

    def to_bary_polynomial(self, s: Simplex) -> Optional[BaryPolynomial]:
        """Lower to a barycentric polynomial by substituting x_d = sum_i xi_i v_id.

        Returns None when the expression is not polynomial.
        """
        self.validate_for(s)
        n = s.dim
        cart = self.ast.cart_poly(n)
        if cart is None:
            return None
        m = s.num_vertices
        # Linear forms for each cartesian variable in barycentric slots.
        var_forms = [
            {
                tuple(1 if t == i else 0 for t in range(m)): float(s.vertices[i, d])
                for i in range(m)
                if s.vertices[i, d] != 0.0
            }
            for d in range(n)
        ]
        zero = (0,) * m
        total: dict[tuple[int, ...], float] = {}
        for exps, coeff in cart.items():
            term: dict[tuple[int, ...], float] = {zero: coeff}
            for d, e in enumerate(exps):
                for _ in range(e):
                    term = _bary_mul(term, var_forms[d])
            for k, v in term.items():
                total[k] = total.get(k, 0.0) + v
        # Homogenize constants implicitly: all-zero exponents integrate as 1.
        return BaryPolynomial(tuple((v, k) for k, v in total.items()), m)


def _bary_mul(p: dict, q: dict) -> dict:
    out: dict[tuple[int, ...], float] = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            key = tuple(a + b for a, b in zip(e1, e2))
            out[key] = out.get(key, 0.0) + c1 * c2
    return out
