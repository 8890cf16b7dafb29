"""Closed arithmetic expression language for coefficient fields.

Grammar (precedence low to high, ^ binds tightest and is right associative):

    sum    := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?
    atom   := NUMBER | IDENT | IDENT '(' sum (',' sum)* ')' | '(' sum ')'

Variables are bare identifiers; which names are legal is decided by the
caller at validation time, not by the parser.  The function set is closed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EvalDomainError, ParseError, ValidationError

# function name -> arity
FUNCTIONS = {
    "sin": 1,
    "cos": 1,
    "exp": 1,
    "log": 1,
    "sqrt": 1,
    "abs": 1,
    "tanh": 1,
    "min": 2,
    "max": 2,
}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Num | Var | Neg | BinOp | Call


# ---------------------------------------------------------------- tokenizer

_TOKEN_CHARS = set("+-*/^(),")


def _tokenize(src: str):
    """Return a list of (kind, text, offset) plus a trailing ('end', '', len)."""
    tokens = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and src[j].isdigit():
                j += 1
            if j < n and src[j] == ".":
                j += 1
                while j < n and src[j].isdigit():
                    j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            tokens.append(("number", src[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(("ident", src[i:j], i))
            i = j
            continue
        if ch in _TOKEN_CHARS:
            tokens.append((ch, ch, i))
            i += 1
            continue
        tokens.append(("error", ch, i))
        i += 1
    tokens.append(("end", "", n))
    return tokens


_ATOM_START = ("'('", "'-'", "identifier", "number")


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.tokens = _tokenize(src)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, expected):
        kind, text, offset = self.peek()
        what = repr(text) if text else "end of input"
        raise ParseError(f"unexpected {what}", offset=offset, expected=expected)

    def expect(self, kind):
        if self.peek()[0] != kind:
            self.fail((f"'{kind}'",))
        return self.advance()

    def parse(self) -> Expr:
        e = self.sum()
        if self.peek()[0] != "end":
            self.fail(("'end of input'",))
        return e

    def sum(self) -> Expr:
        left = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.advance()[0]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.advance()[0]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.peek()[0] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[0] == "^":
            self.advance()
            # exponent re-enters at unary so x^-2 and x^2^3 work
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, offset = self.peek()
        if kind == "number":
            self.advance()
            return Num(float(text))
        if kind == "ident":
            self.advance()
            if self.peek()[0] != "(":
                return Var(text)
            if text not in FUNCTIONS:
                raise ParseError(
                    f"unknown function {text!r}",
                    offset=offset,
                    expected=tuple(sorted(FUNCTIONS)),
                )
            self.advance()
            args = [self.sum()]
            while self.peek()[0] == ",":
                self.advance()
                args.append(self.sum())
            close_kind, _, close_off = self.peek()
            if close_kind != ")":
                self.fail(("')'", "','"))
            self.advance()
            if len(args) != FUNCTIONS[text]:
                raise ParseError(
                    f"{text} takes {FUNCTIONS[text]} argument(s), got {len(args)}",
                    offset=close_off,
                    expected=(),
                )
            return Call(text, tuple(args))
        if kind == "(":
            self.advance()
            e = self.sum()
            self.expect(")")
            return e
        self.fail(_ATOM_START)


def parse_expr(src: str) -> Expr:
    """Parse a coefficient expression, raising ParseError with byte offset."""
    return _Parser(src).parse()


# ------------------------------------------------------------ pretty printer

_LEVEL_SUM, _LEVEL_TERM, _LEVEL_UNARY, _LEVEL_POWER, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _level(e: Expr) -> int:
    if isinstance(e, BinOp):
        if e.op in "+-":
            return _LEVEL_SUM
        if e.op in "*/":
            return _LEVEL_TERM
        return _LEVEL_POWER
    if isinstance(e, Neg):
        return _LEVEL_UNARY
    return _LEVEL_ATOM


def _wrap(e: Expr, minimum: int) -> str:
    s = expr_to_str(e)
    return f"({s})" if _level(e) < minimum else s


def expr_to_str(e: Expr) -> str:
    """Print with minimal parentheses; parse(expr_to_str(t)) == t structurally."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _LEVEL_UNARY)
    if isinstance(e, Call):
        return f"{e.name}({', '.join(expr_to_str(a) for a in e.args)})"
    if e.op in "+-":
        # left associative: right child at same level needs parentheses
        left = _wrap(e.left, _LEVEL_SUM)
        right = _wrap(e.right, _LEVEL_SUM + 1)
        return f"{left} {e.op} {right}"
    if e.op in "*/":
        left = _wrap(e.left, _LEVEL_TERM)
        right = _wrap(e.right, _LEVEL_TERM + 1)
        return f"{left} {e.op} {right}"
    # ^ is right associative and binds above unary minus
    left = _wrap(e.left, _LEVEL_ATOM)
    right = _wrap(e.right, _LEVEL_UNARY)
    return f"{left}^{right}"


# ----------------------------------------------------------------- evaluator

_UNARY_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
    "tanh": math.tanh,
}


def _as_env(point) -> dict:
    if isinstance(point, dict):
        return point
    names = ("x", "y")
    return {names[i]: float(v) for i, v in enumerate(point)}


def _eval(e: Expr, env: dict) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise EvalDomainError(f"unbound variable {e.name!r}") from None
    if isinstance(e, Neg):
        return -_eval(e.arg, env)
    if isinstance(e, Call):
        if e.name == "min":
            return min(_eval(e.args[0], env), _eval(e.args[1], env))
        if e.name == "max":
            return max(_eval(e.args[0], env), _eval(e.args[1], env))
        a = _eval(e.args[0], env)
        try:
            return _UNARY_FUNCS[e.name](a)
        except (ValueError, OverflowError):
            raise EvalDomainError(f"{e.name}({a!r}) is out of domain") from None
    a = _eval(e.left, env)
    b = _eval(e.right, env)
    op = e.op
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0.0:
            raise EvalDomainError("division by zero")
        return a / b
    try:
        r = math.pow(a, b)
    except (ValueError, OverflowError):
        raise EvalDomainError(f"{a!r}^{b!r} is out of domain") from None
    return r


def eval_expr(e: Expr, point) -> float:
    """Evaluate at a point (tuple of coordinates, or a name->value mapping)."""
    env = _as_env(point)
    v = _eval(e, env)
    if not math.isfinite(v):
        raise EvalDomainError("non-finite result", point=tuple(env.values()))
    return v


def variables_of(e: Expr) -> frozenset:
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Neg):
        return variables_of(e.arg)
    if isinstance(e, BinOp):
        return variables_of(e.left) | variables_of(e.right)
    if isinstance(e, Call):
        out = frozenset()
        for a in e.args:
            out |= variables_of(a)
        return out
    return frozenset()


def validate_variables(e: Expr, allowed, context="expression") -> None:
    extra = variables_of(e) - frozenset(allowed)
    if extra:
        raise ValidationError(
            f"{context} uses variables {sorted(extra)}; allowed: {sorted(allowed)}"
        )


def sample_field(e: Expr, grid):
    """Evaluate at every grid node in canonical order; returns a float array.

    Evaluation is pointwise (no vectorized shortcut) so sampled values are
    bitwise identical to eval_expr at each node.
    """
    vals = np.empty(grid.n_nodes, dtype=float)
    names = ("x", "y")
    for node in range(grid.n_nodes):
        coords = grid.node_coord(node)
        env = {names[d]: coords[d] for d in range(grid.dim)}
        try:
            vals[node] = _eval(e, env)
        except EvalDomainError as err:
            raise EvalDomainError(str(err), point=coords) from None
        if not math.isfinite(vals[node]):
            raise EvalDomainError("non-finite coefficient value", point=coords)
    return vals


ZERO = Num(0.0)
ONE = Num(1.0)


def const(v: float) -> Expr:
    return Num(float(v))
