"""Small expression language for the coefficients a(x), g(x) and nonlinearity f(u).

Grammar, loosest binding first::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right associative
    atom    := NUMBER | NAME | NAME '(' expr (',' expr)* ')' | '(' expr ')'

so ``^`` binds tighter than unary minus (``-2^2 == -4``) and ``2^-1`` is
accepted.  Names are the variables ``u`` and ``x1 .. x{N-1}`` plus the
functions in ``FUNCTIONS``.  Evaluation works on floats or numpy arrays and
raises ``DomainError`` instead of producing NaN or infinity.
"""

from __future__ import annotations

import math
import re
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class DomainError(ArithmeticError):
    pass


class UnboundVariableError(KeyError):
    pass


# -- AST -----------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]


Expr = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS: dict[str, tuple[int, Callable]] = {
    "exp": (1, np.exp),
    "log": (1, np.log),
    "sin": (1, np.sin),
    "cos": (1, np.cos),
    "abs": (1, np.abs),
    "sqrt": (1, np.sqrt),
    "min": (2, np.minimum),
    "max": (2, np.maximum),
}

DEFAULT_VARIABLES = ("u", "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        mt = _TOKEN.match(text, pos)
        if mt is None or mt.end() == pos:
            off = pos + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExprSyntaxError(f"unexpected character {text[off]!r}", len(text[:off].encode()))
        kind = mt.lastgroup
        start = mt.start(kind)
        out.append((kind, mt.group(kind), len(text[:start].encode())))
        pos = mt.end()
    out.append(("end", "", len(text.encode())))
    return out


class _Parser:
    def __init__(self, text: str, variables: Iterable[str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = set(variables)

    def peek(self):
        return self.toks[self.i]

    def take(self, value: str | None = None):
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ExprSyntaxError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprSyntaxError(f"unexpected {tok[1]!r}", tok[2])
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            left = BinOp(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.peek()[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, text, off = self.peek()
        if kind == "num":
            self.take()
            return Num(float(text))
        if kind == "name":
            self.take()
            if self.peek()[1] == "(":
                if text not in FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {text!r}", off)
                self.take("(")
                args = [self.expr()]
                while self.peek()[1] == ",":
                    self.take()
                    args.append(self.expr())
                self.take(")")
                arity = FUNCTIONS[text][0]
                if len(args) != arity:
                    raise ExprSyntaxError(f"{text} takes {arity} argument(s), got {len(args)}", off)
                return Call(text, tuple(args))
            if text in FUNCTIONS:
                raise ExprSyntaxError(f"function {text!r} needs arguments", off)
            if text not in self.variables:
                raise ExprSyntaxError(f"unknown variable {text!r}", off)
            return Var(text)
        if text == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        raise ExprSyntaxError(f"unexpected {text or 'end of input'!r}", off)


def parse(text: str, variables: Iterable[str] = DEFAULT_VARIABLES) -> Expr:
    return _Parser(text, variables).parse()


def to_text(e: Expr) -> str:
    """Fully parenthesized source text; parse(to_text(e)) == e."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)} {e.op} {to_text(e.right)})"
    return f"{e.func}({', '.join(to_text(a) for a in e.args)})"


def free_variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Num):
        return set()
    if isinstance(e, Neg):
        return free_variables(e.operand)
    if isinstance(e, BinOp):
        return free_variables(e.left) | free_variables(e.right)
    return set().union(*(free_variables(a) for a in e.args))


def _finite(value, what: str):
    if not np.all(np.isfinite(value)):
        raise DomainError(f"{what} left its domain")
    return value


def _eval(e: Expr, env: Mapping[str, object]):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise UnboundVariableError(e.name) from None
    if isinstance(e, Neg):
        return -_eval(e.operand, env)
    if isinstance(e, BinOp):
        lhs = _eval(e.left, env)
        rhs = _eval(e.right, env)
        with np.errstate(all="ignore"):
            if e.op == "+":
                out = np.add(lhs, rhs)
            elif e.op == "-":
                out = np.subtract(lhs, rhs)
            elif e.op == "*":
                out = np.multiply(lhs, rhs)
            elif e.op == "/":
                if np.any(np.asarray(rhs) == 0):
                    raise DomainError("division by zero")
                out = np.divide(lhs, rhs)
            else:
                out = np.power(np.asarray(lhs, dtype=float), rhs)
        return _finite(out, f"'{e.op}'")
    args = [_eval(a, env) for a in e.args]
    if e.func == "log" and np.any(np.asarray(args[0]) <= 0):
        raise DomainError("log of a non-positive number")
    if e.func == "sqrt" and np.any(np.asarray(args[0]) < 0):
        raise DomainError("sqrt of a negative number")
    with np.errstate(all="ignore"):
        out = FUNCTIONS[e.func][1](*args)
    return _finite(out, e.func)


def evaluate(e: Expr, bindings: Mapping[str, object] | None = None, **kw):
    """Evaluate with scalar or array bindings; returns float for scalar input."""
    env = dict(bindings or {})
    env.update(kw)
    out = _eval(e, env)
    if np.ndim(out) == 0:
        return float(out)
    return np.asarray(out, dtype=float)


def evaluate_on(e: Expr, coords: np.ndarray) -> np.ndarray:
    """Evaluate an expression in x1..x{d} at every row of ``coords``."""
    env = {f"x{k + 1}": coords[:, k] for k in range(coords.shape[1])}
    out = evaluate(e, env)
    return np.broadcast_to(np.asarray(out, dtype=float), (coords.shape[0],)).copy()


# -- antiderivative ------------------------------------------------------------


def adaptive_simpson(fn: Callable[[float], float], a: float, b: float, tol: float = 1e-12, max_depth: int = 40) -> float:
    """Integral of fn over [a, b] by adaptive Simpson with Richardson correction."""
    if a == b:
        return 0.0
    fa, fb = fn(a), fn(b)
    c = 0.5 * (a + b)
    fc = fn(c)
    whole = (b - a) / 6.0 * (fa + 4 * fc + fb)
    total = 0.0
    stack = [(a, b, fa, fb, fc, whole, tol, 0)]
    while stack:
        a, b, fa, fb, fc, whole, eps, depth = stack.pop()
        c = 0.5 * (a + b)
        d, e = 0.5 * (a + c), 0.5 * (c + b)
        fd, fe = fn(d), fn(e)
        left = (c - a) / 6.0 * (fa + 4 * fd + fc)
        right = (b - c) / 6.0 * (fc + 4 * fe + fb)
        delta = left + right - whole
        # the relative floor stops subdivision once roundoff dominates
        if depth >= max_depth or abs(delta) <= 15 * eps or abs(delta) <= 1e-14 * abs(left + right):
            total += left + right + delta / 15.0
        else:
            stack.append((a, c, fa, fc, fd, left, eps / 2, depth + 1))
            stack.append((c, b, fc, fb, fe, right, eps / 2, depth + 1))
    return total


def _scalar_fn(f: Expr, var: str = "u") -> Callable[[float], float]:
    return lambda t: float(_eval(f, {var: t}))


def antiderivative(f: Expr, xi: float, tol: float = 1e-12) -> float:
    """F(xi) = integral of f(t) dt from 0 to xi; F(0) = 0 exactly."""
    if xi == 0:
        return 0.0
    return adaptive_simpson(_scalar_fn(f), 0.0, float(xi), tol=tol)


class Primitive:
    """F(xi) for a nonlinearity f, vectorized.

    Uses ``closed_form`` when given.  Otherwise F is tabulated on the grid
    ``k * step`` over a range that grows geometrically on demand (up to
    ``table_limit``), and read back through a cubic Hermite interpolant whose
    slopes are exact f values.  Points past the table are integrated directly.
    """

    def __init__(self, f: Expr, closed_form: Expr | None = None, step: float = 1e-3):
        self.f = f
        self.closed_form = closed_form
        self.step = step
        self._lock = threading.Lock()
        self._k_lo = 0
        self._k_hi = 0
        self._vals = np.zeros(1)
        self._spline: CubicHermiteSpline | None = None

    def f_values(self, u):
        u = np.asarray(u, dtype=float)
        out = evaluate(self.f, u=u)
        return np.broadcast_to(out, u.shape).astype(float) if np.ndim(u) else float(out)

    def _cells(self, left: np.ndarray) -> np.ndarray:
        """Integrals of f over [left, left + step], tolerance 1e-15 per cell."""
        h = self.step
        pts = left[:, None] + h * np.linspace(0.0, 1.0, 5)[None, :]
        fv = np.asarray(self.f_values(pts.ravel()), dtype=float).reshape(pts.shape)
        whole = h / 6.0 * (fv[:, 0] + 4 * fv[:, 2] + fv[:, 4])
        halves = h / 12.0 * (fv[:, 0] + 4 * fv[:, 1] + 2 * fv[:, 2] + 4 * fv[:, 3] + fv[:, 4])
        delta = halves - whole
        out = halves + delta / 15.0
        fn = _scalar_fn(self.f)
        for t in np.flatnonzero(np.abs(delta) > np.maximum(15e-15, 1e-14 * np.abs(halves))):
            out[t] = adaptive_simpson(fn, float(left[t]), float(left[t]) + h, tol=1e-15)
        return out

    def _extend(self, lo: float, hi: float) -> None:
        k_lo = math.floor(lo / self.step) - 2
        k_hi = math.ceil(hi / self.step) + 2
        with self._lock:
            if self._spline is not None and self._k_lo <= k_lo and k_hi <= self._k_hi:
                return
            span = max(self._k_hi - self._k_lo, 64)
            k_cap = math.ceil(self.table_limit / self.step) + 2
            if k_lo < self._k_lo:
                k_lo = max(min(k_lo, self._k_lo - span), -k_cap)
            else:
                k_lo = self._k_lo
            if k_hi > self._k_hi:
                k_hi = min(max(k_hi, self._k_hi + span), k_cap)
            else:
                k_hi = self._k_hi
            vals = self._vals
            if k_hi > self._k_hi:
                ks = np.arange(self._k_hi, k_hi)
                inc = np.cumsum(self._cells(ks * self.step))
                vals = np.concatenate([vals, vals[-1] + inc])
            if k_lo < self._k_lo:
                ks = np.arange(k_lo, self._k_lo)
                dec = np.cumsum(self._cells(ks * self.step)[::-1])[::-1]
                vals = np.concatenate([vals[0] - dec, vals])
            self._k_lo, self._k_hi, self._vals = k_lo, k_hi, vals
            grid = np.arange(k_lo, k_hi + 1) * self.step
            self._spline = CubicHermiteSpline(grid, vals, np.asarray(self.f_values(grid), dtype=float))

    table_limit = 100.0

    def _direct(self, xs: np.ndarray) -> np.ndarray:
        """F beyond the table edge, integrating segment by segment between sorted points."""
        out = np.empty_like(xs)
        for sign in (1.0, -1.0):
            sel = np.flatnonzero(sign * xs > 0)
            if sel.size == 0:
                continue
            order = sel[np.argsort(sign * xs[sel])]
            edge = sign * self.table_limit
            acc = float(self._table_eval(np.array([edge]))[0])
            prev = edge
            fn = _scalar_fn(self.f)
            for t in order:
                acc += adaptive_simpson(fn, prev, float(xs[t]), tol=1e-12)
                prev = float(xs[t])
                out[t] = acc
        return out

    def _table_eval(self, xs: np.ndarray) -> np.ndarray:
        if xs.size:
            self._extend(float(xs.min()), float(xs.max()))
        return self._spline(xs) if xs.size else xs.copy()

    def __call__(self, xi):
        xi_arr = np.asarray(xi, dtype=float)
        if self.closed_form is not None:
            out = evaluate(self.closed_form, u=xi_arr)
            out = np.broadcast_to(out, xi_arr.shape).astype(float) - float(evaluate(self.closed_form, u=0.0))
        else:
            flat = xi_arr.ravel()
            far = np.abs(flat) > self.table_limit
            out = np.empty_like(flat)
            out[~far] = self._table_eval(flat[~far])
            if far.any():
                out[far] = self._direct(flat[far])
            out = np.where(flat == 0.0, 0.0, out).reshape(xi_arr.shape)
        return float(out) if np.ndim(xi) == 0 else np.asarray(out, dtype=float)

    def f_prime(self, u, h: float = 1e-6):
        """f'(u) by central differences."""
        u = np.asarray(u, dtype=float)
        return (np.asarray(self.f_values(u + h)) - np.asarray(self.f_values(u - h))) / (2 * h)
