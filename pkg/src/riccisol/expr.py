"""Expression language for metric components and potentials.

Closed-form scalar expressions over coordinates ``x1``..``x5`` with the usual
arithmetic operators and a fixed set of analytic functions.  Expressions are
parsed once into a small AST and then evaluated either over jets (with full
derivative information) or over plain floats.

Grammar (EBNF, also reproduced in the README):

    expr     = term { ("+" | "-") term } ;
    term     = unary { ("*" | "/") unary } ;
    unary    = "-" unary | power ;
    power    = atom [ "^" exponent ] ;
    exponent = [ "-" ] number [ "^" exponent ] ;   (* literal towers only *)
    atom     = number | "pi" | "e" | coord | func "(" expr ")" | "(" expr ")" ;
    coord    = "x1" | "x2" | "x3" | "x4" | "x5" ;
    func     = "exp" | "log" | "sin" | "cos" | "sinh" | "cosh" | "tanh"
             | "sqrt" | "atan" ;

Precedence: ``^`` (right-assoc, literal exponents only) binds tighter than
unary minus, which binds tighter than ``*``/``/``, which bind tighter than
``+``/``-``.  A non-integer literal exponent is desugared at parse time to
``exp(r*log(base))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from riccisol import jet
from riccisol.jet import Jet, JetDomainError, JetSpace, jet_space

FUNCTIONS = ("exp", "log", "sin", "cos", "sinh", "cosh", "tanh", "sqrt", "atan")
CONSTANTS = {"pi": math.pi, "e": math.e}
MAX_COORDS = 5


class ExprError(ValueError):
    """Base class for expression-language failures."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, line: int, col: int, expected=()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        exp = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"syntax error at {line}:{col}: {message}{exp}")


class ExprEvalError(ExprError):
    """A domain failure during evaluation, tagged with the source location."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    pos: tuple[int, int] = field(default=(0, 0), compare=False, kw_only=True)


@dataclass(frozen=True)
class Num(Node):
    value: float = 0.0


@dataclass(frozen=True)
class Const(Node):
    name: str = "pi"


@dataclass(frozen=True)
class Coord(Node):
    index: int = 0  # zero-based; surface syntax is x{index+1}


@dataclass(frozen=True)
class Neg(Node):
    arg: Node = None


@dataclass(frozen=True)
class BinOp(Node):
    op: str = "+"
    left: Node = None
    right: Node = None


@dataclass(frozen=True)
class Pow(Node):
    base: Node = None
    exponent: int = 1


@dataclass(frozen=True)
class Call(Node):
    fn: str = "exp"
    arg: Node = None


def max_coord(node: Node) -> int:
    """Highest 1-based coordinate index used, 0 if none."""
    if isinstance(node, Coord):
        return node.index + 1
    if isinstance(node, Neg):
        return max_coord(node.arg)
    if isinstance(node, BinOp):
        return max(max_coord(node.left), max_coord(node.right))
    if isinstance(node, Pow):
        return max_coord(node.base)
    if isinstance(node, Call):
        return max_coord(node.arg)
    return 0


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_SINGLE = set("+-*/^(),")


@dataclass
class _Token:
    kind: str  # 'num' | 'ident' | one of _SINGLE | 'eof'
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch in _SINGLE:
            toks.append(_Token(ch, ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (text[j].isdigit() or (text[j] == "." and not seen_dot)):
                seen_dot = seen_dot or text[j] == "."
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            toks.append(_Token("num", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Token("ident", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", line, col)
    toks.append(_Token("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str) -> _Token:
        t = self.peek()
        if t.kind != kind:
            raise ExprSyntaxError(
                f"got {t.text!r}" if t.kind != "eof" else "unexpected end of input",
                t.line,
                t.col,
                expected=(kind,),
            )
        return self.next()

    def parse(self) -> Node:
        node = self.expr()
        t = self.peek()
        if t.kind != "eof":
            raise ExprSyntaxError(
                f"trailing input {t.text!r}", t.line, t.col, expected=("end of input",)
            )
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.next()
            rhs = self.term()
            node = BinOp(op=op.kind, left=node, right=rhs, pos=(op.line, op.col))
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind in ("*", "/"):
            op = self.next()
            rhs = self.unary()
            node = BinOp(op=op.kind, left=node, right=rhs, pos=(op.line, op.col))
        return node

    def unary(self) -> Node:
        t = self.peek()
        if t.kind == "-":
            self.next()
            return Neg(arg=self.unary(), pos=(t.line, t.col))
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        t = self.peek()
        if t.kind != "^":
            return base
        self.next()
        r = self.exponent_literal()
        if float(r).is_integer():
            return Pow(base=base, exponent=int(r), pos=(t.line, t.col))
        # non-integer literal exponent desugars to exp(r*log(base))
        pos = (t.line, t.col)
        r_node = Neg(arg=Num(value=-r, pos=pos), pos=pos) if r < 0 else Num(value=r, pos=pos)
        return Call(
            fn="exp",
            arg=BinOp(op="*", left=r_node,
                      right=Call(fn="log", arg=base, pos=pos), pos=pos),
            pos=pos,
        )

    def exponent_literal(self) -> float:
        t = self.peek()
        sign = 1.0
        if t.kind == "-":
            self.next()
            sign = -1.0
            t = self.peek()
        if t.kind != "num":
            raise ExprSyntaxError(
                "exponent must be a numeric literal",
                t.line,
                t.col,
                expected=("number",),
            )
        self.next()
        value = sign * float(t.text)
        if self.peek().kind == "^":  # right-associative literal tower
            self.next()
            value = value ** self.exponent_literal()
        return value

    def atom(self) -> Node:
        t = self.peek()
        if t.kind == "num":
            self.next()
            return Num(value=float(t.text), pos=(t.line, t.col))
        if t.kind == "(":
            self.next()
            node = self.expr()
            self.expect(")")
            return node
        if t.kind == "ident":
            self.next()
            name = t.text
            if name in CONSTANTS:
                return Const(name=name, pos=(t.line, t.col))
            if len(name) == 2 and name[0] == "x" and name[1].isdigit():
                idx = int(name[1])
                if 1 <= idx <= MAX_COORDS:
                    return Coord(index=idx - 1, pos=(t.line, t.col))
            if name in FUNCTIONS:
                self.expect("(")
                args = [self.expr()]
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.expr())
                self.expect(")")
                if len(args) != 1:
                    raise ExprSyntaxError(
                        f"{name} takes 1 argument, got {len(args)}", t.line, t.col
                    )
                return Call(fn=name, arg=args[0], pos=(t.line, t.col))
            raise ExprSyntaxError(f"unknown identifier {name!r}", t.line, t.col)
        msg = "unexpected end of input" if t.kind == "eof" else f"got {t.text!r}"
        raise ExprSyntaxError(msg, t.line, t.col, expected=("number", "coordinate", "'('"))


def parse(text: str) -> Node:
    """Parse an expression string into its AST."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# canonical printer
# ---------------------------------------------------------------------------

def _fmt_num(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def print_expr(node: Node) -> str:
    """Fully parenthesized canonical form; parse(print_expr(e)) == e."""
    if isinstance(node, Num):
        if node.value < 0:
            return f"(-{_fmt_num(-node.value)})"
        return _fmt_num(node.value)
    if isinstance(node, Const):
        return node.name
    if isinstance(node, Coord):
        return f"x{node.index + 1}"
    if isinstance(node, Neg):
        return f"(-{print_expr(node.arg)})"
    if isinstance(node, BinOp):
        return f"({print_expr(node.left)}{node.op}{print_expr(node.right)})"
    if isinstance(node, Pow):
        return f"({print_expr(node.base)}^{node.exponent})"
    if isinstance(node, Call):
        return f"{node.fn}({print_expr(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _check_dim(node: Node, dim: int):
    used = max_coord(node)
    if used > dim:
        raise ExprError(
            f"expression uses coordinate x{used} but the chart dimension is {dim}"
        )


def eval_jet_arrays(node: Node, points: np.ndarray, space: JetSpace) -> np.ndarray:
    """Evaluate at a batch of points; returns coefficients of shape (B, ncoeff)."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != space.dim:
        raise ExprError(f"points must have shape (B, {space.dim})")
    _check_dim(node, space.dim)
    nb = points.shape[0]

    def rec(e: Node) -> np.ndarray:
        try:
            if isinstance(e, Num):
                out = np.zeros((nb, space.ncoeff))
                out[:, 0] = e.value
                return out
            if isinstance(e, Const):
                out = np.zeros((nb, space.ncoeff))
                out[:, 0] = CONSTANTS[e.name]
                return out
            if isinstance(e, Coord):
                out = np.zeros((nb, space.ncoeff))
                out[:, 0] = points[:, e.index]
                if space.order >= 1:
                    unit = tuple(1 if k == e.index else 0 for k in range(space.dim))
                    out[:, space.pos[unit]] = 1.0
                return out
            if isinstance(e, Neg):
                return -rec(e.arg)
            if isinstance(e, BinOp):
                a, b = rec(e.left), rec(e.right)
                if e.op == "+":
                    return a + b
                if e.op == "-":
                    return a - b
                if e.op == "*":
                    return jet.mul_arrays(space, a, b)
                return jet.div_arrays(space, a, b)
            if isinstance(e, Pow):
                return jet.powi_arrays(space, rec(e.base), e.exponent)
            if isinstance(e, Call):
                return jet.unary_arrays(space, e.fn, rec(e.arg))
        except JetDomainError as err:
            line, col = e.pos
            raise ExprEvalError(f"{err} in sub-expression at {line}:{col}") from err
        raise TypeError(f"not an expression node: {e!r}")

    return rec(node)


def eval_jet(node: Node, point, dim: int, order: int) -> Jet:
    """Degree-`order` Taylor expansion of the expression at one point."""
    sp = jet_space(dim, order)
    pts = np.asarray(point, dtype=float).reshape(1, dim)
    return Jet(sp, eval_jet_arrays(node, pts, sp)[0])


_FLOAT_FN = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "sqrt": np.sqrt,
    "atan": np.arctan,
}


def eval_float(node: Node, points: np.ndarray) -> np.ndarray:
    """Plain float evaluation at a batch of points, shape (B, dim) -> (B,)."""
    points = np.asarray(points, dtype=float)
    single = points.ndim == 1
    if single:
        points = points[None, :]

    def rec(e: Node) -> np.ndarray:
        if isinstance(e, Num):
            return np.full(points.shape[0], e.value)
        if isinstance(e, Const):
            return np.full(points.shape[0], CONSTANTS[e.name])
        if isinstance(e, Coord):
            if e.index >= points.shape[1]:
                raise ExprError(
                    f"expression uses coordinate x{e.index + 1} but points have "
                    f"dimension {points.shape[1]}"
                )
            return points[:, e.index].astype(float)
        if isinstance(e, Neg):
            return -rec(e.arg)
        if isinstance(e, BinOp):
            a, b = rec(e.left), rec(e.right)
            return {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide}[
                e.op
            ](a, b)
        if isinstance(e, Pow):
            return rec(e.base) ** e.exponent
        if isinstance(e, Call):
            return _FLOAT_FN[e.fn](rec(e.arg))
        raise TypeError(f"not an expression node: {e!r}")

    out = rec(node)
    return out[0] if single else out
