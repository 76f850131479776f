"""Expression parsing into a codelist: a straight-line program of elementary operations.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = ("-" | "+") unary | power ;
    power   = atom [ ("^" | "**") unary ] ;        (* exponent: natural constant >= 2 *)
    atom    = number | var | func "(" expr ")" | "(" expr ")" ;
    var     = "x" digits ;                          (* x1 ... xn *)
    func    = "sqrt" | "exp" | "ln" ;

Lines are numbered from 1; lines ``1..n_vars`` are the variables.  Non-variable
lines are scheduled by their height in the expression tree (ties broken by
left-to-right order), which reproduces the usual hand-written layout where all
powers come first, then scalings, then sums.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import DomainViolation, ParseError

__all__ = ["Op", "CodelistLine", "Codelist", "parse", "eval_point", "dump"]


class Op(str, Enum):
    VAR = "var"
    ADD_CONST = "addConst"
    MUL_BY_CONST = "mulByConst"
    ADD = "add"
    MUL = "mul"
    ONE_OVER = "oneOver"
    SQUARE = "square"
    CUBE = "cube"
    POW_NAT = "powNat"
    SQRT = "sqrt"
    EXP = "exp"
    LN = "ln"

    def __str__(self) -> str:
        return self.value


BINARY_OPS = frozenset({Op.ADD, Op.MUL})
CONST_OPS = frozenset({Op.ADD_CONST, Op.MUL_BY_CONST})


@dataclass(frozen=True)
class CodelistLine:
    """One codelist line.

    ``param`` holds the variable index for ``VAR`` (1-based), the constant for
    ``ADD_CONST``/``MUL_BY_CONST`` and the exponent for ``POW_NAT``.
    """

    op: Op
    arg_i: int | None = None
    arg_j: int | None = None
    param: float | int | None = None

    @property
    def args(self) -> tuple[int, ...]:
        return tuple(a for a in (self.arg_i, self.arg_j) if a is not None)


@dataclass(frozen=True)
class Codelist:
    n_vars: int
    lines: tuple[CodelistLine, ...]
    result: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "lines", tuple(self.lines))
        if self.n_vars < 1:
            raise ValueError("a codelist needs at least one variable")
        if len(self.lines) < self.n_vars:
            raise ValueError("codelist is shorter than its variable block")
        for k, line in enumerate(self.lines, start=1):
            if k <= self.n_vars:
                if line.op is not Op.VAR or line.param != k:
                    raise ValueError(f"line {k} must be var x{k}")
                continue
            if line.op is Op.VAR:
                raise ValueError(f"var line at position {k} outside the variable block")
            expected = 2 if line.op in BINARY_OPS else 1
            if len(line.args) != expected:
                raise ValueError(f"line {k} ({line.op}) needs {expected} argument(s)")
            if any(not 1 <= a < k for a in line.args):
                raise ValueError(f"line {k} references a line that is not strictly earlier")
            if line.op in CONST_OPS and not math.isfinite(line.param):
                raise ValueError(f"line {k} has a non-finite constant")
            if line.op is Op.POW_NAT and (not isinstance(line.param, int) or line.param < 4):
                raise ValueError(f"line {k}: powNat exponent must be an integer >= 4")
        if not 1 <= self.result <= len(self.lines):
            raise ValueError("result index out of range")

    def __len__(self) -> int:
        return len(self.lines)

    def line(self, k: int) -> CodelistLine:
        """Line ``y_k`` (1-based)."""
        return self.lines[k - 1]

    def op_counts(self) -> dict[Op, int]:
        counts: dict[Op, int] = {}
        for line in self.lines:
            counts[line.op] = counts.get(line.op, 0) + 1
        return counts


# --- expression tree ----------------------------------------------------------


class _Node:
    __slots__ = ("kind", "children", "param")

    def __init__(self, kind: str, children: tuple = (), param=None):
        self.kind = kind
        self.children = children
        self.param = param

    @property
    def is_const(self) -> bool:
        return self.kind == "const"


def _const(v: float, pos: int | None = None) -> _Node:
    if not math.isfinite(v):
        raise ParseError(f"constant subexpression evaluates to {v}", pos)
    return _Node("const", (), float(v))


def _addc(c: float, e: _Node) -> _Node:
    if e.is_const:
        return _const(e.param + c)
    if c == 0:
        return e
    if e.kind == "addc":
        return _addc(c + e.param, e.children[0])
    return _Node("addc", (e,), c)


def _mulc(c: float, e: _Node) -> _Node:
    if e.is_const:
        return _const(e.param * c)
    if c == 0:
        return _const(0.0)
    if c == 1:
        return e
    if e.kind == "mulc":
        return _mulc(c * e.param, e.children[0])
    return _Node("mulc", (e,), c)


def _add(a: _Node, b: _Node) -> _Node:
    if a.is_const:
        return _addc(a.param, b)
    if b.is_const:
        return _addc(b.param, a)
    return _Node("add", (a, b))


def _mul(a: _Node, b: _Node) -> _Node:
    if a.is_const:
        return _mulc(a.param, b)
    if b.is_const:
        return _mulc(b.param, a)
    return _Node("mul", (a, b))


def _inv(e: _Node, pos: int | None) -> _Node:
    if e.is_const:
        if e.param == 0:
            raise ParseError("division by zero", pos)
        return _const(1.0 / e.param, pos)
    return _Node("inv", (e,))


def _div(a: _Node, b: _Node, pos: int | None) -> _Node:
    if b.is_const:
        if b.param == 0:
            raise ParseError("division by zero", pos)
        return _mulc(1.0 / b.param, a)
    return _mul(a, _inv(b, pos))


def _pow(e: _Node, m: int, pos: int | None) -> _Node:
    if e.is_const:
        try:
            return _const(e.param**m, pos)
        except OverflowError as exc:
            raise ParseError("constant power overflows", pos) from exc
    return _Node("pow", (e,), m)


def _func(name: str, e: _Node, pos: int | None) -> _Node:
    if e.is_const:
        v = e.param
        if name == "sqrt":
            if v < 0:
                raise ParseError("sqrt of a negative constant", pos)
            return _const(math.sqrt(v), pos)
        if name == "ln":
            if v <= 0:
                raise ParseError("ln of a non-positive constant", pos)
            return _const(math.log(v), pos)
        try:
            return _const(math.exp(v), pos)
        except OverflowError as exc:
            raise ParseError("exp of a constant overflows", pos) from exc
    return _Node(name, (e,))


# --- tokenizer and recursive-descent parser ----------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\*\*|[-+*/^(),])
    """,
    re.VERBOSE,
)

FUNCTIONS = ("sqrt", "exp", "ln")


class _Parser:
    def __init__(self, text: str, n_vars: int):
        self.text = text
        self.n_vars = n_vars
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN_RE.match(text, pos)
            if m is None:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            if m.lastgroup != "ws":
                self.tokens.append((m.lastgroup, m.group(), pos))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, text, pos = self.take()
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def parse(self) -> _Node:
        node = self.expr()
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected token {text!r}", pos)
        return node

    def expr(self) -> _Node:
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            _, sym, _ = self.take()
            rhs = self.term()
            node = _add(node, rhs) if sym == "+" else _add(node, _mulc(-1.0, rhs))
        return node

    def term(self) -> _Node:
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            _, sym, pos = self.take()
            rhs = self.unary()
            node = _mul(node, rhs) if sym == "*" else _div(node, rhs, pos)
        return node

    def unary(self) -> _Node:
        sym = self.peek()[1]
        if sym == "-":
            self.take()
            return _mulc(-1.0, self.unary())
        if sym == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> _Node:
        base = self.atom()
        if self.peek()[1] in ("^", "**"):
            _, _, pos = self.take()
            exponent = self.unary()
            if not exponent.is_const:
                raise ParseError("exponent must be a constant", pos)
            m = exponent.param
            if not float(m).is_integer() or m < 2:
                raise ParseError(f"exponent must be a natural number >= 2, got {m:g}", pos)
            return _pow(base, int(m), pos)
        return base

    def atom(self) -> _Node:
        kind, text, pos = self.take()
        if kind == "num":
            return _const(float(text), pos)
        if kind == "name":
            if re.fullmatch(r"x\d+", text):
                k = int(text[1:])
                if not 1 <= k <= self.n_vars:
                    raise ParseError(f"variable {text} out of range 1..{self.n_vars}", pos)
                return _Node("var", (), k)
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return _func(text, arg, pos)
            if self.peek()[1] == "(":
                raise ParseError(f"unsupported function {text!r}", pos)
            raise ParseError(f"unknown name {text!r}", pos)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", pos)


_UNARY_KIND_TO_OP = {"inv": Op.ONE_OVER, "sqrt": Op.SQRT, "exp": Op.EXP, "ln": Op.LN}


def _emit(root: _Node, n_vars: int, cse: bool) -> Codelist:
    lines = [CodelistLine(Op.VAR, param=k) for k in range(1, n_vars + 1)]
    if root.kind == "var":
        return Codelist(n_vars, tuple(lines), root.param)

    # post-order walk collecting heights; iterative to survive deep expressions
    order: list[_Node] = []
    height: dict[int, int] = {}
    stack: list[tuple[_Node, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if node.kind == "var":
            height[id(node)] = 0
            continue
        if expanded:
            height[id(node)] = 1 + max(height[id(c)] for c in node.children)
            order.append(node)
        else:
            stack.append((node, True))
            for child in reversed(node.children):
                stack.append((child, False))
    rank = {id(node): pos for pos, node in enumerate(order)}
    schedule = sorted(order, key=lambda nd: (height[id(nd)], rank[id(nd)]))

    index: dict[int, int] = {}
    seen: dict[tuple, int] = {}

    def ref(node: _Node) -> int:
        return node.param if node.kind == "var" else index[id(node)]

    for node in schedule:
        kind = node.kind
        args = [ref(c) for c in node.children]
        if kind == "add":
            line = CodelistLine(Op.ADD, min(args), max(args))
        elif kind == "mul":
            line = CodelistLine(Op.MUL, min(args), max(args))
        elif kind == "addc":
            line = CodelistLine(Op.ADD_CONST, args[0], param=node.param)
        elif kind == "mulc":
            line = CodelistLine(Op.MUL_BY_CONST, args[0], param=node.param)
        elif kind == "pow":
            m = node.param
            if m == 2:
                line = CodelistLine(Op.SQUARE, args[0])
            elif m == 3:
                line = CodelistLine(Op.CUBE, args[0])
            else:
                line = CodelistLine(Op.POW_NAT, args[0], param=m)
        else:
            line = CodelistLine(_UNARY_KIND_TO_OP[kind], args[0])
        if cse:
            key = (line.op, line.arg_i, line.arg_j, line.param)
            if key in seen:
                index[id(node)] = seen[key]
                continue
            seen[key] = len(lines) + 1
        lines.append(line)
        index[id(node)] = len(lines)
    return Codelist(n_vars, tuple(lines), index[id(root)])


def parse(expression: str, n_vars: int, cse: bool = False) -> Codelist:
    """Parse ``expression`` over ``x1..x{n_vars}`` into a codelist.

    Subtraction becomes ``a + (-1)*b``, division ``a * oneOver(b)`` (or a
    constant scaling when the divisor is a literal), and literal-only
    subtrees are folded into ``addConst``/``mulByConst`` payloads.  With
    ``cse=True`` structurally identical lines are merged.
    """
    if n_vars < 1:
        raise ParseError("n_vars must be at least 1")
    root = _Parser(expression, n_vars).parse()
    if root.is_const:
        raise ParseError("expression is constant; its Hessian is identically zero")
    return _emit(root, n_vars, cse)


# --- point evaluation and dumping --------------------------------------------


def _point_op(line: CodelistLine, y: list[float], k: int) -> float:
    op = line.op
    a = y[line.arg_i - 1]
    if op is Op.ADD_CONST:
        return a + line.param
    if op is Op.MUL_BY_CONST:
        return line.param * a
    if op is Op.ADD:
        return a + y[line.arg_j - 1]
    if op is Op.MUL:
        return a * y[line.arg_j - 1]
    if op is Op.ONE_OVER:
        if a == 0:
            raise DomainViolation("reciprocal of zero", k, str(op))
        return 1.0 / a
    if op is Op.SQUARE:
        return a * a
    if op is Op.CUBE:
        return a * a * a
    if op is Op.POW_NAT:
        return a**line.param
    if op is Op.SQRT:
        if a < 0:
            raise DomainViolation(f"sqrt of negative value {a}", k, str(op))
        return math.sqrt(a)
    if op is Op.EXP:
        try:
            return math.exp(a)
        except OverflowError as exc:
            raise DomainViolation(f"exp({a}) overflows", k, str(op)) from exc
    if op is Op.LN:
        if a <= 0:
            raise DomainViolation(f"ln of non-positive value {a}", k, str(op))
        return math.log(a)
    raise AssertionError(op)


def eval_point(cl: Codelist, x: Sequence[float]) -> float:
    if len(x) != cl.n_vars:
        raise ValueError(f"expected {cl.n_vars} coordinates, got {len(x)}")
    y: list[float] = []
    for k, line in enumerate(cl.lines, start=1):
        if line.op is Op.VAR:
            y.append(float(x[line.param - 1]))
        else:
            y.append(_point_op(line, y, k))
    return y[cl.result - 1]


def _fmt_const(c: float) -> str:
    return repr(int(c)) if float(c).is_integer() and abs(c) < 1e15 else repr(c)


def format_line(k: int, line: CodelistLine) -> str:
    op = line.op
    i, j = line.arg_i, line.arg_j
    if op is Op.VAR:
        rhs = f"x{line.param}"
    elif op is Op.ADD_CONST:
        c = line.param
        rhs = f"y{i} + {_fmt_const(c)}" if c >= 0 else f"y{i} - {_fmt_const(-c)}"
    elif op is Op.MUL_BY_CONST:
        rhs = f"{_fmt_const(line.param)} * y{i}"
    elif op is Op.ADD:
        rhs = f"y{i} + y{j}"
    elif op is Op.MUL:
        rhs = f"y{i} * y{j}"
    elif op is Op.ONE_OVER:
        rhs = f"1 / y{i}"
    elif op is Op.POW_NAT:
        rhs = f"pow(y{i}, {line.param})"
    else:
        rhs = f"{op.value}(y{i})"
    return f"y{k} = {rhs}"


def dump(cl: Codelist) -> str:
    """One row per line, ``y4 = square(y2)`` style."""
    return "\n".join(format_line(k, line) for k, line in enumerate(cl.lines, start=1))
