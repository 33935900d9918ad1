"""The polynomial-map text format and JSON helpers.

A document is a sequence of statements separated by newlines or ``;``::

    vars: x1, x2; order: 6
    x1 -> x1 + x2^3     # comments run to the end of the line
    x2 -> x2

Both header statements are optional.  Without ``vars`` the variables are
the binding targets; without ``order`` the map is an exact polynomial and
may be expanded at any order (the default is its degree).  Expressions use
``+ - * / ^``, parentheses, numbers (``2``, ``0.5``, ``1e-3``, ``2.5i``),
``i``, ``pi`` and ``exp``/``cos``/``sin`` of constants.  Constants are
folded while parsing, so every document is a polynomial map.
"""

from __future__ import annotations

import cmath
import json
import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import kernels
from .basis import get_basis
from .errors import FFGError, OrderMismatch
from .series import Series, default_tol
from .transform import PolyMap, Transformation

MAX_DEPTH = 100
MAX_VARS = 12
MAX_BASIS = 200_000
RESERVED = {"vars", "order", "i", "pi", "exp", "cos", "sin"}
FUNCTIONS = {"exp": cmath.exp, "cos": cmath.cos, "sin": cmath.sin}


class TextError(FFGError, ValueError):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class ParseError(TextError):
    """Malformed input."""


class SemanticError(TextError):
    """Well-formed input that does not describe a map with zero constant term."""


# ------------------------------------------------------------------ tokens


@dataclass(frozen=True)
class Token:
    kind: str  # num, imag, ident, op, arrow, sep, end
    text: str
    line: int
    column: int


_TOKEN = re.compile(
    r"""
    (?P<space>[ \t\r\f\v]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<op>[-+*/^(),:])
  | (?P<sep>;)
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start, depth = 0, 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "imag":
            kind = "num"
        if kind == "newline":
            if depth == 0:
                tokens.append(Token("sep", "\n", line, col))
            line += 1
            line_start = m.end()
        elif kind == "num":
            tokens.append(Token("imag" if m.group("imag") else "num", m.group("num"), line, col))
        elif kind not in ("space", "comment"):
            tok = m.group()
            if tok == "(":
                depth += 1
            elif tok == ")":
                depth = max(0, depth - 1)
            tokens.append(Token(kind, tok, line, col))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


# ------------------------------------------------------------------ trees


@dataclass(frozen=True)
class Num:
    value: complex
    line: int
    column: int


@dataclass(frozen=True)
class Var:
    index: int
    name: str
    line: int
    column: int


@dataclass(frozen=True)
class Neg:
    operand: "Node"
    line: int
    column: int


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"
    line: int
    column: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"
    line: int
    column: int


Node = Union[Num, Var, Neg, BinOp, Call]
ExpressionTree = Node


@dataclass
class Binding:
    name: str
    expr: Node
    line: int
    column: int


@dataclass
class MapDocument:
    variables: list[str]
    bindings: list[Binding]  # in variable order
    order: int
    order_declared: bool = True
    source: str = field(default="", repr=False)

    @property
    def n(self) -> int:
        return len(self.variables)


def _fold(node: Node, where: Token) -> Node:
    """Evaluate a node whose operands are all constants."""
    try:
        if isinstance(node, Neg):
            value = -node.operand.value
        elif isinstance(node, Call):
            value = FUNCTIONS[node.func](node.arg.value)
        else:
            a, b = node.left.value, node.right.value
            if node.op == "+":
                value = a + b
            elif node.op == "-":
                value = a - b
            elif node.op == "*":
                value = a * b
            elif node.op == "/":
                value = a / b
            else:
                value = a ** int(b.real)
    except (OverflowError, ZeroDivisionError, ValueError) as exc:
        raise SemanticError(f"cannot evaluate constant: {exc}", where.line, where.column)
    value = complex(value)
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise SemanticError("constant is not finite", where.line, where.column)
    return Num(value, node.line, node.column)


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.depth = 0
        self.names: dict[str, int] | None = None  # None while inferring

    # token helpers
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def expect(self, kind: str, text: str | None = None, what: str = "") -> Token:
        tok = self.peek()
        if not self.at(kind, text):
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ParseError(f"expected {what or text or kind}, found {found}", tok.line, tok.column)
        return self.next()

    def fail(self, message: str, tok: Token | None = None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.column)

    # statements
    def document(self):
        variables = order = None
        bindings: list[tuple[Token, list[Token]]] = []
        while True:
            while self.at("sep"):
                self.next()
            if self.at("end"):
                break
            tok = self.peek()
            follows_colon = self.tokens[self.pos + 1].text == ":"
            if tok.kind == "ident" and tok.text == "vars" and follows_colon:
                if variables is not None or bindings:
                    self.fail("'vars' must appear once, before the bindings")
                self.next()
                self.next()
                variables = [self._declared_name()]
                while self.at("op", ","):
                    self.next()
                    variables.append(self._declared_name())
            elif tok.kind == "ident" and tok.text == "order" and follows_colon:
                if order is not None or bindings:
                    self.fail("'order' must appear once, before the bindings")
                self.next()
                self.next()
                num = self.expect("num", what="an integer order")
                if not num.text.isdigit() or int(num.text) < 1:
                    self.fail("order must be a positive integer", num)
                order = (int(num.text), num)
            else:
                name = self.expect("ident", what="a binding 'name -> expression'")
                self.expect("arrow", what="'->'")
                start = self.pos
                depth = 0
                while not (self.at("end") or (self.at("sep") and depth == 0)):
                    t = self.next()
                    depth += t.text == "("
                    depth -= t.text == ")"
                bindings.append((name, start, self.pos))
            if not (self.at("sep") or self.at("end")):
                self.fail(f"unexpected {self.peek().text!r}")
        return variables, order, bindings

    def _declared_name(self) -> str:
        tok = self.expect("ident", what="a variable name")
        if tok.text in RESERVED:
            self.fail(f"{tok.text!r} is reserved", tok)
        return tok.text

    # expressions
    def expression(self) -> Node:
        self.depth += 1
        if self.depth > MAX_DEPTH:
            self.fail("expression nested too deeply")
        node = self.term()
        while self.at("op", "+") or self.at("op", "-"):
            tok = self.next()
            node = self._binop(tok, node, self.term())
        self.depth -= 1
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at("op", "*") or self.at("op", "/"):
            tok = self.next()
            right = self.unary()
            if tok.text == "/":
                if not isinstance(right, Num):
                    raise SemanticError("divisor must be a constant", tok.line, tok.column)
                if right.value == 0:
                    raise SemanticError("division by zero", tok.line, tok.column)
            node = self._binop(tok, node, right)
        return node

    def unary(self) -> Node:
        if self.at("op", "-") or self.at("op", "+"):
            tok = self.next()
            self.depth += 1
            if self.depth > MAX_DEPTH:
                self.fail("expression nested too deeply", tok)
            operand = self.unary()
            self.depth -= 1
            if tok.text == "+":
                return operand
            node = Neg(operand, tok.line, tok.column)
            return _fold(node, tok) if isinstance(operand, Num) else node
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at("op", "^"):
            tok = self.next()
            self.depth += 1
            if self.depth > MAX_DEPTH:
                self.fail("expression nested too deeply", tok)
            exp = self.unary()
            self.depth -= 1
            ok = isinstance(exp, Num) and exp.value.imag == 0 and exp.value.real >= 0
            if not ok or not float(exp.value.real).is_integer():
                raise SemanticError(
                    "exponent must be a nonnegative integer constant", tok.line, tok.column
                )
            return self._binop(tok, base, Num(complex(int(exp.value.real)), exp.line, exp.column))
        return base

    def atom(self) -> Node:
        tok = self.peek()
        if tok.kind in ("num", "imag"):
            self.next()
            x = float(tok.text)
            if not math.isfinite(x):
                raise SemanticError(f"number {tok.text} overflows", tok.line, tok.column)
            value = complex(x) if tok.kind == "num" else complex(0.0, x)
            return Num(value, tok.line, tok.column)
        if self.at("op", "("):
            self.next()
            node = self.expression()
            self.expect("op", ")", what="')'")
            return node
        if tok.kind == "ident":
            self.next()
            if tok.text == "i":
                return Num(1j, tok.line, tok.column)
            if tok.text == "pi":
                return Num(complex(math.pi), tok.line, tok.column)
            if tok.text in FUNCTIONS:
                self.expect("op", "(", what=f"'(' after {tok.text}")
                arg = self.expression()
                self.expect("op", ")", what="')'")
                if not isinstance(arg, Num):
                    raise SemanticError(
                        f"argument of {tok.text} must not contain variables",
                        tok.line,
                        tok.column,
                    )
                return _fold(Call(tok.text, arg, tok.line, tok.column), tok)
            if tok.text in RESERVED:
                self.fail(f"{tok.text!r} is reserved", tok)
            if tok.text not in self.names:
                raise SemanticError(f"undeclared variable {tok.text!r}", tok.line, tok.column)
            return Var(self.names[tok.text], tok.text, tok.line, tok.column)
        found = "end of input" if tok.kind in ("end", "sep") else repr(tok.text)
        self.fail(f"expected an operand, found {found}", tok)

    def _binop(self, tok: Token, left: Node, right: Node) -> Node:
        node = BinOp(tok.text, left, right, tok.line, tok.column)
        if isinstance(left, Num) and isinstance(right, Num):
            return _fold(node, tok)
        return node


def _infer_variables(names: list[Token]) -> list[str]:
    texts = list(dict.fromkeys(t.text for t in names))
    indexed = [re.fullmatch(r"x(\d+)", s) for s in texts]
    if len(texts) > 1 and all(indexed):
        return sorted(texts, key=lambda s: int(s[1:]))
    return texts


def parse_map(text: str | bytes, order: int | None = None, tol: float | None = None) -> MapDocument:
    """Parse and check a map document.

    Raises :class:`ParseError` for syntax errors and :class:`SemanticError`
    for nonzero constant terms, variables in transcendental calls,
    non-integer exponents and non-constant divisors; both carry a line and
    column.
    """
    tol = default_tol() if tol is None else tol
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8 ({exc.reason})", 1, exc.start + 1)
    try:
        return _parse(text, order, tol)
    except RecursionError:
        raise ParseError("expression nested too deeply", 1, 1) from None


def _parse(text: str, order: int | None, tol: float) -> MapDocument:
    p = _Parser(text)
    variables, declared, raw = p.document()
    if not raw:
        p.fail("document has no bindings")
    targets = [name for name, _, _ in raw]
    if variables is None:
        variables = _infer_variables(targets)
    if len(set(variables)) != len(variables):
        raise ParseError("variables declared twice", 1, 1)
    for name, _, _ in raw:
        if name.text in RESERVED:
            p.fail(f"{name.text!r} is reserved", name)
    if len(variables) > MAX_VARS:
        raise SemanticError(f"at most {MAX_VARS} variables are supported", 1, 1)
    p.names = {v: i for i, v in enumerate(variables)}

    by_name: dict[str, Binding] = {}
    for name, start, stop in raw:
        if name.text not in p.names:
            raise SemanticError(f"binding target {name.text!r} is not a variable", name.line, name.column)
        if name.text in by_name:
            raise SemanticError(f"{name.text!r} is bound twice", name.line, name.column)
        if start == stop:
            p.fail("empty expression", p.tokens[start])
        p.pos = start
        p.depth = 0
        expr = p.expression()
        if p.pos != stop:
            p.fail(f"unexpected {p.peek().text!r}")
        c0 = _value_at_zero(expr, name)
        if abs(c0) > tol:
            raise SemanticError(
                f"component {name.text} has nonzero constant term {c0:g}", name.line, name.column
            )
        by_name[name.text] = Binding(name.text, expr, name.line, name.column)
    missing = [v for v in variables if v not in by_name]
    if missing:
        raise SemanticError(f"no binding for {missing[0]!r}", 1, 1)
    bindings = [by_name[v] for v in variables]

    if declared is not None:
        doc_order, declared_flag = declared[0], True
    else:
        doc_order = max(1, max(_degree_bound(b.expr) for b in bindings))
        declared_flag = False
    if order is not None:
        if declared_flag and order > doc_order:
            raise OrderMismatch(
                f"cannot raise order {doc_order} to {order}: "
                "missing coefficients are unknown, not zero"
            )
        doc_order = order
    if math.comb(len(variables) + doc_order, doc_order) > MAX_BASIS:
        line, col = (declared[1].line, declared[1].column) if declared else (1, 1)
        raise SemanticError(
            f"order {doc_order} in {len(variables)} variables is too large", line, col
        )
    return MapDocument(variables, bindings, doc_order, declared_flag, text)


def _value_at_zero(node: Node, where) -> complex:
    try:
        return _eval0(node)
    except (OverflowError, ZeroDivisionError) as exc:
        raise SemanticError(f"cannot evaluate constant term: {exc}", where.line, where.column)


def _eval0(node: Node) -> complex:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return 0j
    if isinstance(node, Neg):
        return -_eval0(node.operand)
    a, b = _eval0(node.left), _eval0(node.right)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    if node.op == "*":
        return a * b
    if node.op == "/":
        return a / b
    return a ** int(b.real)


def _degree_bound(node: Node) -> int:
    if isinstance(node, Num):
        return 0
    if isinstance(node, Var):
        return 1
    if isinstance(node, Neg):
        return _degree_bound(node.operand)
    left = _degree_bound(node.left)
    if node.op in "+-":
        return max(left, _degree_bound(node.right))
    if node.op == "*":
        return left + _degree_bound(node.right)
    if node.op == "/":
        return left
    return left * int(node.right.value.real)


# ------------------------------------------------------------------ expansion


def _expand(node: Node, n: int, order: int) -> np.ndarray | complex:
    """A constant stays a Python complex; anything else becomes a dense array."""
    if isinstance(node, Num):
        return node.value
    basis = get_basis(n, order)
    if isinstance(node, Var):
        arr = np.zeros(basis.size, dtype=np.complex128)
        arr[1 + node.index] = 1
        return arr
    if isinstance(node, Neg):
        return -_expand(node.operand, n, order)
    a = _expand(node.left, n, order)
    if node.op == "^":
        return _poly_power(a, int(node.right.value.real), basis)
    b = _expand(node.right, n, order)
    if node.op == "/":
        return a / b
    if node.op == "*":
        if isinstance(a, complex) or isinstance(b, complex):
            return a * b
        return kernels.truncated_mul(a, b, basis)
    a, b = _as_array(a, basis), _as_array(b, basis)
    return a + b if node.op == "+" else a - b


def _as_array(x, basis):
    if isinstance(x, complex):
        arr = np.zeros(basis.size, dtype=np.complex128)
        arr[0] = x
        return arr
    return x


def _poly_power(a: np.ndarray, k: int, basis) -> np.ndarray:
    result = np.zeros(basis.size, dtype=np.complex128)
    result[0] = 1
    if k == 0:
        return result
    if a[0] == 0 and k > basis.order:
        return result * 0
    first = True
    while k:
        if k & 1:
            result = a.copy() if first else kernels.truncated_mul(result, a, basis)
            first = False
        k >>= 1
        if k:
            a = kernels.truncated_mul(a, a, basis)
    return result


def _components(doc: MapDocument, order: int | None) -> tuple[int, np.ndarray]:
    if order is None:
        order = doc.order
    elif doc.order_declared and order > doc.order:
        raise OrderMismatch(
            f"cannot raise order {doc.order} to {order}: "
            "missing coefficients are unknown, not zero"
        )
    if math.comb(doc.n + order, order) > MAX_BASIS:
        raise SemanticError(f"order {order} in {doc.n} variables is too large", 1, 1)
    basis = get_basis(doc.n, order)
    rows = []
    with np.errstate(all="raise"):
        for b in doc.bindings:
            try:
                row = _as_array(_expand(b.expr, doc.n, order), basis)
            except FloatingPointError:
                raise SemanticError("coefficient overflow", b.line, b.column) from None
            if not np.isfinite(row).all():
                raise SemanticError("coefficient overflow", b.line, b.column)
            rows.append(row)
    coeffs = np.array(rows)
    coeffs[:, 0] = 0
    return order, coeffs


def to_transformation(doc: MapDocument, order: int | None = None) -> Transformation:
    """Expand the document into a Transformation at ``order`` (default: its own)."""
    order, coeffs = _components(doc, order)
    return Transformation(doc.n, order, coeffs)


def to_polymap(doc: MapDocument, cls=PolyMap, order: int | None = None):
    order, coeffs = _components(doc, order)
    return cls(doc.n, order, coeffs)


def read_map(text: str | bytes, cls=Transformation, order: int | None = None):
    """Parse either the text format or the JSON form of a map."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8 ({exc.reason})", 1, exc.start + 1)
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
            out = cls.from_json(data)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid map JSON: {exc}", 1, 1) from None
        return out if order is None else out.truncate(order)
    return to_polymap(parse_map(text), cls, order)


# ------------------------------------------------------------------ emission


def variable_names(n: int) -> list[str]:
    return ["z"] if n == 1 else [f"x{i + 1}" for i in range(n)]


def _num(x: float) -> str:
    return format(x, ".17g")


def _monomial(exp, names) -> str:
    parts = []
    for e, name in zip(exp, names):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{int(e)}")
    return "*".join(parts)


def _term(c: complex, mono: str) -> tuple[str, str]:
    """Sign and body of one term; the sign is folded out when possible."""
    re_, im = c.real, c.imag
    if im == 0:
        sign, mag = ("-", -re_) if re_ < 0 else ("+", re_)
        coef = "" if mag == 1 else _num(mag)
    elif re_ == 0:
        sign, mag = ("-", -im) if im < 0 else ("+", im)
        coef = _num(mag) + "i"
    else:
        op = "-" if im < 0 else "+"
        sign, coef = "+", f"({_num(re_)}{op}{_num(abs(im))}i)"
    if not coef:
        return sign, mono
    return sign, f"{coef}*{mono}"


def emit_polynomial(row: np.ndarray, basis, names) -> str:
    out = []
    for k in np.flatnonzero(row):
        if k == 0:
            continue
        sign, body = _term(complex(row[k]), _monomial(basis.exps[k], names))
        if not out:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out) if out else "0"


def emit_map(u: PolyMap) -> str:
    """Canonical text; ``parse_map`` reads it back to the same coefficients."""
    names = variable_names(u.n)
    basis = u.basis
    lines = [f"vars: {', '.join(names)}; order: {u.order}"]
    for name, row in zip(names, u.coeffs):
        lines.append(f"{name} -> {emit_polynomial(row, basis, names)}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ JSON


def dumps(obj) -> str:
    """Stable JSON text: insertion-ordered keys, two-space indent, newline."""
    return json.dumps(obj, indent=2) + "\n"


def series_from_json(text: str) -> Series:
    return Series.from_json(json.loads(text))


__all__ = [
    "Binding",
    "ExpressionTree",
    "MapDocument",
    "ParseError",
    "SemanticError",
    "dumps",
    "emit_map",
    "parse_map",
    "read_map",
    "to_polymap",
    "to_transformation",
    "tokenize",
]
